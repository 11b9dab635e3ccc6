#include <cmath>
#include <doctest.h>

#include "wgres/modes.hpp"

using namespace wgres;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
const double kD = 0.7, kT = 0.3;
}  // namespace

TEST_SUITE("modes") {

TEST_CASE("mode values are normalized sines") {
  CHECK(mode_value(1, 0.0, kD) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mode_value(1, kD, kD) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mode_value(3, kD / 6.0, kD) ==
        doctest::Approx(std::sqrt(2.0 / kD)).epsilon(1e-14));
  // full-interval overlap is the normalization integral
  CHECK(gap_overlap(1, 1, 0.0, kD, kD) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gap_overlap(5, 5, 0.0, kD, kD) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(gap_overlap(2, 6, 0.0, kD, kD)) < 1e-14);
}

TEST_CASE("closed form matches composite quadrature") {
  const double eps = 0.11 * kD;
  for (int n : {1, 2, 5, 13, 40}) {
    for (int m : {1, 3, 12, 41}) {
      const double cf = gap_overlap(n, m, kT, eps, kD);
      const double q = gap_overlap_quadrature(n, m, kT, eps, kD, 200);
      CHECK(cf == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadrature error falls by about 2^10 per panel halving") {
  // one panel of 5 nodes is inaccurate for a fast integrand; each doubling
  // of the panel count should gain roughly 10 binary digits
  const int n = 9, m = 9;
  const double eps = 0.3 * kD, t = 0.2 * kD;
  const double exact = gap_overlap(n, m, t, eps, kD);
  const double e1 = std::abs(gap_overlap_quadrature(n, m, t, eps, kD, 5) - exact);
  const double e2 = std::abs(gap_overlap_quadrature(n, m, t, eps, kD, 10) - exact);
  const double e4 = std::abs(gap_overlap_quadrature(n, m, t, eps, kD, 20) - exact);
  REQUIRE(e1 > 1e-10);
  CHECK(e1 / e2 > 100.0);
  CHECK(e2 / e4 > 100.0);
}

TEST_CASE("partition of the interval sums to the kronecker delta") {
  const double eps = 0.17 * kD;
  for (int n : {1, 4, 9}) {
    for (int m : {1, 2, 9, 17}) {
      const double left = gap_overlap(n, m, 0.0, kT, kD);
      const double gap = gap_overlap(n, m, kT, eps, kD);
      const double right = gap_overlap(n, m, kT + eps, kD - kT - eps, kD);
      const double delta = n == m ? 1.0 : 0.0;
      CHECK(left + gap + right == doctest::Approx(delta).epsilon(1e-14));
    }
  }
}

TEST_CASE("symmetry and decay bound") {
  const double eps = 0.08 * kD;
  for (int n = 1; n <= 30; ++n)
    for (int m = 1; m <= 30; ++m) {
      const double v = gap_overlap(n, m, kT, eps, kD);
      CHECK(v == doctest::Approx(gap_overlap(m, n, kT, eps, kD)).epsilon(1e-13));
      if (n != m)
        CHECK(std::abs(v) <= 4.0 / (kPi * std::abs(n - m)) + 1e-15);
      else
        CHECK(std::abs(v) <= 2.0 * eps / kD + 1e-15);
    }
}

TEST_CASE("tables agree with scalar entries") {
  const double eps = 0.06 * kD;
  const OverlapTable tab = make_overlap_table(12, kT, eps, kD);
  REQUIRE(tab.N == 12);
  for (int n = 1; n <= 12; ++n)
    for (int m = 1; m <= 12; ++m) {
      CHECK(tab.obar(n - 1, m - 1) ==
            doctest::Approx(gap_overlap(n, m, kT, eps, kD)).epsilon(1e-14));
      CHECK(tab.wall(n - 1, m - 1) ==
            doctest::Approx(wall_overlap(n, m, kT, eps, kD)).epsilon(1e-14));
    }
  CHECK((tab.obar - tab.obar.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("geometry-level tables cover both directions in 3D") {
  Geometry g = default_geometry_3d();
  const double eps = 0.05 * g.d2;
  const Overlaps ov = make_overlaps(g, eps, 10);
  CHECK(ov.dir2.N == 10);
  CHECK(ov.dir3.N == 10);
  CHECK(ov.dir2.obar(0, 0) ==
        doctest::Approx(gap_overlap(1, 1, g.t, eps, g.d2)).epsilon(1e-14));
  CHECK(ov.dir3.obar(2, 4) ==
        doctest::Approx(gap_overlap(3, 5, g.t3, g.a * eps, g.d3)).epsilon(1e-14));
  const Overlaps ov2 = make_overlaps(default_geometry_2d(), eps, 6);
  CHECK(ov2.dir3.N == 0);
}

}  // TEST_SUITE
