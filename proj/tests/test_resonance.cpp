#include <cmath>
#include <doctest.h>

#include "wgres/resonance.hpp"

using namespace wgres;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_SUITE("resonance") {

TEST_CASE("context precomputes the level data") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{32, 128});
  CHECK(ctx.xi() == doctest::Approx(kPi * kPi * (1.0 + 1.0 / 0.49)).epsilon(1e-14));
  CHECK(ctx.clearance() == doctest::Approx(kPi * kPi).epsilon(1e-12));
  CHECK(ctx.disk_radius() == doctest::Approx(0.2 * kPi * kPi).epsilon(1e-12));
  CHECK(ctx.seed_flat() == 0);
  CHECK(ctx.sheets().flags.size() == 128);
  CHECK(ctx.sheets().flags[0] == Sheet::continued);
  CHECK(ctx.sheets().flags[1] == Sheet::physical);
  const Geometry g3 = default_geometry_3d();
  ResonanceContext ctx3(g3, {1, 2, 1}, Truncation{8, 16});
  CHECK(ctx3.seed_flat() == 1 * 8 + 0);
  CHECK(ctx3.sheets().flags.size() == 256);
}

TEST_CASE("context refuses invalid seeds") {
  const Geometry g = default_geometry_2d();
  CHECK_THROWS_AS(ResonanceContext(g, {0, 1, 0}, Truncation{8, 16}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ResonanceContext(g, {1, 9, 0}, Truncation{8, 16}),
                  std::invalid_argument);
  // d1 = d2 = 1, level (3,4): xi = 25 pi^2 equals the n = 5 threshold
  Geometry gc;
  gc.dimension = 2;
  gc.d1 = 1.0;
  gc.d2 = 1.0;
  gc.t = 0.3;
  CHECK_THROWS_AS(ResonanceContext(gc, {3, 4, 0}, Truncation{16, 32}),
                  std::invalid_argument);
  CHECK_NOTHROW(ResonanceContext(gc, {1, 1, 0}, Truncation{16, 32}));
}

TEST_CASE("closed cavity limit converges immediately") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{32, 128});
  const SolveResult sr =
      solve_resonance(ctx, 0.0, ctx.xi() * cplx(1.0, 0.0), 1e-12);
  CHECK(sr.iterations <= 1);
  CHECK(std::abs(sr.z - ctx.xi()) <= 1e-12 * ctx.xi());
  CHECK(sr.residual <= 1e-12);
}

TEST_CASE("solver requires a start inside the working disk") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{16, 64});
  CHECK_THROWS_WITH_AS(
      solve_resonance(ctx, 0.01, ctx.xi() + 2.0 * ctx.disk_radius(), 1e-12),
      "z0 outside working disk", std::invalid_argument);
}

TEST_CASE("small aperture root moves into the lower half plane") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{64, 256});
  const double eps = 0.05 * g.d2;
  std::vector<std::string> warnings;
  const SolveResult sr = solve_resonance(ctx, eps, ctx.xi() * cplx(1.0, -1e-8),
                                         1e-12, {}, &warnings);
  CHECK(sr.z.imag() < 0.0);
  CHECK(std::abs(sr.z - ctx.xi()) < ctx.disk_radius());
  CHECK(sr.residual <= 1e-10);
  CHECK(sr.iterations <= 50);
  // the kernel eigenpair confirms a singular K at the root; at this aperture
  // the quasi-mode is already strongly hybridized, which the solver discloses
  const TruncatedBS bs = ctx.assemble(sr.z, eps);
  const EigenBranch kb = kernel_eigenpair(bs, ctx.seed_flat());
  CHECK(std::abs(kb.zeta) <= 1e-10);
  CHECK(kb.overlap_with_seed > 0.2);
  if (kb.overlap_with_seed <= 1.0 / std::sqrt(2.0)) {
    REQUIRE(!warnings.empty());
    CHECK(warnings[0] ==
          "branch overlap below 1/sqrt(2) at the converged root");
  }
}

TEST_CASE("sweep continues a branch and fits both exponents") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{48, 192});
  std::vector<double> grid = {0.0};
  for (int i = 0; i < 6; ++i)
    grid.push_back(0.01 * g.d2 * std::pow(8.0, i / 5.0));
  const ResonanceBranch br = sweep(ctx, grid, 1e-12);
  REQUIRE(!br.failed);
  REQUIRE(br.points.size() == grid.size());
  CHECK(br.points[0].eps == 0.0);
  CHECK(std::abs(br.points[0].z - ctx.xi()) <= 1e-10 * ctx.xi());
  for (size_t i = 2; i < br.points.size(); ++i)
    CHECK(std::abs(br.points[i].nu) > std::abs(br.points[i - 1].nu));
  for (const SweepPoint& p : br.points)
    CHECK(p.nu <= 1e-10 * ctx.xi());
  CHECK(br.fit_mu.slope == doctest::Approx(2.0).epsilon(0.15));
  CHECK(br.fit_nu.slope == doctest::Approx(4.0).epsilon(0.15));
  CHECK(br.fit_mu.r2 > 0.99);
  CHECK(br.fit_nu.r2 > 0.99);
  // step size along the branch stays commensurate with the eps^2 increments
  double rmin = 1e300, rmax = 0.0;
  for (size_t i = 2; i < br.points.size(); ++i) {
    const double de2 = br.points[i].eps * br.points[i].eps -
                       br.points[i - 1].eps * br.points[i - 1].eps;
    const double r = std::abs(br.points[i].z - br.points[i - 1].z) / de2;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  CHECK(rmax / rmin < 6.0);
}

TEST_CASE("degenerate level splits into distinct branches") {
  Geometry g;
  g.dimension = 2;
  g.d1 = 1.0;
  g.d2 = 1.0;
  g.t = 0.3;
  EmbeddedLevel level;
  level.value = 50.0 * kPi * kPi;
  level.indices = {{1, 7, 0}, {5, 5, 0}, {7, 1, 0}};
  level.multiplicity = 3;
  level.above_threshold = true;
  const std::vector<double> grid = {0.02, 0.028, 0.04};
  const auto branches = sweep_level(g, level, grid, Truncation{48, 192}, 1e-12);
  REQUIRE(branches.size() == 3);
  for (const auto& br : branches) {
    REQUIRE(!br.failed);
    REQUIRE(br.points.size() == 3);
    for (const SweepPoint& p : br.points) {
      CHECK(p.nu <= 1e-10 * level.value);
      CHECK(p.residual <= 1e-8);
    }
  }
  // the three roots at the first grid point are pairwise distinct
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(std::abs(branches[a].points[0].z - branches[b].points[0].z) > 1e-9);
}

TEST_CASE("power law fit recovers exact slopes and validates input") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {0.1, 0.2, 0.5, 1.3})
    pts.push_back({x, 3.0 * std::pow(x, 2.5)});
  const FitResult f = fit_power_law(pts);
  CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(
      fit_power_law({{1.0, 1.0}, {2.0, 2.0}}), "fit needs >= 3 points",
      std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, -2.0}, {3.0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("lifetimes follow the inverse width") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{48, 192});
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i)
    grid.push_back(0.015 * g.d2 * std::pow(2.0, i / 2.0));
  const ResonanceBranch br = sweep(ctx, grid, 1e-12);
  double expn = 0.0;
  const auto taus = lifetime(br, g, &expn);
  REQUIRE(taus.size() == grid.size());
  for (size_t i = 0; i < taus.size(); ++i) {
    CHECK(taus[i].first == grid[i]);
    CHECK(taus[i].second ==
          doctest::Approx(1.0 / (2.0 * std::abs(br.points[i].nu))).epsilon(1e-12));
  }
  CHECK(expn == doctest::Approx(-4.0).epsilon(0.15));
}

TEST_CASE("field reconstruction uses the segment factor modes") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{16, 64});
  const cplx z = ctx.xi() * cplx(1.0, -1e-4);
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(3);
  f[1] = cplx(0.3, -0.1);
  const std::vector<double> x1 = {0.2, 0.7};
  const std::vector<double> x2 = {0.0, 0.25, 0.41};
  const Eigen::MatrixXcd field = reconstruct_field(ctx, z, f, x1, x2);
  REQUIRE(field.rows() == 2);
  REQUIRE(field.cols() == 3);
  const double c2 = kPi * kPi * 4.0 / (g.d2 * g.d2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      const cplx want = f[1] *
                        green_segment(z, c2, ctx.sheets().flags[1], x1[i],
                                      g.d1, g.d1) *
                        mode_value(2, x2[j], g.d2);
      CHECK(std::abs(field(i, j) - want) <= 1e-13 * (1.0 + std::abs(want)));
    }
  // Dirichlet edge
  CHECK(std::abs(field(0, 0)) < 1e-13);
}

TEST_CASE("closed branch eigenvalue tracks the resolvent derivative") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{32, 128});
  const double c1 = kPi * kPi / (g.d2 * g.d2);
  const cplx slope = green_wall_dz(ctx.xi(), c1, Sheet::continued, g.d1);
  for (cplx dir : {cplx(1.0, 0.0), cplx(0.28, -0.96)}) {
    const cplx delta = 1e-5 * dir;
    const cplx zv = zeta(ctx, ctx.xi() + delta, 0.0);
    CHECK(std::abs(zv - slope * delta) <= 1e-3 * std::abs(slope * delta));
  }
}

TEST_CASE("fixed seed solves agree with continuation") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{48, 192});
  const std::vector<double> grid = {0.02 * g.d2, 0.03 * g.d2, 0.045 * g.d2};
  const ResonanceBranch br = sweep(ctx, grid, 1e-12);
  REQUIRE(!br.failed);
  const cplx seed = ctx.xi() * cplx(1.0, -1e-8);
  for (size_t i = 0; i < grid.size(); ++i) {
    const SolveResult r = solve_resonance(ctx, grid[i], seed, 1e-12);
    CHECK(std::abs(r.z - br.points[i].z) <= 1e-8 * ctx.xi());
  }
}

TEST_CASE("field reconstruction of the closed mode has the sine profile") {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{32, 128});
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(32);
  f[0] = 1.0;
  const std::vector<double> x1 = {0.13, 0.41, 0.87, 1.2, 1.9};
  const std::vector<double> x2 = {0.1, 0.33, 0.6};
  const Eigen::MatrixXcd field = reconstruct_field(ctx, ctx.xi(), f, x1, x2);
  const double amp = std::sqrt(2.0) * std::pow(g.d1, 1.5) / kPi;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const cplx want = -amp * std::sqrt(2.0 / g.d1) *
                        std::sin(kPi * x1[i] / g.d1) * mode_value(1, x2[j], g.d2);
      CHECK(std::abs(field(i, j) - want) <= 1e-12 * amp);
    }
  for (int i = 3; i < 5; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(field(i, j)) <= 1e-12);
}

}  // TEST_SUITE
