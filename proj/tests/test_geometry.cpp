#include <cmath>
#include <doctest.h>
#include <stdexcept>

#include "wgres/geometry.hpp"

using namespace wgres;

namespace {
bool within_one_ulp(double a, double b) {
  return a == b || std::nextafter(a, b) == b;
}
}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("defaults validate") {
  CHECK_NOTHROW(validate_geometry(default_geometry_2d(), 0.2));
  CHECK_NOTHROW(validate_geometry(default_geometry_3d(), 0.2));
  const Geometry g2 = default_geometry_2d();
  CHECK(g2.dimension == 2);
  CHECK(g2.d1 == 1.0);
  CHECK(g2.d2 == 0.7);
  CHECK(g2.t == 0.3);
  const Geometry g3 = default_geometry_3d();
  CHECK(g3.dimension == 3);
  CHECK(g3.d3 == 0.9);
  CHECK(g3.t3 == 0.35);
  CHECK(g3.a == 1.0);
}

TEST_CASE("validation errors name the violated constraint") {
  Geometry g = default_geometry_2d();
  g.d1 = 0.0;
  CHECK_THROWS_WITH_AS(validate_geometry(g, 0.1), "d1 must be positive",
                       std::invalid_argument);
  g = default_geometry_2d();
  CHECK_THROWS_WITH_AS(validate_geometry(g, 0.5),
                       "aperture exceeds wall: t+eps > d2",
                       std::invalid_argument);
  g = default_geometry_2d();
  g.d2 = -1.0;
  CHECK_THROWS_AS(validate_geometry(g, 0.1), std::invalid_argument);
  g = default_geometry_3d();
  g.t3 = 0.85;
  CHECK_THROWS_WITH_AS(validate_geometry(g, 0.1),
                       "aperture exceeds wall: t3+a*eps > d3",
                       std::invalid_argument);
  g = default_geometry_2d();
  g.dimension = 4;
  CHECK_THROWS_AS(validate_geometry(g, 0.1), std::invalid_argument);
}

TEST_CASE("aperture exactly filling the wall is allowed") {
  Geometry g = default_geometry_2d();
  g.t = 0.0;
  CHECK_NOTHROW(validate_geometry(g, g.d2));
}

TEST_CASE("rescale scales lengths and keeps the aspect ratio") {
  const Geometry g = default_geometry_3d();
  const Geometry r = rescale(g, 2.0);
  CHECK(r.d1 == 2.0 * g.d1);
  CHECK(r.d2 == 2.0 * g.d2);
  CHECK(r.d3 == 2.0 * g.d3);
  CHECK(r.t == 2.0 * g.t);
  CHECK(r.t3 == 2.0 * g.t3);
  CHECK(r.a == g.a);
}

TEST_CASE("rescale roundtrip is within one ulp") {
  const Geometry g = default_geometry_3d();
  for (double s : {2.0, 0.125, 3.7, 0.2371}) {
    const Geometry rt = rescale(rescale(g, s), 1.0 / s);
    CHECK(within_one_ulp(rt.d1, g.d1));
    CHECK(within_one_ulp(rt.d2, g.d2));
    CHECK(within_one_ulp(rt.d3, g.d3));
    CHECK(within_one_ulp(rt.t, g.t));
    CHECK(within_one_ulp(rt.t3, g.t3));
  }
  CHECK_THROWS_AS(rescale(g, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
