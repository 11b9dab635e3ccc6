#include <cmath>
#include <doctest.h>

#include "wgres/spectrum.hpp"

using namespace wgres;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_SUITE("spectrum") {

TEST_CASE("lowest 2D level") {
  const Geometry g = default_geometry_2d();
  const double xi11 = kPi * kPi * (1.0 + 1.0 / (0.7 * 0.7));
  const auto levels = enumerate_embedded(g, xi11 + 1.0);
  REQUIRE(!levels.empty());
  bool found = false;
  for (const auto& lv : levels) {
    for (size_t i = 1; i < lv.indices.size(); ++i)
      CHECK(lv.indices[i - 1] < lv.indices[i]);  // deterministic order
    if (std::abs(lv.value - xi11) < 1e-9 * xi11) {
      found = true;
      CHECK(lv.multiplicity == 1);
      CHECK(lv.indices[0] == std::array<int, 3>{1, 1, 0});
      CHECK(lv.above_threshold);
    }
  }
  CHECK(found);
  for (size_t i = 1; i < levels.size(); ++i)
    CHECK(levels[i - 1].value < levels[i].value);
}

TEST_CASE("levels below the first threshold are flagged") {
  Geometry g = default_geometry_2d();
  g.d2 = 0.4;  // first threshold at (pi/0.4)^2 = 61.7
  const auto levels = enumerate_embedded(g, 70.0);
  for (const auto& lv : levels) {
    const double c1 = kPi * kPi / (g.d2 * g.d2);
    CHECK(lv.above_threshold == (lv.value > c1));
  }
}

TEST_CASE("square cavity degeneracies") {
  Geometry g;
  g.dimension = 2;
  g.d1 = 1.0;
  g.d2 = 1.0;
  g.t = 0.3;
  const double p2 = kPi * kPi;
  const auto levels = enumerate_embedded(g, 330.0 * p2);
  auto find = [&](double v) -> const EmbeddedLevel* {
    for (const auto& lv : levels)
      if (std::abs(lv.value - v) < 1e-9 * v) return &lv;
    return nullptr;
  };
  const EmbeddedLevel* l50 = find(50.0 * p2);
  REQUIRE(l50 != nullptr);
  CHECK(l50->multiplicity == 3);
  REQUIRE(l50->indices.size() == 3);
  CHECK(l50->indices[0] == std::array<int, 3>{1, 7, 0});
  CHECK(l50->indices[1] == std::array<int, 3>{5, 5, 0});
  CHECK(l50->indices[2] == std::array<int, 3>{7, 1, 0});
  const EmbeddedLevel* l325 = find(325.0 * p2);
  REQUIRE(l325 != nullptr);
  CHECK(l325->multiplicity == 6);
}

TEST_CASE("3D enumeration carries full index triples") {
  const Geometry g = default_geometry_3d();
  const double xi111 =
      kPi * kPi * (1.0 + 1.0 / (g.d2 * g.d2) + 1.0 / (g.d3 * g.d3));
  const auto levels = enumerate_embedded(g, xi111 + 0.5);
  bool found = false;
  for (const auto& lv : levels)
    if (std::abs(lv.value - xi111) < 1e-9 * xi111) {
      found = true;
      CHECK(lv.indices[0] == std::array<int, 3>{1, 1, 1});
    }
  CHECK(found);
}

TEST_CASE("open channels use strict inequality") {
  const Geometry g = default_geometry_2d();
  const double c1 = kPi * kPi / (g.d2 * g.d2);
  const OpenChannels below = open_channels(g, 0.9 * c1);
  CHECK(below.indices.empty());
  CHECK_FALSE(below.threshold_coincidence);
  const OpenChannels at = open_channels(g, c1);
  CHECK(at.indices.empty());  // strict: the channel is not open yet
  CHECK(at.threshold_coincidence);
  const OpenChannels above = open_channels(g, 4.5 * c1);
  REQUIRE(above.indices.size() == 2);
  CHECK(above.indices[0] == std::array<int, 2>{1, 0});
  CHECK(above.indices[1] == std::array<int, 2>{2, 0});
}

TEST_CASE("3D open channels are index pairs") {
  const Geometry g = default_geometry_3d();
  const double c11 = kPi * kPi * (1.0 / (g.d2 * g.d2) + 1.0 / (g.d3 * g.d3));
  const OpenChannels oc = open_channels(g, 1.01 * c11);
  REQUIRE(oc.indices.size() == 1);
  CHECK(oc.indices[0] == std::array<int, 2>{1, 1});
}

TEST_CASE("threshold clearance of the lowest level") {
  const Geometry g = default_geometry_2d();
  const double xi11 = kPi * kPi * (1.0 + 1.0 / (g.d2 * g.d2));
  // distance to the first threshold is exactly (pi l/d1)^2 with l = 1
  CHECK(threshold_clearance(g, xi11) == doctest::Approx(kPi * kPi).epsilon(1e-13));
  // energy right at a threshold has zero clearance
  CHECK(threshold_clearance(g, kPi * kPi / (g.d2 * g.d2)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flattened thresholds, 3D row-major") {
  const Geometry g3 = default_geometry_3d();
  const auto cs = transverse_thresholds(g3, 3);
  REQUIRE(cs.size() == 9);
  auto c = [&](int n2, int n3) {
    return kPi * kPi * (n2 * n2 / (g3.d2 * g3.d2) + n3 * n3 / (g3.d3 * g3.d3));
  };
  for (int n2 = 1; n2 <= 3; ++n2)
    for (int n3 = 1; n3 <= 3; ++n3)
      CHECK(cs[(n2 - 1) * 3 + (n3 - 1)] == doctest::Approx(c(n2, n3)).epsilon(1e-14));
  const auto cs2 = transverse_thresholds(default_geometry_2d(), 4);
  REQUIRE(cs2.size() == 4);
  CHECK(cs2[3] == doctest::Approx(kPi * kPi * 16.0 / 0.49).epsilon(1e-14));
}

}  // TEST_SUITE
