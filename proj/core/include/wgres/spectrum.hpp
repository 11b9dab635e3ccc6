#pragma once

#include <array>
#include <vector>

#include "wgres/geometry.hpp"

namespace wgres {

// Embedded eigenvalues of the closed cavity and threshold bookkeeping for
// the attached waveguide.

// One level xi with every index tuple sharing its value. 2D indices are
// stored as (l, k, 0), 3D as (k1, k2, k3).
struct EmbeddedLevel {
  double value = 0.0;
  std::vector<std::array<int, 3>> indices;
  int multiplicity = 0;
  bool above_threshold = false;
};

// All levels with value <= e_max, grouped within relative tolerance 1e-9,
// sorted ascending.
std::vector<EmbeddedLevel> enumerate_embedded(const Geometry& g, double e_max);

// Transverse channels open at energy e (strict inequality). 2D entries are
// (n, 0), 3D (n2, n3). threshold_coincidence is set when e sits on a
// threshold to relative 1e-12.
struct OpenChannels {
  std::vector<std::array<int, 2>> indices;
  bool threshold_coincidence = false;
};

OpenChannels open_channels(const Geometry& g, double e);

// min_n |xi - c_n| over the transverse thresholds; the resonance working
// disk must stay inside this clearance.
double threshold_clearance(const Geometry& g, double xi);

// Flattened transverse thresholds: 2D c_n = (pi n/d2)^2 for n = 1..n_max;
// 3D c_{(n2,n3)} = (pi n2/d2)^2 + (pi n3/d3)^2 flattened row-major with n2
// outer, n2,n3 = 1..n_max each.
std::vector<double> transverse_thresholds(const Geometry& g, int n_max);

}  // namespace wgres
