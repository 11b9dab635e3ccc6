#pragma once

#include <vector>

#include "wgres/geometry.hpp"
#include "wgres/greens.hpp"

namespace wgres {

// Independent PDE-level cross-check: 5-point Dirichlet Laplacian on the
// truncated strip with a complex absorbing potential past L_cap, solved for
// the complex eigenvalues nearest a given center. 2D only.
struct CapConfig {
  double h = 0.0;      // grid spacing; d1/h, d2/h, t/h, eps/h must be integers
  double L = 0.0;      // truncation length in x1
  double L_cap = 0.0;  // CAP start, d1 < L_cap < L
  double eta = 0.0;    // CAP strength
  int cap_power = 2;   // monomial ramp exponent
};

// h = d2/q with the smallest q >= 56 aligning wall and aperture to grid
// lines; L = d1 + 6 d2, L_cap = d1 + 3 d2, eta = 5 xi, cap_power = 2.
CapConfig default_cap_config(const Geometry& g, double eps, double xi);

// The count eigenvalues nearest center, by shifted inverse iteration with
// deflation on a banded LU factorization, sorted by distance to center.
std::vector<cplx> cap_eigenvalues(const Geometry& g, double eps,
                                  const CapConfig& cfg, cplx center,
                                  int count);

struct CapStabilityReport {
  cplx base;
  cplx half_eta;
  cplx longer_box;
  double max_drift = 0.0;
};

// Recomputes the tracked eigenvalue with eta/2 and with L + d1; the drift
// bounds the CAP-induced error before the value is used as ground truth.
CapStabilityReport cap_stability(const Geometry& g, double eps,
                                 const CapConfig& cfg, cplx center);

}  // namespace wgres
