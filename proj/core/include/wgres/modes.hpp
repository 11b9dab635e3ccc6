#pragma once

#include <Eigen/Dense>

#include "wgres/geometry.hpp"

namespace wgres {

// Transverse Dirichlet sine basis and the overlap integrals between the full
// modes and their restriction to the wall complement of the aperture.

// sqrt(2/d) * sin(n pi x / d)
double mode_value(int n, double x, double d);

// Obar_{nm} = (2/d) Int_t^{t+eps} sin(n pi x/d) sin(m pi x/d) dx, closed form.
double gap_overlap(int n, int m, double t, double eps, double d);

// (e_n^eps, e_m^0) = delta_{nm} - Obar_{nm}
double wall_overlap(int n, int m, double t, double eps, double d);

// Composite Gauss-Legendre evaluation of the same integral, n_points total
// nodes split over ceil(n_points/5) panels of 5 nodes each (order 10 per
// panel). Independent cross-check for gap_overlap.
double gap_overlap_quadrature(int n, int m, double t, double eps, double d,
                              int n_points);

// Dense overlap matrices for one transverse direction, built once per
// (eps, N) and shared read-only afterwards.
struct OverlapTable {
  int N = 0;
  double t = 0.0, eps = 0.0, d = 0.0;
  Eigen::MatrixXd obar;  // gap part, symmetric
  Eigen::MatrixXd wall;  // identity - obar
};

OverlapTable make_overlap_table(int N, double t, double eps, double d);

// Per-direction tables for a geometry; dir3 is empty in 2D.
struct Overlaps {
  OverlapTable dir2;
  OverlapTable dir3;
};

Overlaps make_overlaps(const Geometry& g, double eps, int N);

}  // namespace wgres
