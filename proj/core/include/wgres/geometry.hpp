#pragma once

namespace wgres {

// Waveguide/cavity/aperture configuration. All lengths share one global unit.
// The aperture width eps is a per-call parameter everywhere else in the
// library, so a single Geometry serves a whole sweep.
struct Geometry {
  int dimension = 2;  // 2 or 3
  double d1 = 1.0;    // cavity depth
  double d2 = 0.7;    // strip width (2D) / duct width (3D)
  double d3 = 0.0;    // duct height, 3D only
  double t = 0.3;     // aperture offset along x2 (t2 in 3D)
  double t3 = 0.0;    // aperture offset along x3, 3D only
  double a = 1.0;     // aperture aspect ratio, 3D only: eps3 = a*eps
};

// Returns g unchanged if all invariants hold for every eps in [0, eps_max];
// throws std::invalid_argument naming the first violated constraint.
Geometry validate_geometry(const Geometry& g, double eps_max);

// Multiplies every length field by s; the dimensionless ratio a is unchanged.
Geometry rescale(const Geometry& g, double s);

Geometry default_geometry_2d();
Geometry default_geometry_3d();

}  // namespace wgres
