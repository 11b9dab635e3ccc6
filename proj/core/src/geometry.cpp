#include "wgres/geometry.hpp"

#include <stdexcept>

namespace wgres {

Geometry validate_geometry(const Geometry& g, double eps_max) {
  if (g.dimension != 2 && g.dimension != 3)
    throw std::invalid_argument("dimension must be 2 or 3");
  if (!(g.d1 > 0)) throw std::invalid_argument("d1 must be positive");
  if (!(g.d2 > 0)) throw std::invalid_argument("d2 must be positive");
  if (g.dimension == 3 && !(g.d3 > 0))
    throw std::invalid_argument("d3 must be positive");
  if (!(g.a > 0)) throw std::invalid_argument("a must be positive");
  if (g.t < 0) throw std::invalid_argument("t must be nonnegative");
  if (eps_max < 0) throw std::invalid_argument("eps_max must be nonnegative");
  if (g.t + eps_max > g.d2)
    throw std::invalid_argument("aperture exceeds wall: t+eps > d2");
  if (g.dimension == 3) {
    if (g.t3 < 0) throw std::invalid_argument("t3 must be nonnegative");
    if (g.t3 + g.a * eps_max > g.d3)
      throw std::invalid_argument("aperture exceeds wall: t3+a*eps > d3");
  }
  return g;
}

Geometry rescale(const Geometry& g, double s) {
  if (!(s > 0)) throw std::invalid_argument("rescale factor must be positive");
  Geometry r = g;
  r.d1 = g.d1 * s;
  r.d2 = g.d2 * s;
  r.d3 = g.d3 * s;
  r.t = g.t * s;
  r.t3 = g.t3 * s;
  return r;
}

Geometry default_geometry_2d() {
  Geometry g;
  g.dimension = 2;
  g.d1 = 1.0;
  g.d2 = 0.7;
  g.t = 0.3;
  return g;
}

Geometry default_geometry_3d() {
  Geometry g;
  g.dimension = 3;
  g.d1 = 1.0;
  g.d2 = 0.7;
  g.d3 = 0.9;
  g.t = 0.3;
  g.t3 = 0.35;
  g.a = 1.0;
  return g;
}

}  // namespace wgres
