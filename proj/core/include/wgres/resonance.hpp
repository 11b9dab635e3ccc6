#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgres/bs_operator.hpp"
#include "wgres/spectrum.hpp"

namespace wgres {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int i_min = 0, i_max = 0;  // inclusive window into the fitted point list
};

struct SweepPoint {
  double eps = 0.0;
  cplx z;
  double mu = 0.0;        // Re z - xi
  double nu = 0.0;        // Im z
  double residual = 0.0;  // |zeta(z, eps)|
  int iterations = 0;
};

struct ResonanceBranch {
  EmbeddedLevel level;
  std::array<int, 3> seed_index{};  // (l,k,0) in 2D, (k1,k2,k3) in 3D
  int seed_flat = 0;
  std::vector<SweepPoint> points;  // eps ascending
  FitResult fit_mu, fit_nu;
  std::vector<std::string> warnings;
  bool failed = false;
};

struct SolveResult {
  cplx z;
  double residual = 0.0;
  int iterations = 0;
};

// Precomputed state for one (geometry, level seed, truncation): reference
// energy, clearance, sheet flags, and an overlap cache keyed by eps.
class ResonanceContext {
 public:
  ResonanceContext(const Geometry& g, std::array<int, 3> seed,
                   const Truncation& trunc, bool rectangle_aperture = false);

  const Geometry& geometry() const { return g_; }
  const Truncation& truncation() const { return trunc_; }
  const SheetChoice& sheets() const { return sheets_; }
  double xi() const { return xi_; }
  double clearance() const { return clearance_; }
  double disk_radius() const { return disk_radius_; }
  int seed_flat() const { return seed_flat_; }
  std::array<int, 3> seed() const { return seed_; }
  bool rectangle_aperture() const { return rect_; }

  const Overlaps& overlaps(double eps) const;
  TruncatedBS assemble(cplx z, double eps) const;
  Eigen::MatrixXcd assemble_dz(cplx z, double eps) const;

 private:
  Geometry g_;
  std::array<int, 3> seed_;
  int seed_flat_;
  Truncation trunc_;
  bool rect_;
  double xi_, clearance_, disk_radius_;
  SheetChoice sheets_;
  mutable std::map<double, Overlaps> cache_;
};

// Branch eigenvalue zeta(z, eps) of the tracked mode; optionally also the
// eigenpair itself.
cplx zeta(const ResonanceContext& ctx, cplx z, double eps,
          EigenBranch* branch = nullptr);

// Secant iteration on the reciprocal logarithmic derivative of det K,
//   f(z) = 1 / tr(K^-1 dK/dz),
// which vanishes exactly at the determinant roots and stays well scaled at
// truncation sizes where det K itself underflows. Starting points z0 and
// z0 - i 1e-6 xi; stops at |f| <= tol or |dz| <= tol |xi|. Steps leaving the
// working disk |z - xi| <= disk_radius are halved (at most 8 times) before
// the "left working disk" error is raised. deflate lists already-found roots
// of the same level whose simple poles are subtracted from the logarithmic
// derivative, used for splitting degenerate levels at the first sweep point.
// The returned residual is |zeta| of the tracked branch at the converged z.
SolveResult solve_resonance(const ResonanceContext& ctx, double eps, cplx z0,
                            double tol,
                            const std::vector<cplx>& deflate = {},
                            std::vector<std::string>* warnings = nullptr);

// Sequential continuation over eps_grid (ascending, may start at 0): first
// point seeded from xi - i 1e-8 xi, later points from the previous root.
// Fits |mu| and |nu| vs eps over fit_window when given; the default window
// drops the smallest eps when |nu| is under 100x tol there and the largest
// eps when its truncation-stability check fails.
ResonanceBranch sweep(const ResonanceContext& ctx,
                      const std::vector<double>& eps_grid, double tol,
                      std::optional<std::pair<int, int>> fit_window = {});

// All branches of a (possibly degenerate) level. Multiplicity one falls
// through to sweep(). For higher multiplicity the level's roots at the first
// positive eps are found by pole deflation and matched to seeds by kernel
// vector overlap; afterwards each branch continues independently.
std::vector<ResonanceBranch> sweep_level(
    const Geometry& g, const EmbeddedLevel& level,
    const std::vector<double>& eps_grid, const Truncation& trunc, double tol,
    bool rectangle_aperture = false,
    std::optional<std::pair<int, int>> fit_window = {});

// Ordinary least squares on (ln x, ln y). Throws on fewer than 3 points or
// non-positive values.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& pts);

// tau = 1/(2|nu|) per sweep point with eps > 0, plus the fitted exponent of
// tau against the aperture volume (eps in 2D, a eps^2 in 3D).
std::vector<std::pair<double, double>> lifetime(const ResonanceBranch& branch,
                                                const Geometry& g,
                                                double* volume_exponent);

// g(x1,x2) = sum_n f_n green_segment(z, c_n, x1, d1) e_n(x2) on the sample
// grid. 2D only.
Eigen::MatrixXcd reconstruct_field(const ResonanceContext& ctx, cplx z,
                                   const Eigen::VectorXcd& f_coeffs,
                                   const std::vector<double>& x1_samples,
                                   const std::vector<double>& x2_samples);

}  // namespace wgres
