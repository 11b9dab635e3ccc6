#include "wgres/resonance.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wgres/modes.hpp"

namespace wgres {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double level_energy(const Geometry& g, const std::array<int, 3>& seed) {
  const double b1 = (kPi / g.d1) * (kPi / g.d1);
  const double b2 = (kPi / g.d2) * (kPi / g.d2);
  if (g.dimension == 2) return b1 * seed[0] * seed[0] + b2 * seed[1] * seed[1];
  const double b3 = (kPi / g.d3) * (kPi / g.d3);
  return b1 * seed[0] * seed[0] + b2 * seed[1] * seed[1] +
         b3 * seed[2] * seed[2];
}
}  // namespace

ResonanceContext::ResonanceContext(const Geometry& g, std::array<int, 3> seed,
                                   const Truncation& trunc,
                                   bool rectangle_aperture)
    : g_(g), seed_(seed), trunc_(trunc), rect_(rectangle_aperture) {
  if (trunc.n_basis < 1 || trunc.n_basis > trunc.n_sum)
    throw std::invalid_argument("truncation must satisfy 1 <= n_basis <= n_sum");
  if (seed[0] < 1 || seed[1] < 1 || (g.dimension == 3 && seed[2] < 1))
    throw std::invalid_argument("mode indices must be >= 1");
  if (g.dimension == 2) {
    if (seed[1] > trunc.n_basis)
      throw std::invalid_argument("seed transverse index exceeds n_basis");
    seed_flat_ = seed[1] - 1;
  } else {
    if (seed[1] > trunc.n_basis || seed[2] > trunc.n_basis)
      throw std::invalid_argument("seed transverse index exceeds n_basis");
    seed_flat_ = (seed[1] - 1) * trunc.n_basis + (seed[2] - 1);
  }
  xi_ = level_energy(g, seed);
  clearance_ = threshold_clearance(g, xi_);
  if (clearance_ <= 1e-12 * xi_)
    throw std::invalid_argument(
        "threshold coincidence: reference energy sits on a transverse threshold");
  disk_radius_ = 0.2 * clearance_;
  sheets_ = sheet_assignment(xi_, transverse_thresholds(g, trunc.n_sum),
                             /*re_delta_sign=*/+1);
}

const Overlaps& ResonanceContext::overlaps(double eps) const {
  auto it = cache_.find(eps);
  if (it == cache_.end())
    it = cache_.emplace(eps, make_overlaps(g_, eps, trunc_.n_sum)).first;
  return it->second;
}

TruncatedBS ResonanceContext::assemble(cplx z, double eps) const {
  return assemble_K(z, eps, g_, sheets_, trunc_, overlaps(eps), rect_);
}

Eigen::MatrixXcd ResonanceContext::assemble_dz(cplx z, double eps) const {
  return assemble_dK(z, eps, g_, sheets_, trunc_, overlaps(eps), rect_);
}

cplx zeta(const ResonanceContext& ctx, cplx z, double eps,
          EigenBranch* branch) {
  const TruncatedBS bs = ctx.assemble(z, eps);
  EigenBranch br = branch_eigenpair(bs, ctx.seed_flat());
  if (branch) *branch = br;
  return br.zeta;
}

namespace {

// Reciprocal logarithmic derivative of det K, with the simple poles of
// already-found roots removed. Vanishes exactly where det K does.
cplx scalar_f(const ResonanceContext& ctx, cplx z, double eps,
              const std::vector<cplx>& deflate) {
  const TruncatedBS bs = ctx.assemble(z, eps);
  const Eigen::MatrixXcd dK = ctx.assemble_dz(z, eps);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(bs.K);
  cplx tr = lu.solve(dK).trace();
  if (!std::isfinite(std::abs(tr))) return 0.0;  // exactly singular K: a root
  for (cplx r : deflate) tr -= 1.0 / (z - r);
  return 1.0 / tr;
}

struct RootResidual {
  double residual;
  bool ambiguous;
};

RootResidual residual_at(const ResonanceContext& ctx, cplx z, double eps) {
  // at a converged root the resonance branch is the kernel of K, so the
  // residual is the smallest eigenvalue; instantaneous max-overlap selection
  // can land on a hybridized partner branch there
  const TruncatedBS bs = ctx.assemble(z, eps);
  const EigenBranch kb = kernel_eigenpair(bs, ctx.seed_flat());
  return {std::abs(kb.zeta), kb.overlap_with_seed <= 1.0 / std::sqrt(2.0)};
}

}  // namespace

SolveResult solve_resonance(const ResonanceContext& ctx, double eps, cplx z0,
                            double tol, const std::vector<cplx>& deflate,
                            std::vector<std::string>* warnings) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  const double xi = ctx.xi();
  const double R = ctx.disk_radius();
  if (std::abs(z0 - xi) > R)
    throw std::invalid_argument("z0 outside working disk");
  auto finish = [&](cplx z, int it) {
    const RootResidual rr = residual_at(ctx, z, eps);
    if (rr.ambiguous && warnings)
      warnings->push_back("branch overlap below 1/sqrt(2) at the converged root");
    return SolveResult{z, rr.residual, it};
  };
  cplx f0 = scalar_f(ctx, z0, eps, deflate);
  if (std::abs(f0) <= tol) return finish(z0, 0);
  cplx z1 = z0 - cplx(0.0, 1e-6 * xi);
  cplx f1 = scalar_f(ctx, z1, eps, deflate);
  for (int it = 1; it <= 50; ++it) {
    cplx dz = -f1 * (z1 - z0) / (f1 - f0);
    if (!std::isfinite(std::abs(dz)))
      throw std::runtime_error("no convergence");
    int halvings = 0;
    while (std::abs(z1 + dz - xi) > R && halvings < 8) {
      dz *= 0.5;
      ++halvings;
    }
    if (std::abs(z1 + dz - xi) > R)
      throw std::runtime_error("left working disk");
    const cplx z2 = z1 + dz;
    const cplx f2 = scalar_f(ctx, z2, eps, deflate);
    z0 = z1;
    f0 = f1;
    z1 = z2;
    f1 = f2;
    if (std::abs(f1) <= tol || std::abs(z1 - z0) <= tol * std::abs(xi))
      return finish(z1, it);
  }
  throw std::runtime_error("no convergence");
}

namespace {

SweepPoint make_point(const ResonanceContext& ctx, double eps,
                      const SolveResult& sr) {
  SweepPoint p;
  p.eps = eps;
  p.z = sr.z;
  p.mu = sr.z.real() - ctx.xi();
  p.nu = sr.z.imag();
  p.residual = sr.residual;
  p.iterations = sr.iterations;
  return p;
}

void fit_branch(const ResonanceContext& ctx, ResonanceBranch& br, double tol,
                std::optional<std::pair<int, int>> fit_window) {
  std::vector<int> pos;  // indices of positive-eps points
  for (int i = 0; i < (int)br.points.size(); ++i)
    if (br.points[i].eps > 0) pos.push_back(i);
  if ((int)pos.size() < 3) return;  // nothing to fit, leave defaults
  int lo = 0, hi = (int)pos.size() - 1;
  if (fit_window) {
    lo = std::max(0, fit_window->first);
    hi = std::min(hi, fit_window->second);
  } else {
    while (lo < hi &&
           std::abs(br.points[pos[lo]].nu) < 100.0 * tol)
      ++lo;  // noise floor
    // truncation stability of the largest point
    Truncation t2 = ctx.truncation();
    t2.n_sum *= 2;
    ResonanceContext ctx2(ctx.geometry(), ctx.seed(), t2,
                          ctx.rectangle_aperture());
    const SweepPoint& last = br.points[pos[hi]];
    try {
      const SolveResult sr = solve_resonance(ctx2, last.eps, last.z, tol);
      const double move = std::abs(sr.z - last.z);
      if (move > 10.0 * tol) {
        --hi;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "largest eps dropped from fit window: doubling n_sum moves z by %.3e",
                      move);
        br.warnings.push_back(buf);
      }
    } catch (const std::exception& e) {
      br.warnings.push_back(std::string("truncation stability check failed: ") +
                            e.what());
    }
  }
  if (hi - lo + 1 < 3) {
    br.warnings.push_back("fit window narrower than 3 points, fit skipped");
    return;
  }
  std::vector<std::pair<double, double>> mu_pts, nu_pts;
  for (int i = lo; i <= hi; ++i) {
    const SweepPoint& p = br.points[pos[i]];
    if (std::abs(p.mu) > 0) mu_pts.push_back({p.eps, std::abs(p.mu)});
    if (std::abs(p.nu) > 0) nu_pts.push_back({p.eps, std::abs(p.nu)});
  }
  if ((int)mu_pts.size() >= 3) {
    br.fit_mu = fit_power_law(mu_pts);
    br.fit_mu.i_min = lo;
    br.fit_mu.i_max = hi;
  }
  if ((int)nu_pts.size() >= 3) {
    br.fit_nu = fit_power_law(nu_pts);
    br.fit_nu.i_min = lo;
    br.fit_nu.i_max = hi;
  }
}

void check_half_plane(ResonanceBranch& br, double xi) {
  for (const SweepPoint& p : br.points)
    if (p.nu > 1e-10 * xi) {
      br.warnings.push_back("point with Im z above the half-plane tolerance");
      return;
    }
}

}  // namespace

ResonanceBranch sweep(const ResonanceContext& ctx,
                      const std::vector<double>& eps_grid, double tol,
                      std::optional<std::pair<int, int>> fit_window) {
  ResonanceBranch br;
  br.seed_index = ctx.seed();
  br.seed_flat = ctx.seed_flat();
  br.level.value = ctx.xi();
  br.level.indices = {ctx.seed()};
  br.level.multiplicity = 1;
  cplx z_prev = ctx.xi() * cplx(1.0, -1e-8);
  for (double eps : eps_grid) {
    try {
      const SolveResult sr =
          solve_resonance(ctx, eps, z_prev, tol, {}, &br.warnings);
      br.points.push_back(make_point(ctx, eps, sr));
      z_prev = sr.z;
    } catch (const std::exception& e) {
      br.failed = true;
      char buf[96];
      std::snprintf(buf, sizeof buf, "branch aborted at eps=%.6g: ", eps);
      br.warnings.push_back(buf + std::string(e.what()));
      break;
    }
  }
  check_half_plane(br, ctx.xi());
  fit_branch(ctx, br, tol, fit_window);
  return br;
}

std::vector<ResonanceBranch> sweep_level(
    const Geometry& g, const EmbeddedLevel& level,
    const std::vector<double>& eps_grid, const Truncation& trunc, double tol,
    bool rectangle_aperture, std::optional<std::pair<int, int>> fit_window) {
  std::vector<ResonanceBranch> out;
  if (level.multiplicity == 1) {
    ResonanceContext ctx(g, level.indices[0], trunc, rectangle_aperture);
    out.push_back(sweep(ctx, eps_grid, tol, fit_window));
    out.back().level = level;
    return out;
  }
  // Degenerate level: the determinant scalar cannot target a branch by seed,
  // so split the level's roots at the first positive eps by pole deflation,
  // match them to seeds by kernel vector overlap, then continue per branch.
  const int N = level.multiplicity;
  std::vector<ResonanceContext> ctxs;
  ctxs.reserve(N);
  for (const auto& idx : level.indices)
    ctxs.emplace_back(g, idx, trunc, rectangle_aperture);
  std::vector<ResonanceBranch> branches(N);
  for (int j = 0; j < N; ++j) {
    branches[j].level = level;
    branches[j].seed_index = level.indices[j];
    branches[j].seed_flat = ctxs[j].seed_flat();
  }
  size_t first_pos = 0;
  while (first_pos < eps_grid.size() && eps_grid[first_pos] <= 0) ++first_pos;
  // eps = 0 points, one per branch, converge to xi trivially
  for (size_t i = 0; i < first_pos; ++i)
    for (int j = 0; j < N; ++j) {
      const SolveResult sr = solve_resonance(
          ctxs[j], eps_grid[i], ctxs[j].xi() * cplx(1.0, -1e-8), tol, {},
          &branches[j].warnings);
      branches[j].points.push_back(make_point(ctxs[j], eps_grid[i], sr));
    }
  if (first_pos < eps_grid.size()) {
    const double eps0 = eps_grid[first_pos];
    std::vector<cplx> roots;
    std::vector<Eigen::VectorXcd> kernels;
    for (int r = 0; r < N; ++r) {
      try {
        const SolveResult sr =
            solve_resonance(ctxs[0], eps0, ctxs[0].xi() * cplx(1.0, -1e-8),
                            tol, roots, nullptr);
        roots.push_back(sr.z);
        const TruncatedBS bs = ctxs[0].assemble(sr.z, eps0);
        kernels.push_back(kernel_eigenpair(bs, ctxs[0].seed_flat()).vector);
      } catch (const std::exception& e) {
        // coincident or unresolvable root; reuse the nearest found root
        if (roots.empty()) throw;
        roots.push_back(roots.back());
        kernels.push_back(kernels.back());
        for (int j = 0; j < N; ++j)
          branches[j].warnings.push_back(
              std::string("degenerate root splitting incomplete: ") + e.what());
      }
    }
    // greedy max-overlap assignment of roots to seeds
    std::vector<int> root_of_seed(N, -1);
    std::vector<bool> root_used(N, false), seed_used(N, false);
    for (int step = 0; step < N; ++step) {
      int bj = -1, br_ = -1;
      double best = -1.0;
      for (int j = 0; j < N; ++j) {
        if (seed_used[j]) continue;
        for (int r = 0; r < N; ++r) {
          if (root_used[r]) continue;
          const double o = std::abs(kernels[r][ctxs[j].seed_flat()]);
          if (o > best) { best = o; bj = j; br_ = r; }
        }
      }
      seed_used[bj] = true;
      root_used[br_] = true;
      root_of_seed[bj] = br_;
    }
    for (int j = 0; j < N; ++j) {
      const cplx zr = roots[root_of_seed[j]];
      const RootResidual rr0 = [&] {
        const TruncatedBS bs = ctxs[j].assemble(zr, eps0);
        return RootResidual{std::abs(kernel_eigenpair(bs, ctxs[j].seed_flat()).zeta),
                            false};
      }();
      SolveResult sr{zr, rr0.residual, 0};
      branches[j].points.push_back(make_point(ctxs[j], eps0, sr));
    }
    // continue each branch independently over the rest of the grid
    for (int j = 0; j < N; ++j) {
      cplx z_prev = branches[j].points.back().z;
      for (size_t i = first_pos + 1; i < eps_grid.size(); ++i) {
        try {
          const SolveResult sr = solve_resonance(ctxs[j], eps_grid[i], z_prev,
                                                 tol, {}, &branches[j].warnings);
          branches[j].points.push_back(make_point(ctxs[j], eps_grid[i], sr));
          z_prev = sr.z;
        } catch (const std::exception& e) {
          branches[j].failed = true;
          branches[j].warnings.push_back(
              std::string("branch aborted: ") + e.what());
          break;
        }
      }
      for (int jj = 0; jj < j; ++jj)
        for (const SweepPoint& p : branches[jj].points)
          if (p.eps == branches[j].points.back().eps &&
              std::abs(p.z - branches[j].points.back().z) < tol * ctxs[j].xi()) {
            branches[j].warnings.push_back(
                "degenerate branches coincide within tolerance");
            break;
          }
    }
  }
  for (int j = 0; j < N; ++j) {
    check_half_plane(branches[j], ctxs[j].xi());
    fit_branch(ctxs[j], branches[j], tol, fit_window);
  }
  return branches;
}

FitResult fit_power_law(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw std::invalid_argument("fit needs >= 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = (double)pts.size();
  for (const auto& [x, y] : pts) {
    if (!(x > 0) || !(y > 0))
      throw std::invalid_argument("fit requires strictly positive values");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  FitResult f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  double ssr = 0, sst = 0;
  const double ym = sy / n;
  for (const auto& [x, y] : pts) {
    const double ly = std::log(y);
    const double yf = f.slope * std::log(x) + f.intercept;
    ssr += (ly - yf) * (ly - yf);
    sst += (ly - ym) * (ly - ym);
  }
  f.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  f.i_min = 0;
  f.i_max = (int)pts.size() - 1;
  return f;
}

std::vector<std::pair<double, double>> lifetime(const ResonanceBranch& branch,
                                                const Geometry& g,
                                                double* volume_exponent) {
  std::vector<std::pair<double, double>> out;
  std::vector<std::pair<double, double>> fit_pts;
  for (const SweepPoint& p : branch.points) {
    if (p.eps <= 0) continue;
    if (p.nu == 0.0) throw std::runtime_error("zero nu, lifetime undefined");
    const double tau_v = 1.0 / (2.0 * std::abs(p.nu));
    out.push_back({p.eps, tau_v});
    const double vol = g.dimension == 2 ? p.eps : g.a * p.eps * p.eps;
    fit_pts.push_back({vol, tau_v});
  }
  if (volume_exponent) {
    *volume_exponent = 0.0;
    if (fit_pts.size() >= 3) *volume_exponent = fit_power_law(fit_pts).slope;
  }
  return out;
}

Eigen::MatrixXcd reconstruct_field(const ResonanceContext& ctx, cplx z,
                                   const Eigen::VectorXcd& f_coeffs,
                                   const std::vector<double>& x1_samples,
                                   const std::vector<double>& x2_samples) {
  const Geometry& g = ctx.geometry();
  if (g.dimension != 2)
    throw std::invalid_argument("field reconstruction is 2D only");
  const int n_modes = (int)f_coeffs.size();
  const auto cs = transverse_thresholds(g, n_modes);
  Eigen::MatrixXcd field(x1_samples.size(), x2_samples.size());
  field.setZero();
  for (int n = 0; n < n_modes; ++n) {
    if (f_coeffs[n] == 0.0) continue;
    const Sheet sh = ctx.sheets().flags[n];
    for (size_t i = 0; i < x1_samples.size(); ++i) {
      const cplx gs = green_segment(z, cs[n], sh, x1_samples[i], g.d1, g.d1);
      for (size_t j = 0; j < x2_samples.size(); ++j)
        field(i, j) += f_coeffs[n] * gs * mode_value(n + 1, x2_samples[j], g.d2);
    }
  }
  return field;
}

}  // namespace wgres
