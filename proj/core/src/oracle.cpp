#include "wgres/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace wgres {

namespace {

bool near_integer(double x) {
  return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x));
}

// Interior-node grid of the truncated strip. Wall nodes keep identity rows so
// the numbering stays rectangular; they decouple from the PDE block.
struct CapGrid {
  int nx, ny, i_w, j_lo, j_hi;
  double h, L_cap, ramp_len, eta;
  int p;

  lapack_int n_unknowns() const { return (lapack_int)(nx - 1) * (ny - 1); }
  lapack_int idx(int i, int j) const {
    return (lapack_int)(i - 1) * (ny - 1) + (j - 1);
  }
  bool wall_node(int i, int j) const {
    return i == i_w && !(j_lo < j && j < j_hi);
  }
  cplx diag(int i, int j) const {
    if (wall_node(i, j)) return 1.0;
    cplx d = 4.0 / (h * h);
    const double x = i * h;
    if (x > L_cap) d += cplx(0.0, -eta) * std::pow((x - L_cap) / ramp_len, p);
    return d;
  }
};

CapGrid make_grid(const Geometry& g, double eps, const CapConfig& cfg) {
  if (g.dimension != 2)
    throw std::invalid_argument("cap oracle is 2D only");
  if (!(cfg.h > 0) || !(cfg.L > cfg.L_cap) || !(cfg.L_cap > g.d1))
    throw std::invalid_argument("cap config requires h > 0 and d1 < L_cap < L");
  if (eps < 0) throw std::invalid_argument("eps must be >= 0");
  if (!near_integer(g.d1 / cfg.h) || !near_integer(g.d2 / cfg.h) ||
      !near_integer(g.t / cfg.h) || !near_integer(eps / cfg.h))
    throw std::invalid_argument(
        "cap grid misaligned: d1/h, d2/h, t/h, eps/h must be integers");
  CapGrid gr;
  gr.h = cfg.h;
  gr.L_cap = cfg.L_cap;
  gr.ramp_len = cfg.L - cfg.L_cap;
  gr.eta = cfg.eta;
  gr.p = cfg.cap_power;
  gr.nx = (int)std::llround(cfg.L / cfg.h);
  gr.ny = (int)std::llround(g.d2 / cfg.h);
  gr.i_w = (int)std::llround(g.d1 / cfg.h);
  gr.j_lo = (int)std::llround(g.t / cfg.h);
  gr.j_hi = (int)std::llround((g.t + eps) / cfg.h);
  return gr;
}

void apply_A(const CapGrid& gr, const Eigen::VectorXcd& v,
             Eigen::VectorXcd& out) {
  const double ih2 = 1.0 / (gr.h * gr.h);
  for (int i = 1; i < gr.nx; ++i)
    for (int j = 1; j < gr.ny; ++j) {
      const lapack_int n = gr.idx(i, j);
      if (gr.wall_node(i, j)) {
        out[n] = v[n];
        continue;
      }
      cplx s = gr.diag(i, j) * v[n];
      const int nbr[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& [i2, j2] : nbr) {
        if (i2 < 1 || i2 >= gr.nx || j2 < 1 || j2 >= gr.ny) continue;
        if (gr.wall_node(i2, j2)) continue;
        s -= ih2 * v[gr.idx(i2, j2)];
      }
      out[n] = s;
    }
}

// Band storage of A - center I, factored in place by zgbtrf.
struct BandedFactor {
  lapack_int n, kl, ku, ldab;
  std::vector<cplx> ab;
  std::vector<lapack_int> ipiv;

  BandedFactor(const CapGrid& gr, cplx center) {
    n = gr.n_unknowns();
    kl = ku = gr.ny - 1;
    ldab = 2 * kl + ku + 1;
    ab.assign((size_t)ldab * n, cplx(0.0));
    ipiv.resize(n);
    const double ih2 = 1.0 / (gr.h * gr.h);
    auto at = [&](lapack_int r, lapack_int c) -> cplx& {
      return ab[(size_t)c * ldab + (kl + ku + r - c)];
    };
    for (int i = 1; i < gr.nx; ++i)
      for (int j = 1; j < gr.ny; ++j) {
        const lapack_int r = gr.idx(i, j);
        at(r, r) = gr.diag(i, j) - center;
        if (gr.wall_node(i, j)) continue;
        const int nbr[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& [i2, j2] : nbr) {
          if (i2 < 1 || i2 >= gr.nx || j2 < 1 || j2 >= gr.ny) continue;
          if (gr.wall_node(i2, j2)) continue;
          at(r, gr.idx(i2, j2)) = -ih2;
        }
      }
    const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku,
                                           ab.data(), ldab, ipiv.data());
    if (info != 0)
      throw std::runtime_error("banded factorization failed");
  }

  void solve(Eigen::VectorXcd& v) const {
    const lapack_int info =
        LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab,
                       ipiv.data(), v.data(), n);
    if (info != 0) throw std::runtime_error("banded solve failed");
  }
};

}  // namespace

CapConfig default_cap_config(const Geometry& g, double eps, double xi) {
  if (g.dimension != 2)
    throw std::invalid_argument("cap oracle is 2D only");
  if (eps < 0) throw std::invalid_argument("eps must be >= 0");
  int q = 56;
  for (; q <= 2000000; ++q) {
    const double h = g.d2 / q;
    if (near_integer(g.d1 / h) && near_integer(g.t / h) &&
        near_integer(eps / h))
      break;
  }
  if (q > 2000000)
    throw std::runtime_error("no grid spacing aligns wall and aperture");
  CapConfig c;
  c.h = g.d2 / q;
  c.L = g.d1 + 6.0 * g.d2;
  c.L_cap = g.d1 + 3.0 * g.d2;
  c.eta = 5.0 * xi;
  c.cap_power = 2;
  return c;
}

std::vector<cplx> cap_eigenvalues(const Geometry& g, double eps,
                                  const CapConfig& cfg, cplx center,
                                  int count) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const CapGrid gr = make_grid(g, eps, cfg);
  const BandedFactor lu(gr, center);
  const lapack_int N = gr.n_unknowns();
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  std::vector<Eigen::VectorXcd> found;
  std::vector<cplx> lams;
  Eigen::VectorXcd av(N);
  for (int trial = 0; trial < count; ++trial) {
    Eigen::VectorXcd v(N);
    for (lapack_int i = 0; i < N; ++i) v[i] = cplx(nd(rng), nd(rng));
    for (const auto& f : found) v -= f.dot(v) * f;
    v.normalize();
    cplx lam = 0.0;
    bool converged = false;
    for (int itn = 0; itn < 300; ++itn) {
      lu.solve(v);
      for (const auto& f : found) v -= f.dot(v) * f;
      v.normalize();
      apply_A(gr, v, av);
      const cplx lam_new = v.dot(av) / v.dot(v);
      if (itn > 0 && std::abs(lam_new - lam) < 1e-12 * std::abs(lam_new)) {
        lam = lam_new;
        converged = true;
        break;
      }
      lam = lam_new;
    }
    if (!converged) throw std::runtime_error("iteration non-convergence");
    found.push_back(v);
    lams.push_back(lam);
  }
  std::sort(lams.begin(), lams.end(), [&](cplx a, cplx b) {
    return std::abs(a - center) < std::abs(b - center);
  });
  return lams;
}

CapStabilityReport cap_stability(const Geometry& g, double eps,
                                 const CapConfig& cfg, cplx center) {
  CapStabilityReport rep;
  rep.base = cap_eigenvalues(g, eps, cfg, center, 1)[0];
  CapConfig half = cfg;
  half.eta *= 0.5;
  rep.half_eta = cap_eigenvalues(g, eps, half, center, 1)[0];
  CapConfig longer = cfg;
  longer.L += g.d1;
  rep.longer_box = cap_eigenvalues(g, eps, longer, center, 1)[0];
  rep.max_drift = std::max(std::abs(rep.half_eta - rep.base),
                           std::abs(rep.longer_box - rep.base));
  return rep;
}

}  // namespace wgres
