#include "wgres/bs_operator.hpp"

#include <cmath>
#include <stdexcept>

#include "wgres/spectrum.hpp"

namespace wgres {

namespace {

// Real basis-by-kernel factor B with K = B diag(G) B^T. 2D: the top n_basis
// rows of the wall overlap matrix. 3D: row-major Kronecker product of the
// per-direction wall factors, or the rectangle-exact rows when requested.
Eigen::MatrixXd basis_factor(const Geometry& g, const Truncation& tr,
                             const Overlaps& ov, bool rectangle_aperture) {
  if (g.dimension == 2) {
    if (ov.dir2.N < tr.n_sum)
      throw std::invalid_argument("mismatched truncation: overlap table too small");
    return ov.dir2.wall.topRows(tr.n_basis).leftCols(tr.n_sum);
  }
  if (ov.dir2.N < tr.n_sum || ov.dir3.N < tr.n_sum)
    throw std::invalid_argument("mismatched truncation: overlap table too small");
  const int nb = tr.n_basis, ns = tr.n_sum;
  Eigen::MatrixXd B(nb * nb, (Eigen::Index)ns * ns);
  if (!rectangle_aperture) {
    for (int j2 = 0; j2 < ns; ++j2)
      for (int j3 = 0; j3 < ns; ++j3) {
        const Eigen::Index col = (Eigen::Index)j2 * ns + j3;
        for (int m2 = 0; m2 < nb; ++m2) {
          const double w2 = ov.dir2.wall(m2, j2);
          for (int m3 = 0; m3 < nb; ++m3)
            B(m2 * nb + m3, col) = w2 * ov.dir3.wall(m3, j3);
        }
      }
  } else {
    for (int j2 = 0; j2 < ns; ++j2)
      for (int j3 = 0; j3 < ns; ++j3) {
        const Eigen::Index col = (Eigen::Index)j2 * ns + j3;
        for (int m2 = 0; m2 < nb; ++m2) {
          const double ob2 = ov.dir2.obar(m2, j2);
          for (int m3 = 0; m3 < nb; ++m3)
            B(m2 * nb + m3, col) = -ob2 * ov.dir3.obar(m3, j3);
        }
        if (j2 < nb && j3 < nb) B(j2 * nb + j3, col) += 1.0;
      }
  }
  return B;
}

// K = B diag(g) B^T done as two real GEMMs.
Eigen::MatrixXcd sandwich(const Eigen::MatrixXd& B,
                          const Eigen::VectorXcd& gvec) {
  const Eigen::VectorXd gr = gvec.real(), gi = gvec.imag();
  Eigen::MatrixXd Bw = B.array().rowwise() * gr.transpose().array();
  Eigen::MatrixXd Kr = Bw * B.transpose();
  Bw = B.array().rowwise() * gi.transpose().array();
  Eigen::MatrixXd Ki = Bw * B.transpose();
  Eigen::MatrixXcd K(Kr.rows(), Kr.cols());
  K.real() = Kr;
  K.imag() = Ki;
  return K;
}

Eigen::VectorXcd green_vector(cplx z, const Geometry& g,
                              const SheetChoice& sheets, int count,
                              bool derivative) {
  const std::vector<double> cs = transverse_thresholds(
      g, g.dimension == 2 ? count : (int)std::lround(std::sqrt((double)count)));
  if ((int)cs.size() < count || (int)sheets.flags.size() < count)
    throw std::invalid_argument("mismatched truncation: sheet flags too short");
  Eigen::VectorXcd v(count);
  for (int j = 0; j < count; ++j)
    v[j] = derivative ? green_wall_dz(z, cs[j], sheets.flags[j], g.d1)
                      : green_wall(z, cs[j], sheets.flags[j], g.d1);
  return v;
}

int kernel_count(const Geometry& g, const Truncation& tr) {
  return g.dimension == 2 ? tr.n_sum : tr.n_sum * tr.n_sum;
}

int basis_count(const Geometry& g, const Truncation& tr) {
  return g.dimension == 2 ? tr.n_basis : tr.n_basis * tr.n_basis;
}

// Flattened kernel index of retained basis mode m (identical transverse
// numbering, larger stride in 3D).
int kernel_index_of_basis(const Geometry& g, const Truncation& tr, int m) {
  if (g.dimension == 2) return m;
  return (m / tr.n_basis) * tr.n_sum + (m % tr.n_basis);
}

}  // namespace

TruncatedBS assemble_K(cplx z, double eps, const Geometry& g,
                       const SheetChoice& sheets, const Truncation& trunc,
                       const Overlaps& overlaps, bool rectangle_aperture) {
  if (trunc.n_basis < 1 || trunc.n_basis > trunc.n_sum)
    throw std::invalid_argument("truncation must satisfy 1 <= n_basis <= n_sum");
  TruncatedBS bs;
  bs.z = z;
  bs.eps = eps;
  bs.trunc = trunc;
  bs.dimension = g.dimension;
  const Eigen::MatrixXd B = basis_factor(g, trunc, overlaps, rectangle_aperture);
  const Eigen::VectorXcd gv =
      green_vector(z, g, sheets, kernel_count(g, trunc), false);
  bs.K = sandwich(B, gv);
  const int nb = basis_count(g, trunc);
  bs.K0_diag.resize(nb);
  for (int m = 0; m < nb; ++m)
    bs.K0_diag[m] = gv[kernel_index_of_basis(g, trunc, m)];
  bs.H = bs.K;
  bs.H.diagonal() -= bs.K0_diag;
  return bs;
}

Eigen::MatrixXcd assemble_dK(cplx z, double eps, const Geometry& g,
                             const SheetChoice& sheets, const Truncation& trunc,
                             const Overlaps& overlaps, bool rectangle_aperture) {
  const Eigen::MatrixXd B = basis_factor(g, trunc, overlaps, rectangle_aperture);
  const Eigen::VectorXcd gv =
      green_vector(z, g, sheets, kernel_count(g, trunc), true);
  return sandwich(B, gv);
}

double operator_norm(const Eigen::MatrixXcd& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("operator_norm needs a square matrix");
  if (M.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()[0];
}

cplx quad_form_H(const TruncatedBS& bs, int k_flat) {
  if (k_flat < 0 || k_flat >= bs.H.rows())
    throw std::invalid_argument("index out of truncation");
  return bs.H(k_flat, k_flat);
}

namespace {

EigenBranch select_eigenpair(const TruncatedBS& bs, int seed_flat,
                             bool smallest_magnitude) {
  if (seed_flat < 0 || seed_flat >= bs.K.rows())
    throw std::invalid_argument("index out of truncation");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bs.K);
  if (es.info() != Eigen::Success) throw std::runtime_error("defective matrix");
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  int best = 0;
  if (smallest_magnitude) {
    double bv = std::abs(lam[0]);
    for (int i = 1; i < lam.size(); ++i)
      if (std::abs(lam[i]) < bv) { bv = std::abs(lam[i]); best = i; }
  } else {
    double bv = -1.0;
    for (int i = 0; i < lam.size(); ++i) {
      const double o = std::abs(V(seed_flat, i)) / V.col(i).norm();
      if (o > bv) { bv = o; best = i; }
    }
  }
  EigenBranch br;
  br.zeta = lam[best];
  Eigen::VectorXcd v = V.col(best);
  v.normalize();
  const cplx ph = v[seed_flat];
  if (std::abs(ph) > 0) v *= std::conj(ph) / std::abs(ph);
  br.vector = v;
  br.overlap_with_seed = std::abs(v[seed_flat]);
  const double o2 = br.overlap_with_seed * br.overlap_with_seed;
  br.eta_norm = std::sqrt(o2 < 1.0 ? 1.0 - o2 : 0.0);
  return br;
}

}  // namespace

EigenBranch branch_eigenpair(const TruncatedBS& bs, int seed_flat) {
  EigenBranch br = select_eigenpair(bs, seed_flat, false);
  if (!(br.overlap_with_seed > 1.0 / std::sqrt(2.0)))
    throw std::runtime_error("branch ambiguity");
  return br;
}

EigenBranch kernel_eigenpair(const TruncatedBS& bs, int seed_flat) {
  return select_eigenpair(bs, seed_flat, true);
}

double projector_diff_norm(const TruncatedBS& bs, const TruncatedBS& bs0,
                           int k_flat) {
  if (bs.K.rows() != bs0.K.rows() || bs.z != bs0.z)
    throw std::invalid_argument("projector_diff_norm needs matching z and truncation");
  const EigenBranch br = branch_eigenpair(bs, k_flat);
  // left eigenvector equals the right one for a complex symmetric matrix,
  // so the spectral projector is v v^T / (v^T v)
  const Eigen::VectorXcd& v = br.vector;
  const cplx denom = (v.transpose() * v)(0, 0);
  Eigen::MatrixXcd P = (v * v.transpose()) / denom;
  P(k_flat, k_flat) -= 1.0;
  return operator_norm(P);
}

}  // namespace wgres
