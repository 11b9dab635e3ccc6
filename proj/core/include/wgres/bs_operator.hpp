#pragma once

#include <Eigen/Dense>

#include "wgres/geometry.hpp"
#include "wgres/greens.hpp"
#include "wgres/modes.hpp"

namespace wgres {

// Truncated Birman-Schwinger matrix K(z) in the transverse sine basis.
// N_basis modes are retained as rows/columns, N_sum modes are summed in the
// kernel. In 3D both counts are per direction and the basis is flattened
// row-major (m2 outer, m3 inner), so the matrix is N_basis^2 square.
struct Truncation {
  int n_basis = 64;
  int n_sum = 256;
};

struct TruncatedBS {
  cplx z;
  double eps = 0.0;
  Truncation trunc;
  int dimension = 2;
  Eigen::MatrixXcd K;
  Eigen::VectorXcd K0_diag;  // G_m(z) per retained basis mode
  Eigen::MatrixXcd H;        // K - diag(K0_diag)
};

// Tracked eigenpair of K. The phase is fixed so the overlap with the seed
// basis vector is real positive.
struct EigenBranch {
  cplx zeta;
  Eigen::VectorXcd vector;
  double overlap_with_seed = 0.0;
  double eta_norm = 0.0;  // norm of the component orthogonal to the seed
};

// K[m][n] = sum_j G_j(z) O[m][j] O[j][n] with O the wall overlap matrix.
// 3D kernel sums run over (j2,j3) up to n_sum^2 pairs; by default the wall
// factor is the product of the two 1D wall overlaps (product-projector
// operator, a cross-shaped aperture complement). rectangle_aperture = true
// switches to the rectangle-exact factor delta - Obar2*Obar3, kept as an
// extension point.
TruncatedBS assemble_K(cplx z, double eps, const Geometry& g,
                       const SheetChoice& sheets, const Truncation& trunc,
                       const Overlaps& overlaps,
                       bool rectangle_aperture = false);

// Same layout filled with dG_j/dz factors.
Eigen::MatrixXcd assemble_dK(cplx z, double eps, const Geometry& g,
                             const SheetChoice& sheets, const Truncation& trunc,
                             const Overlaps& overlaps,
                             bool rectangle_aperture = false);

// Largest singular value.
double operator_norm(const Eigen::MatrixXcd& M);

// H[k][k], the diagonal quadratic form in the orthonormal basis. k_flat is
// the flattened basis index (0-based).
cplx quad_form_H(const TruncatedBS& bs, int k_flat);

// Full dense eigendecomposition; selects the eigenvector with maximal
// |overlap| with the seed basis vector. Throws "branch ambiguity" when the
// winning overlap is <= 1/sqrt(2).
EigenBranch branch_eigenpair(const TruncatedBS& bs, int seed_flat);

// Eigenpair of smallest |eigenvalue|. At a converged resonance the kernel
// vector is the tracked branch, so this selection is unambiguous there even
// when the seed overlap has dropped below the dominance guard.
EigenBranch kernel_eigenpair(const TruncatedBS& bs, int seed_flat);

// Spectral norm of the rank-1 spectral projector difference
// v u^T/(u^T v) - e_k e_k^T for the tracked branch (left = right eigenvector
// by complex symmetry). bs0 must be assembled at the same z with eps = 0.
double projector_diff_norm(const TruncatedBS& bs, const TruncatedBS& bs0,
                           int k_flat);

}  // namespace wgres
