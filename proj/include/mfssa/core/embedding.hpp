#pragma once

#include <vector>

#include "mfssa/core/mfts.hpp"

namespace mfssa {

// Index bookkeeping for the coefficient representation. Basis index q runs
// over all variables' basis functions (variable-major); row index of B is
// q * L + r for lag r (q-major, r-minor). All indices are 0-based.
class EmbeddingPlan {
 public:
  EmbeddingPlan(std::vector<int> basis_sizes, int N, int L);

  int window() const { return L_; }
  int columns() const { return K_; }  // K = N - L + 1
  int length() const { return N_; }
  int total_basis_size() const { return d_; }
  int rows() const { return L_ * d_; }
  int variable_count() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& basis_sizes() const { return sizes_; }
  int basis_offset(int variable) const { return offsets_[variable]; }

  // q -> (variable j_q, local basis index l_q)
  std::pair<int, int> basis_index(int q) const;
  // row -> (q, r)
  std::pair<int, int> row_index(int row) const { return {row / L_, row % L_}; }
  int row(int q, int r) const { return q * L_ + r; }

  // L exceeds floor(N/2); a rule-of-thumb violation, reported not rejected.
  bool window_exceeds_half() const { return L_ > N_ / 2; }

  bool operator==(const EmbeddingPlan&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  std::vector<int> owner_;  // q -> variable
  int N_;
  int L_;
  int K_;
  int d_;
};

// Block-diagonal-Kronecker operator blockdiag_j(M_j) (Kronecker) I_L acting on
// Ld-row matrices laid out by EmbeddingPlan. Never materialized in the main
// path.
class StructuredGram {
 public:
  StructuredGram(std::vector<Matrix> blocks, int L);

  const std::vector<Matrix>& blocks() const { return blocks_; }
  int window() const { return L_; }
  int rows() const { return rows_; }

  Matrix apply(const Matrix& x) const;
  Vector apply(const Vector& x) const;

  // Dense Ld x Ld materialization for small-instance checks.
  Matrix dense() const;

 private:
  std::vector<Matrix> blocks_;
  int L_;
  int rows_;
};

// Coefficient representation of the trajectory operator: X(a) = P(B a) with
// Gram G = blockdiag_j(G_j) (Kronecker) I_L.
struct TrajectoryRep {
  EmbeddingPlan plan;
  Matrix B;  // Ld x K
  StructuredGram gram;
  std::vector<BasisPtr> bases;
};

TrajectoryRep embed(const MFTS& mfts, int L);

// Per-block symmetric eigendecomposition with eigenvalues floored at
// 1e-12 * lambda_max before taking (inverse) square roots.
struct GramRoots {
  StructuredGram half;
  StructuredGram half_inv;
};
GramRoots gram_sqrt(const StructuredGram& gram);
GramRoots gram_sqrt(const TrajectoryRep& rep);

// Symmetric square root and inverse square root of one SPD block.
std::pair<Matrix, Matrix> spd_sqrt(const Matrix& block);

inline constexpr double kGramFloor = 1e-12;

// X a as a coefficient vector in the phi basis (length Ld).
Vector forward_apply(const TrajectoryRep& rep, const Vector& a);

// X* z = (<x_k, z>)_k = B^T G z.
Vector adjoint_apply(const TrajectoryRep& rep, const Vector& z);

// <x, y> in H^L for coefficient vectors.
double inner_product(const TrajectoryRep& rep, const Vector& x, const Vector& y);

// Inverse embedding of a block-Hankel Ld x K matrix: reads the series of each
// basis index off its first row and last column (d x N per variable).
std::vector<Matrix> unembed(const Matrix& hankel, const EmbeddingPlan& plan);

}  // namespace mfssa
