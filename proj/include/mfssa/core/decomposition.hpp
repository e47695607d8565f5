#pragma once

#include <vector>

#include "mfssa/core/dataset_io.hpp"
#include "mfssa/core/embedding.hpp"

namespace mfssa {

inline constexpr double kDefaultRankTolerance = 1e-12;

// Singular triples with the project-wide conventions applied: components with
// sigma <= tol * sigma_1 dropped, each (u_i, v_i) sign-flipped so the
// largest-magnitude entry of v_i (lowest index on ties) is positive, and
// exactly equal sigmas ordered by lexicographic v_i.
struct SingularTriples {
  Vector sigma;
  Matrix U;
  Matrix V;
};
SingularTriples ordered_svd(const Matrix& X, double tol);

struct ElementaryComponent {
  int index;  // 0-based
  double sigma;
  Vector v;    // length K
  Vector psi;  // phi-basis coefficients of psi_i (length Ld)
};

// Eigentriples (sigma_i, v_i, psi_i) of the trajectory operator. Psi holds
// G^{-1/2} u_i column by column.
struct TrajectoryDecomposition {
  EmbeddingPlan plan;
  Vector sigma;
  Matrix V;    // K x r
  Matrix U;    // Ld x r, left singular vectors of G^{1/2} B
  Matrix Psi;  // Ld x r
  StructuredGram gram;
  std::vector<BasisPtr> bases;

  int rank() const { return static_cast<int>(sigma.size()); }
  ElementaryComponent component(int i) const;
};

TrajectoryDecomposition decompose(const TrajectoryRep& rep, double tol = kDefaultRankTolerance);

struct RelationResiduals {
  double forward = 0.0;  // max_i || X v_i - sigma_i psi_i ||_{H^L}
  double adjoint = 0.0;  // max_i || X* psi_i - sigma_i v_i ||
};
RelationResiduals eigentriple_relations_check(const TrajectoryDecomposition& dec,
                                              const TrajectoryRep& rep);

// Psi^T G Psi - I, max absolute entry.
double left_orthonormality_error(const TrajectoryDecomposition& dec);

// Permutation from the q-major/r-minor row order into the unfolded order
// (variable, lag, local basis index): unfolded[perm[row]] = original[row].
std::vector<int> unfolding_permutation(const EmbeddingPlan& plan);

// Independent second route: permute B into the unfolded layout, build the
// dense Gram blockdiag_j(I_L (Kronecker) G_j), take its dense square root and
// decompose.
struct UnfoldedDecomposition {
  EmbeddingPlan plan;
  Vector sigma;
  Matrix V;
  Matrix Psi;  // unfolded row order
};
UnfoldedDecomposition vmfssa_decompose(const TrajectoryRep& rep, double tol = kDefaultRankTolerance);

// Per-group reconstruction along the unfolded route: rank-|I| sums, diagonal
// averaging in the unfolded layout, and inverse embedding. Groups hold
// 0-based component indices. Result: [group][variable] coefficient matrices.
std::vector<std::vector<Matrix>> vmfssa_reconstruct(const UnfoldedDecomposition& dec,
                                                    const std::vector<std::vector<int>>& groups);

struct VmfssaReport {
  int rank_mfssa = 0;
  int rank_unfolded = 0;
  double max_sigma_diff = 0.0;
  double max_right_diff = 0.0;  // after sign alignment
  double max_left_diff = 0.0;   // unfolded Psi vs permuted Psi, after sign alignment
};
VmfssaReport vmfssa_oracle(const TrajectoryRep& rep, double tol = kDefaultRankTolerance);

// For each component i in [first, first + count): an L x n_sites matrix whose
// row r is the (variable, lag r) element of psi_i evaluated at `sites`.
std::vector<Matrix> render_left_functions(const TrajectoryDecomposition& dec, int variable,
                                          const Sites& sites, int first, int count);

Json decomposition_to_json(const TrajectoryDecomposition& dec);

}  // namespace mfssa
