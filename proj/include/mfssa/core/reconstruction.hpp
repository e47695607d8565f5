#pragma once

#include <string>
#include <vector>

#include "mfssa/core/decomposition.hpp"

namespace mfssa {

// Disjoint, non-empty sets of 0-based component indices. Text form uses
// 1-based indices, ',' within a group and ';' between groups: "1;2,3;4,5".
struct Grouping {
  std::vector<std::vector<int>> groups;
  std::vector<std::string> labels;  // optional; defaults to G1, G2, ...

  static Grouping parse(const std::string& text);
  std::string to_string() const;

  // Throws overlapping_groups / index_out_of_range / invalid_argument.
  void validate(int rank) const;

  // Indices in [0, rank) not covered by any group.
  std::vector<int> complement(int rank) const;

  std::string label(std::size_t q) const;

  // Every component is its own group.
  static Grouping elementary(int rank);
};

// B_{I_q} = sum_{i in I_q} sigma_i psi_i v_i^T for each group.
std::vector<Matrix> group_components(const TrajectoryDecomposition& dec, const Grouping& grouping);

// Replaces every L x K basis-index block by its antidiagonal means.
Matrix hankelize(const Matrix& B, const EmbeddingPlan& plan);

// Antidiagonal averaging of one L x K block, in place.
void hankelize_block(Eigen::Ref<Matrix> block);

struct ReconstructionSet {
  std::vector<MFTS> parts;
  std::vector<std::string> labels;
  std::vector<double> shares;  // fraction of sum sigma^2 carried by each group
};

// Hankelized group matrices mapped back through the inverse embedding. With
// `include_residual`, components outside the grouping form an extra
// "residual" part when any remain.
ReconstructionSet reconstruct(const TrajectoryDecomposition& dec, const Grouping& grouping,
                              const MFTS& source, bool include_residual = false);

}  // namespace mfssa
