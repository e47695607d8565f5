#pragma once

#include <vector>

#include "mfssa/core/reconstruction.hpp"

namespace mfssa {

enum class Stacking { vertical, horizontal };

// p scalar series of length N, one per row. Discretized functions enter as one
// row per sample site.
struct VectorMTS {
  Matrix values;  // p x N

  int series_count() const { return static_cast<int>(values.rows()); }
  int length() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

// Vertical: pL x K with block j = trajectory matrix of series j.
// Horizontal: L x pK with column block j = trajectory matrix of series j.
Matrix mssa_embed(const VectorMTS& mts, int L, Stacking stacking);

struct MssaDecomposition {
  Stacking stacking;
  int p = 0;
  int N = 0;
  int L = 0;
  int K = 0;
  Vector sigma;
  Matrix U;
  Matrix V;

  int rank() const { return static_cast<int>(sigma.size()); }
};

MssaDecomposition mssa_decompose(const VectorMTS& mts, int L, Stacking stacking,
                                 double tol = kDefaultRankTolerance);

// One series set per group: grouped rank sums, per-block antidiagonal
// averaging, read-back.
std::vector<VectorMTS> mssa_reconstruct(const MssaDecomposition& dec, const Grouping& grouping);

}  // namespace mfssa
