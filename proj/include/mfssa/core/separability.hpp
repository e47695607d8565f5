#pragma once

#include <string>
#include <vector>

#include "mfssa/core/reconstruction.hpp"

namespace mfssa {

// w_i = min(i, L, N - i + 1) for i = 1..N.
Vector weights(int N, int L);

// sum_j sum_i w_i <y_i^(j), z_i^(j)>, with the functional inner products taken
// through each variable's Gram matrix.
double wcov(const MFTS& y, const MFTS& z, int L);
double wnorm(const MFTS& y, int L);

struct WCorrelationMatrix {
  Matrix rho;
  std::vector<std::string> labels;
};

// Pairwise w-correlations; a series with zero w-norm raises
// undefined_correlation naming its label.
WCorrelationMatrix wcorrelation_matrix(const std::vector<MFTS>& series, int L,
                                       const std::vector<std::string>& labels = {});
WCorrelationMatrix wcorrelation_matrix(const ReconstructionSet& set, int L);

// Each of the first `count` components reconstructed as its own group
// (count <= 0 means all).
WCorrelationMatrix elementary_wcorrelation(const TrajectoryDecomposition& dec, const MFTS& source,
                                           int count = 0);

Json wcorrelation_to_json(const WCorrelationMatrix& m);
std::string wcorrelation_to_csv(const WCorrelationMatrix& m);

}  // namespace mfssa
