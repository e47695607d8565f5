#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfssa/core/basis.hpp"

namespace mfssa {

// One functional variable: a basis and its coefficients, stored column per
// time point (basis size x N).
struct FunctionalVariable {
  std::string name;
  BasisPtr basis;
  Matrix coefficients;
  // The discrete samples the coefficients were fitted to, when known.
  std::optional<SampleGrid> samples;
};

// Multivariate functional time series of length N over p >= 1 variables whose
// domains may differ in dimension.
class MFTS {
 public:
  explicit MFTS(std::vector<FunctionalVariable> variables);

  int variable_count() const { return static_cast<int>(variables_.size()); }
  int length() const { return length_; }
  const FunctionalVariable& variable(int j) const;
  const std::vector<FunctionalVariable>& variables() const { return variables_; }

  // Basis sizes d_1..d_p and their sum.
  std::vector<int> basis_sizes() const;
  int total_basis_size() const;

  // Same p, N and structurally equal bases variable by variable.
  bool compatible_with(const MFTS& other) const;

 private:
  std::vector<FunctionalVariable> variables_;
  int length_ = 0;
};

struct NormalizationRecord {
  std::vector<double> scales;  // one positive factor per variable; 1 = untouched
};

// Divides each selected variable by the standard deviation of all of its
// sample values. An empty selection normalizes every variable.
std::pair<MFTS, NormalizationRecord> normalize(const MFTS& mfts,
                                               const std::vector<int>& which = {});
MFTS denormalize(const MFTS& mfts, const NormalizationRecord& record);

// Basis functions of `variable` evaluated at `sites` times its coefficients
// (sites x N).
Matrix evaluate(const MFTS& mfts, int variable, const Sites& sites);

MFTS add(const MFTS& a, const MFTS& b);
MFTS scale(const MFTS& a, double c);

// Copy of `like` with new coefficient matrices (one per variable) and no
// sample grids.
MFTS with_coefficients(const MFTS& like, std::vector<Matrix> coefficients);

}  // namespace mfssa
