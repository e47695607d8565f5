#include "mfssa/core/mfts.hpp"

#include <cmath>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

MFTS::MFTS(std::vector<FunctionalVariable> variables) : variables_(std::move(variables)) {
  if (variables_.empty()) fail(ErrorCode::invalid_argument, "MFTS needs at least one variable");
  length_ = static_cast<int>(variables_.front().coefficients.cols());
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const auto& v = variables_[j];
    if (!v.basis) fail(ErrorCode::invalid_argument, "variable " + std::to_string(j) + " has no basis");
    if (v.coefficients.rows() != v.basis->size()) {
      fail(ErrorCode::basis_mismatch,
           "variable " + std::to_string(j) + " coefficient rows do not match its basis size");
    }
    if (v.coefficients.cols() != length_) {
      std::ostringstream os;
      os << "mismatched N: variable 0 has " << length_ << " time points, variable " << j << " has "
         << v.coefficients.cols();
      fail(ErrorCode::mismatched_length, os.str());
    }
    if (!v.coefficients.allFinite()) {
      fail(ErrorCode::numeric_failure, "variable " + std::to_string(j) + " has non-finite coefficients");
    }
  }
  if (length_ < 1) fail(ErrorCode::invalid_argument, "MFTS needs at least one time point");
}

const FunctionalVariable& MFTS::variable(int j) const {
  if (j < 0 || j >= variable_count()) {
    fail(ErrorCode::index_out_of_range, "variable index " + std::to_string(j) + " out of range");
  }
  return variables_[j];
}

std::vector<int> MFTS::basis_sizes() const {
  std::vector<int> d;
  d.reserve(variables_.size());
  for (const auto& v : variables_) d.push_back(v.basis->size());
  return d;
}

int MFTS::total_basis_size() const {
  int d = 0;
  for (const auto& v : variables_) d += v.basis->size();
  return d;
}

bool MFTS::compatible_with(const MFTS& other) const {
  if (variable_count() != other.variable_count() || length_ != other.length_) return false;
  for (int j = 0; j < variable_count(); ++j) {
    const auto& a = *variables_[j].basis;
    const auto& b = *other.variables_[j].basis;
    if (&a != &b && !a.structurally_equal(b)) return false;
  }
  return true;
}

namespace {

void require_compatible(const MFTS& a, const MFTS& b, const char* what) {
  if (!a.compatible_with(b)) {
    fail(ErrorCode::basis_mismatch, std::string(what) + ": series differ in bases or length");
  }
}

// Samples used for the normalization statistic: the stored grid when present,
// the coefficients themselves for a delta basis, otherwise the fitted
// functions on a 64-point (1D) or 16 x 16 (2D) grid.
Matrix sample_values(const FunctionalVariable& v) {
  if (v.samples) return v.samples->values;
  if (v.basis->kind() == BasisKind::discrete_delta) return v.coefficients;
  const auto& dom = v.basis->domain();
  const int per_axis = dom.dimension() == 1 ? 64 : 16;
  Sites sites(static_cast<Eigen::Index>(std::pow(per_axis, dom.dimension())), dom.dimension());
  for (Eigen::Index i = 0; i < sites.rows(); ++i) {
    Eigen::Index rest = i;
    for (int a = dom.dimension() - 1; a >= 0; --a) {
      const auto& iv = dom.axes()[a];
      sites(i, a) = iv.lo + iv.length() * (rest % per_axis + 0.5) / per_axis;
      rest /= per_axis;
    }
  }
  return v.basis->evaluate(sites) * v.coefficients;
}

}  // namespace

std::pair<MFTS, NormalizationRecord> normalize(const MFTS& mfts, const std::vector<int>& which) {
  NormalizationRecord record;
  record.scales.assign(mfts.variable_count(), 1.0);
  std::vector<bool> selected(mfts.variable_count(), which.empty());
  for (int j : which) {
    mfts.variable(j);
    selected[j] = true;
  }

  auto vars = mfts.variables();
  for (int j = 0; j < mfts.variable_count(); ++j) {
    if (!selected[j]) continue;
    const Matrix values = sample_values(vars[j]);
    const double n = static_cast<double>(values.size());
    if (n < 2) fail(ErrorCode::invalid_argument, "normalize: variable " + vars[j].name + " has too few samples");
    const double mean = values.mean();
    const double var = (values.array() - mean).square().sum() / (n - 1.0);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      fail(ErrorCode::invalid_argument, "normalize: variable " + vars[j].name + " has zero variance");
    }
    record.scales[j] = sd;
    vars[j].coefficients /= sd;
    if (vars[j].samples) vars[j].samples->values /= sd;
  }
  return {MFTS(std::move(vars)), std::move(record)};
}

MFTS denormalize(const MFTS& mfts, const NormalizationRecord& record) {
  if (static_cast<int>(record.scales.size()) != mfts.variable_count()) {
    fail(ErrorCode::invalid_argument, "normalization record does not match the series");
  }
  auto vars = mfts.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!(record.scales[j] > 0.0)) fail(ErrorCode::invalid_argument, "normalization scale must be positive");
    vars[j].coefficients *= record.scales[j];
    if (vars[j].samples) vars[j].samples->values *= record.scales[j];
  }
  return MFTS(std::move(vars));
}

Matrix evaluate(const MFTS& mfts, int variable, const Sites& sites) {
  const auto& v = mfts.variable(variable);
  if (!v.basis->domain().contains(sites)) {
    fail(ErrorCode::invalid_argument, "evaluate: site outside the domain of variable " + v.name);
  }
  return v.basis->evaluate(sites) * v.coefficients;
}

MFTS add(const MFTS& a, const MFTS& b) {
  require_compatible(a, b, "add");
  std::vector<Matrix> coefs;
  for (int j = 0; j < a.variable_count(); ++j) {
    coefs.push_back(a.variable(j).coefficients + b.variable(j).coefficients);
  }
  return with_coefficients(a, std::move(coefs));
}

MFTS scale(const MFTS& a, double c) {
  std::vector<Matrix> coefs;
  for (const auto& v : a.variables()) coefs.push_back(c * v.coefficients);
  return with_coefficients(a, std::move(coefs));
}

MFTS with_coefficients(const MFTS& like, std::vector<Matrix> coefficients) {
  if (static_cast<int>(coefficients.size()) != like.variable_count()) {
    fail(ErrorCode::invalid_argument, "with_coefficients: one matrix per variable required");
  }
  std::vector<FunctionalVariable> vars;
  vars.reserve(coefficients.size());
  for (int j = 0; j < like.variable_count(); ++j) {
    const auto& src = like.variable(j);
    vars.push_back(FunctionalVariable{src.name, src.basis, std::move(coefficients[j]), std::nullopt});
  }
  return MFTS(std::move(vars));
}

}  // namespace mfssa
