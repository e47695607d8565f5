#include "mfssa/core/reconstruction.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

Grouping Grouping::parse(const std::string& text) {
  Grouping g;
  std::string trimmed;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
  }
  if (trimmed.empty()) fail(ErrorCode::invalid_argument, "empty grouping");
  std::stringstream groups(trimmed);
  std::string group_text;
  while (std::getline(groups, group_text, ';')) {
    if (group_text.empty()) fail(ErrorCode::invalid_argument, "grouping \"" + text + "\" has an empty group");
    std::vector<int> group;
    std::stringstream items(group_text);
    std::string item;
    while (std::getline(items, item, ',')) {
      if (item.empty() || !std::all_of(item.begin(), item.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        fail(ErrorCode::invalid_argument, "grouping \"" + text + "\": bad index \"" + item + "\"");
      }
      const int index = std::stoi(item);
      if (index < 1) fail(ErrorCode::index_out_of_range, "component indices start at 1");
      group.push_back(index - 1);
    }
    if (group.empty() || group_text.back() == ',') {
      fail(ErrorCode::invalid_argument, "grouping \"" + text + "\" has an empty entry");
    }
    g.groups.push_back(std::move(group));
  }
  if (trimmed.back() == ';') fail(ErrorCode::invalid_argument, "grouping \"" + text + "\" has an empty group");

  std::set<int> seen;
  for (const auto& group : g.groups) {
    for (int i : group) {
      if (!seen.insert(i).second) {
        fail(ErrorCode::overlapping_groups, "component " + std::to_string(i + 1) + " appears in more than one group");
      }
    }
  }
  return g;
}

std::string Grouping::to_string() const {
  std::ostringstream os;
  for (std::size_t q = 0; q < groups.size(); ++q) {
    if (q) os << ';';
    for (std::size_t k = 0; k < groups[q].size(); ++k) {
      if (k) os << ',';
      os << groups[q][k] + 1;
    }
  }
  return os.str();
}

void Grouping::validate(int rank) const {
  if (groups.empty()) fail(ErrorCode::invalid_argument, "grouping has no groups");
  if (!labels.empty() && labels.size() != groups.size()) {
    fail(ErrorCode::invalid_argument, "grouping labels must match the number of groups");
  }
  std::set<int> seen;
  for (std::size_t q = 0; q < groups.size(); ++q) {
    if (groups[q].empty()) fail(ErrorCode::invalid_argument, "group " + std::to_string(q + 1) + " is empty");
    for (int i : groups[q]) {
      if (i < 0 || i >= rank) {
        std::ostringstream os;
        os << "component " << i + 1 << " out of range 1.." << rank;
        fail(ErrorCode::index_out_of_range, os.str());
      }
      if (!seen.insert(i).second) {
        fail(ErrorCode::overlapping_groups, "component " + std::to_string(i + 1) + " appears in more than one group");
      }
    }
  }
}

std::vector<int> Grouping::complement(int rank) const {
  std::vector<bool> used(rank, false);
  for (const auto& group : groups) {
    for (int i : group) {
      if (i >= 0 && i < rank) used[i] = true;
    }
  }
  std::vector<int> rest;
  for (int i = 0; i < rank; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  return rest;
}

std::string Grouping::label(std::size_t q) const {
  if (q < labels.size() && !labels[q].empty()) return labels[q];
  return "G" + std::to_string(q + 1);
}

Grouping Grouping::elementary(int rank) {
  Grouping g;
  for (int i = 0; i < rank; ++i) g.groups.push_back({i});
  return g;
}

// ---------------------------------------------------------------------------

std::vector<Matrix> group_components(const TrajectoryDecomposition& dec, const Grouping& grouping) {
  grouping.validate(dec.rank());
  std::vector<Matrix> out;
  for (const auto& group : grouping.groups) {
    Matrix Bg = Matrix::Zero(dec.Psi.rows(), dec.V.rows());
    for (int i : group) Bg.noalias() += dec.sigma(i) * dec.Psi.col(i) * dec.V.col(i).transpose();
    out.push_back(std::move(Bg));
  }
  return out;
}

void hankelize_block(Eigen::Ref<Matrix> block) {
  const Eigen::Index L = block.rows();
  const Eigen::Index K = block.cols();
  for (Eigen::Index u = 0; u < L + K - 1; ++u) {
    const Eigen::Index r0 = std::max<Eigen::Index>(0, u - K + 1);
    const Eigen::Index r1 = std::min<Eigen::Index>(u, L - 1);
    double sum = 0.0;
    for (Eigen::Index r = r0; r <= r1; ++r) sum += block(r, u - r);
    // n_u = min(u + 1, L, K, L + K - 1 - u) in 0-based terms.
    const double mean = sum / static_cast<double>(r1 - r0 + 1);
    for (Eigen::Index r = r0; r <= r1; ++r) block(r, u - r) = mean;
  }
}

Matrix hankelize(const Matrix& B, const EmbeddingPlan& plan) {
  if (B.rows() != plan.rows() || B.cols() != plan.columns()) {
    fail(ErrorCode::plan_mismatch, "hankelize: matrix shape does not match the embedding plan");
  }
  Matrix out = B;
  const int L = plan.window();
  for (int q = 0; q < plan.total_basis_size(); ++q) hankelize_block(out.middleRows(q * L, L));
  return out;
}

ReconstructionSet reconstruct(const TrajectoryDecomposition& dec, const Grouping& grouping,
                              const MFTS& source, bool include_residual) {
  const EmbeddingPlan expected(source.basis_sizes(), source.length(), dec.plan.window());
  if (!(expected == dec.plan)) {
    fail(ErrorCode::plan_mismatch, "reconstruct: decomposition was not produced from this series");
  }
  Grouping full = grouping;
  if (full.labels.size() < full.groups.size()) {
    for (std::size_t q = 0; q < full.groups.size(); ++q) {
      if (q >= full.labels.size()) full.labels.push_back(grouping.label(q));
    }
  }
  full.validate(dec.rank());
  if (include_residual) {
    auto rest = full.complement(dec.rank());
    if (!rest.empty()) {
      full.groups.push_back(std::move(rest));
      full.labels.push_back("residual");
    }
  }

  const double total = dec.sigma.squaredNorm();
  ReconstructionSet set;
  const auto matrices = group_components(dec, full);
  for (std::size_t q = 0; q < matrices.size(); ++q) {
    set.parts.push_back(with_coefficients(source, unembed(hankelize(matrices[q], dec.plan), dec.plan)));
    set.labels.push_back(full.labels[q]);
    double share = 0.0;
    for (int i : full.groups[q]) share += dec.sigma(i) * dec.sigma(i);
    set.shares.push_back(total > 0.0 ? share / total : 0.0);
  }
  return set;
}

}  // namespace mfssa
