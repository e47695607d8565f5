#include "mfssa/core/separability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

Vector weights(int N, int L) {
  if (L < 1 || L > N) fail(ErrorCode::invalid_argument, "weights: need 1 <= L <= N");
  Vector w(N);
  for (int i = 1; i <= N; ++i) w(i - 1) = std::min({i, L, N - i + 1});
  return w;
}

double wcov(const MFTS& y, const MFTS& z, int L) {
  if (!y.compatible_with(z)) fail(ErrorCode::basis_mismatch, "wcov: series differ in bases or length");
  const Vector w = weights(y.length(), L);
  double sum = 0.0;
  for (int j = 0; j < y.variable_count(); ++j) {
    const Matrix& G = y.variable(j).basis->gram();
    const Matrix& cy = y.variable(j).coefficients;
    const Matrix gz = G * z.variable(j).coefficients;
    // per-time inner products c_y(t)^T G c_z(t)
    const Vector per_time = (cy.array() * gz.array()).colwise().sum().transpose();
    sum += w.dot(per_time);
  }
  return sum;
}

double wnorm(const MFTS& y, int L) { return std::sqrt(std::max(0.0, wcov(y, y, L))); }

WCorrelationMatrix wcorrelation_matrix(const std::vector<MFTS>& series, int L,
                                       const std::vector<std::string>& labels) {
  if (series.empty()) fail(ErrorCode::invalid_argument, "w-correlation needs at least one series");
  const auto m = static_cast<Eigen::Index>(series.size());
  WCorrelationMatrix out;
  for (Eigen::Index a = 0; a < m; ++a) {
    out.labels.push_back(a < static_cast<Eigen::Index>(labels.size()) ? labels[a] : "G" + std::to_string(a + 1));
  }
  Vector norms(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    norms(a) = wnorm(series[a], L);
    if (!(norms(a) > 0.0)) {
      fail(ErrorCode::undefined_correlation, "w-correlation undefined: group " + out.labels[a] + " has zero w-norm");
    }
  }
  out.rho = Matrix::Identity(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double rho = wcov(series[a], series[b], L) / (norms(a) * norms(b));
      out.rho(a, b) = rho;
      out.rho(b, a) = rho;
    }
  }
  return out;
}

WCorrelationMatrix wcorrelation_matrix(const ReconstructionSet& set, int L) {
  return wcorrelation_matrix(set.parts, L, set.labels);
}

WCorrelationMatrix elementary_wcorrelation(const TrajectoryDecomposition& dec, const MFTS& source, int count) {
  const int m = count <= 0 ? dec.rank() : std::min(count, dec.rank());
  Grouping g = Grouping::elementary(m);
  for (int i = 0; i < m; ++i) g.labels.push_back(std::to_string(i + 1));
  return wcorrelation_matrix(reconstruct(dec, g, source), dec.plan.window());
}

Json wcorrelation_to_json(const WCorrelationMatrix& m) {
  return Json{{"labels", m.labels}, {"matrix", matrix_to_json(m.rho)}};
}

std::string wcorrelation_to_csv(const WCorrelationMatrix& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "group";
  for (const auto& l : m.labels) os << ',' << l;
  os << '\n';
  for (Eigen::Index a = 0; a < m.rho.rows(); ++a) {
    os << m.labels[a];
    for (Eigen::Index b = 0; b < m.rho.cols(); ++b) os << ',' << m.rho(a, b);
    os << '\n';
  }
  return os.str();
}

}  // namespace mfssa
