#include "mfssa/core/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "mfssa/core/error.hpp"
#include "mfssa/core/quadrature.hpp"

namespace mfssa {

namespace {

void check_interval(const Interval& iv) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
    std::ostringstream os;
    os << "domain bounds must satisfy lo < hi, got [" << iv.lo << ", " << iv.hi << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
}

// Relative slack used to decide whether a site sits on the domain boundary.
constexpr double kBoundarySlack = 1e-12;

}  // namespace

const char* to_string(BasisKind kind) noexcept {
  switch (kind) {
    case BasisKind::bspline: return "bspline";
    case BasisKind::tensor_bspline: return "tensor_bspline";
    case BasisKind::discrete_delta: return "delta";
  }
  return "unknown";
}

DomainSpec::DomainSpec(DomainKind kind, std::vector<Interval> axes)
    : kind_(kind), axes_(std::move(axes)) {
  for (const auto& iv : axes_) check_interval(iv);
}

DomainSpec DomainSpec::interval(double lo, double hi) {
  return DomainSpec(DomainKind::interval, {Interval{lo, hi}});
}

DomainSpec DomainSpec::rectangle(Interval x, Interval y) {
  return DomainSpec(DomainKind::rectangle, {x, y});
}

double DomainSpec::volume() const {
  double v = 1.0;
  for (const auto& iv : axes_) v *= iv.length();
  return v;
}

bool DomainSpec::contains(const Sites& sites) const {
  if (sites.cols() != dimension()) return false;
  for (Eigen::Index i = 0; i < sites.rows(); ++i) {
    for (int a = 0; a < dimension(); ++a) {
      const auto& iv = axes_[a];
      const double slack = kBoundarySlack * iv.length();
      const double x = sites(i, a);
      if (!std::isfinite(x) || x < iv.lo - slack || x > iv.hi + slack) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

BSplineAxis::BSplineAxis(Interval interval, int df, int degree)
    : interval_(interval), df_(df), degree_(degree) {
  check_interval(interval);
  if (degree < 0) fail(ErrorCode::invalid_argument, "B-spline degree must be non-negative");
  if (df < degree + 1) {
    std::ostringstream os;
    os << "B-spline df=" << df << " too small for degree " << degree << " (need df >= degree + 1)";
    fail(ErrorCode::invalid_argument, os.str());
  }
  const int interior = df - degree - 1;
  knots_.reserve(df + degree + 1);
  for (int i = 0; i <= degree; ++i) knots_.push_back(interval.lo);
  for (int i = 1; i <= interior; ++i) {
    knots_.push_back(interval.lo + interval.length() * i / (interior + 1));
  }
  for (int i = 0; i <= degree; ++i) knots_.push_back(interval.hi);
}

std::vector<double> BSplineAxis::breakpoints() const {
  std::vector<double> out(knots_.begin(), knots_.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void BSplineAxis::evaluate(double x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const double slack = kBoundarySlack * interval_.length();
  if (x < interval_.lo - slack || x > interval_.hi + slack) {
    std::ostringstream os;
    os << "site " << x << " outside [" << interval_.lo << ", " << interval_.hi << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
  x = std::clamp(x, interval_.lo, interval_.hi);

  // Knot span index s with knots[s] <= x < knots[s + 1]; the right endpoint
  // belongs to the last non-empty span.
  int span = df_ - 1;
  if (x < interval_.hi) {
    const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + df_ + 1, x);
    span = static_cast<int>(it - knots_.begin()) - 1;
  }

  // Cox-de Boor triangle for the degree_ + 1 functions that are non-zero on
  // the span.
  std::vector<double> values(degree_ + 1, 0.0);
  std::vector<double> left(degree_ + 1, 0.0);
  std::vector<double> right(degree_ + 1, 0.0);
  values[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
  for (int j = 0; j <= degree_; ++j) out[span - degree_ + j] = values[j];
}

Vector BSplineAxis::evaluate(double x) const {
  Vector v(df_);
  evaluate(x, std::span<double>(v.data(), df_));
  return v;
}

Matrix BSplineAxis::gram() const {
  const auto rule = gauss_legendre(2 * degree_ + 1);
  const auto breaks = breakpoints();
  Matrix g = Matrix::Zero(df_, df_);
  Vector values(df_);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double b = breaks[s + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
      evaluate(mid + half * rule.nodes[n], std::span<double>(values.data(), df_));
      g.noalias() += (half * rule.weights[n]) * values * values.transpose();
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

Matrix FunctionalBasis::evaluate(const Sites& sites) const {
  if (!domain_.contains(sites)) {
    fail(ErrorCode::invalid_argument, "evaluation site outside the basis domain");
  }
  const Eigen::Index n = sites.rows();
  Matrix design = Matrix::Zero(n, size());
  switch (kind_) {
    case BasisKind::bspline: {
      const auto& ax = axes_[0];
      for (Eigen::Index i = 0; i < n; ++i) design.row(i) = ax.evaluate(sites(i, 0)).transpose();
      break;
    }
    case BasisKind::tensor_bspline: {
      const auto& ax = axes_[0];
      const auto& ay = axes_[1];
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vector vx = ax.evaluate(sites(i, 0));
        const Vector vy = ay.evaluate(sites(i, 1));
        for (int a = 0; a < ax.size(); ++a) {
          if (vx(a) == 0.0) continue;
          for (int b = 0; b < ay.size(); ++b) design(i, a * ay.size() + b) = vx(a) * vy(b);
        }
      }
      break;
    }
    case BasisKind::discrete_delta: {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < delta_sites_.rows(); ++k) {
          if ((delta_sites_.row(k) - sites.row(i)).cwiseAbs().maxCoeff() <= 1e-12) {
            design(i, k) = 1.0;
            break;
          }
        }
      }
      break;
    }
  }
  return design;
}

bool FunctionalBasis::structurally_equal(const FunctionalBasis& other) const {
  if (kind_ != other.kind_ || !(domain_ == other.domain_) || !(axes_ == other.axes_)) return false;
  if (kind_ == BasisKind::discrete_delta) {
    return delta_sites_.rows() == other.delta_sites_.rows() &&
           delta_sites_.cols() == other.delta_sites_.cols() &&
           delta_sites_ == other.delta_sites_ && cell_measure_ == other.cell_measure_;
  }
  return true;
}

Matrix gram_matrix(const FunctionalBasis& basis) {
  Matrix g;
  switch (basis.kind_) {
    case BasisKind::bspline:
      g = basis.axes_[0].gram();
      break;
    case BasisKind::tensor_bspline:
      g = Eigen::kroneckerProduct(basis.axes_[0].gram(), basis.axes_[1].gram());
      break;
    case BasisKind::discrete_delta: {
      const auto n = basis.delta_sites_.rows();
      g = basis.cell_measure_ * Matrix::Identity(n, n);
      break;
    }
  }
  if (!g.allFinite()) fail(ErrorCode::numeric_failure, "Gram quadrature produced non-finite values");
  // Quadrature accumulates symmetric rank-one terms; enforce exact symmetry.
  Matrix sym = 0.5 * (g + g.transpose());
  return sym;
}

BasisPtr make_bspline_basis(const DomainSpec& domain, int df, int degree) {
  if (domain.kind() != DomainKind::interval) {
    fail(ErrorCode::invalid_argument, "bspline basis requires an interval domain");
  }
  auto basis = std::shared_ptr<FunctionalBasis>(new FunctionalBasis());
  basis->kind_ = BasisKind::bspline;
  basis->domain_ = domain;
  basis->axes_.emplace_back(domain.axes()[0], df, degree);
  basis->gram_ = gram_matrix(*basis);
  return basis;
}

BasisPtr make_tensor_basis(const DomainSpec& domain, std::pair<int, int> df_per_axis, int degree) {
  if (domain.kind() != DomainKind::rectangle) {
    fail(ErrorCode::invalid_argument, "tensor_bspline basis requires a rectangle domain");
  }
  auto basis = std::shared_ptr<FunctionalBasis>(new FunctionalBasis());
  basis->kind_ = BasisKind::tensor_bspline;
  basis->domain_ = domain;
  basis->axes_.emplace_back(domain.axes()[0], df_per_axis.first, degree);
  basis->axes_.emplace_back(domain.axes()[1], df_per_axis.second, degree);
  basis->gram_ = gram_matrix(*basis);
  return basis;
}

BasisPtr make_delta_basis(const Sites& sites, const DomainSpec& domain) {
  if (sites.rows() == 0) fail(ErrorCode::invalid_argument, "delta basis needs at least one site");
  SampleGrid probe{sites, Matrix(sites.rows(), 0)};
  probe.validate(domain);
  auto basis = std::shared_ptr<FunctionalBasis>(new FunctionalBasis());
  basis->kind_ = BasisKind::discrete_delta;
  basis->domain_ = domain;
  basis->delta_sites_ = sites;
  basis->cell_measure_ = domain.volume() / static_cast<double>(sites.rows());
  basis->gram_ = gram_matrix(*basis);
  return basis;
}

BasisPtr make_delta_basis(const Sites& sites) {
  if (sites.cols() == 2) return make_delta_basis(sites, DomainSpec::rectangle({0, 1}, {0, 1}));
  return make_delta_basis(sites, DomainSpec::interval(0.0, 1.0));
}

// ---------------------------------------------------------------------------

void SampleGrid::validate(const DomainSpec& domain) const {
  if (sites.rows() == 0) fail(ErrorCode::invalid_argument, "sample grid has no sites");
  if (sites.cols() != domain.dimension()) {
    fail(ErrorCode::schema_violation, "sample grid dimension does not match the domain");
  }
  if (!domain.contains(sites)) fail(ErrorCode::invalid_argument, "sample site outside the domain");
  if (values.cols() > 0 && values.rows() != sites.rows()) {
    fail(ErrorCode::schema_violation, "sample values must have one row per site");
  }
  std::vector<Eigen::Index> order(sites.rows());
  for (Eigen::Index i = 0; i < sites.rows(); ++i) order[i] = i;
  const auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < sites.cols(); ++c) {
      if (sites(a, c) != sites(b, c)) return sites(a, c) < sites(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) {
      fail(ErrorCode::invalid_argument, "sample grid contains duplicate sites");
    }
  }
}

Matrix project_samples(const SampleGrid& grid, const FunctionalBasis& basis) {
  grid.validate(basis.domain());
  const Matrix design = basis.evaluate(grid.sites);
  if (design.rows() < design.cols()) {
    std::ostringstream os;
    os << "projection needs at least " << design.cols() << " sites, got " << design.rows();
    fail(ErrorCode::projection_failure, os.str());
  }
  const Eigen::BDCSVD<Matrix> svd(design);
  const Vector& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxDesignCondition)) {
    std::ostringstream os;
    os << "design matrix is rank deficient (condition number " << cond << ")";
    fail(ErrorCode::projection_failure, os.str());
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(design);
  Matrix coefs = qr.solve(grid.values);
  if (!coefs.allFinite()) fail(ErrorCode::numeric_failure, "projection produced non-finite coefficients");
  return coefs;
}

}  // namespace mfssa
