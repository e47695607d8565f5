#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mfssa/core/types.hpp"

namespace mfssa {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

enum class DomainKind { interval, rectangle };

// Compact domain of one variable: an interval or an axis-aligned rectangle.
class DomainSpec {
 public:
  static DomainSpec interval(double lo, double hi);
  static DomainSpec rectangle(Interval x, Interval y);

  DomainKind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(axes_.size()); }
  const std::vector<Interval>& axes() const { return axes_; }
  double volume() const;

  // Sites carry one column per axis.
  bool contains(const Sites& sites) const;

  bool operator==(const DomainSpec&) const = default;

 private:
  DomainSpec(DomainKind kind, std::vector<Interval> axes);

  DomainKind kind_ = DomainKind::interval;
  std::vector<Interval> axes_;
};

// Open-uniform B-spline family on one interval: `degree + 1` repeated knots at
// each end and `df - degree - 1` equally spaced interior knots.
class BSplineAxis {
 public:
  BSplineAxis(Interval interval, int df, int degree);

  int size() const { return df_; }
  int degree() const { return degree_; }
  const Interval& interval() const { return interval_; }
  const std::vector<double>& knots() const { return knots_; }

  // Distinct knot values, i.e. the boundaries of the polynomial pieces.
  std::vector<double> breakpoints() const;

  // Values of all `size()` basis functions at x; x must lie in the interval.
  void evaluate(double x, std::span<double> out) const;
  Vector evaluate(double x) const;

  // Composite Gauss-Legendre Gram matrix, 2*degree+1 nodes per knot span.
  Matrix gram() const;

  bool operator==(const BSplineAxis&) const = default;

 private:
  Interval interval_;
  int df_;
  int degree_;
  std::vector<double> knots_;
};

enum class BasisKind { bspline, tensor_bspline, discrete_delta };

const char* to_string(BasisKind kind) noexcept;

class FunctionalBasis;
using BasisPtr = std::shared_ptr<const FunctionalBasis>;

// Finite basis of one variable's function space together with its Gram
// matrix. Immutable once built.
class FunctionalBasis {
 public:
  BasisKind kind() const { return kind_; }
  const DomainSpec& domain() const { return domain_; }
  int size() const { return static_cast<int>(gram_.rows()); }
  const Matrix& gram() const { return gram_; }

  // Per-axis spline factors; empty for the delta basis.
  const std::vector<BSplineAxis>& axes() const { return axes_; }

  // Delta basis only.
  const Sites& delta_sites() const { return delta_sites_; }
  double cell_measure() const { return cell_measure_; }

  // Design matrix: one row per site, one column per basis function.
  Matrix evaluate(const Sites& sites) const;

  // Same kind, domain, knots/degree and (for delta) sites.
  bool structurally_equal(const FunctionalBasis& other) const;

 private:
  friend BasisPtr make_bspline_basis(const DomainSpec&, int, int);
  friend BasisPtr make_tensor_basis(const DomainSpec&, std::pair<int, int>, int);
  friend BasisPtr make_delta_basis(const Sites&, const DomainSpec&);
  friend Matrix gram_matrix(const FunctionalBasis&);

  FunctionalBasis() = default;

  BasisKind kind_ = BasisKind::bspline;
  DomainSpec domain_ = DomainSpec::interval(0.0, 1.0);
  std::vector<BSplineAxis> axes_;
  Sites delta_sites_;
  double cell_measure_ = 0.0;
  Matrix gram_;
};

BasisPtr make_bspline_basis(const DomainSpec& domain, int df, int degree = 3);

// Index (i, j) of the product function nu_i(x) nu_j(y) maps to i * df_y + j,
// so the Gram matrix is gram_x (Kronecker) gram_y.
BasisPtr make_tensor_basis(const DomainSpec& domain, std::pair<int, int> df_per_axis,
                           int degree = 3);

// Point-mass basis on the given sites. The inner product is the dot product
// weighted by the uniform cell measure volume(domain) / number of sites.
BasisPtr make_delta_basis(const Sites& sites, const DomainSpec& domain);
BasisPtr make_delta_basis(const Sites& sites);

// Recomputes the Gram matrix of `basis` by quadrature (Kronecker of the axis
// Grams for tensor bases, scaled identity for delta bases).
Matrix gram_matrix(const FunctionalBasis& basis);

struct SampleGrid {
  Sites sites;    // n_sites x dim
  Matrix values;  // n_sites x N

  // Throws unless every site lies in `domain` and no site repeats.
  void validate(const DomainSpec& domain) const;
};

// Least-squares coefficients (size x N), one column per time point. Fails with
// projection_failure when the design matrix condition number exceeds 1e12.
Matrix project_samples(const SampleGrid& grid, const FunctionalBasis& basis);

inline constexpr double kMaxDesignCondition = 1e12;

}  // namespace mfssa
