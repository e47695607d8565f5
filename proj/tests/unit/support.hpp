#pragma once

#include <functional>
#include <random>

#include <doctest.h>

#include "mfssa/core/basis.hpp"
#include "mfssa/core/error.hpp"
#include "mfssa/core/mfts.hpp"

namespace testing {

using namespace mfssa;

// Error class thrown by `f`, or nullopt when it returns normally.
inline std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Sites grid_1d(int n, double lo = 0.0, double hi = 1.0) {
  Sites s(n, 1);
  for (int i = 0; i < n; ++i) s(i, 0) = lo + (hi - lo) * i / (n - 1);
  return s;
}

inline Sites grid_2d(int nx, int ny) {
  Sites s(nx * ny, 2);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      s(i * ny + j, 0) = static_cast<double>(i) / (nx - 1);
      s(i * ny + j, 1) = static_cast<double>(j) / (ny - 1);
    }
  }
  return s;
}

// Small basis of a random kind: cubic/quadratic B-spline, tensor spline, or
// delta basis on a few sites.
inline BasisPtr random_basis(std::mt19937_64& rng, int max_size, bool allow_2d = true) {
  const int kind = uniform_int(rng, 0, allow_2d ? 2 : 1);
  if (kind == 0) {
    const int degree = uniform_int(rng, 0, 3);
    const int df = uniform_int(rng, degree + 1, std::max(degree + 1, max_size));
    return make_bspline_basis(DomainSpec::interval(0.0, 1.0), df, degree);
  }
  if (kind == 1) {
    const int n = uniform_int(rng, 1, max_size);
    return make_delta_basis(grid_1d(std::max(n, 2), 0.0, 1.0).topRows(n));
  }
  const int dx = uniform_int(rng, 1, std::max(1, max_size / 2));
  const int dy = std::max(1, std::min(2, max_size / dx));
  const int degree = std::min(dx, dy) - 1;
  return make_tensor_basis(DomainSpec::rectangle({0.0, 1.0}, {0.0, 2.0}), {dx, dy}, degree);
}

// MFTS with random bases and Gaussian coefficients.
inline MFTS random_mfts(std::mt19937_64& rng, int p, int N, int max_size, bool allow_2d = true) {
  std::vector<FunctionalVariable> vars;
  for (int j = 0; j < p; ++j) {
    auto basis = random_basis(rng, max_size, allow_2d);
    vars.push_back({"x" + std::to_string(j), basis, random_matrix(rng, basis->size(), N), std::nullopt});
  }
  return MFTS(std::move(vars));
}

inline MFTS single_variable(BasisPtr basis, Matrix coefs, const std::string& name = "y") {
  return MFTS({FunctionalVariable{name, std::move(basis), std::move(coefs), std::nullopt}});
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

}  // namespace testing
