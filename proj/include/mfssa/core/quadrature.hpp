#pragma once

#include <vector>

namespace mfssa {

// Gauss-Legendre nodes and weights on [-1, 1]; exact for polynomials of degree
// up to 2n - 1.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

// Integrates f over [a, b] with an n-point rule mapped onto the interval.
template <typename F>
double integrate(F&& f, double a, double b, int n) {
  const auto rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

}  // namespace mfssa
