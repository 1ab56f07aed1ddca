#pragma once

#include <utility>
#include <vector>

namespace fraclab::numerics {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule with m points, cached per m.  Thread-safe.
const GaussRule& gauss_legendre(int m);

/// Integrates f over [a, b] with `panels` equal panels of an m-point rule.
template <class F>
double integrate_panels(F&& f, double a, double b, int panels, int m = 16) {
  const GaussRule& rule = gauss_legendre(m);
  const double len = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * len;
    const double mid = lo + 0.5 * len;
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      s += rule.weights[q] * f(mid + 0.5 * len * rule.nodes[q]);
    }
    total += 0.5 * len * s;
  }
  return total;
}

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fraclab::numerics
