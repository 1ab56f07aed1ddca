#include "fraclab/constants.hpp"

#include <cmath>
#include <string>

#include "fraclab/errors.hpp"

namespace fraclab {

double operator_constant(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw ConfigError("operator constant needs alpha in (0,2), got " + std::to_string(alpha));
  }
  return std::pow(2.0, alpha) * std::tgamma(0.5 * (n + alpha)) /
         (std::pow(M_PI, 0.5 * n) * std::abs(std::tgamma(-0.5 * alpha)));
}

double riesz_constant(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < n)) {
    throw DomainError("Riesz constant needs 0 < alpha < n, got alpha=" + std::to_string(alpha) +
                      " n=" + std::to_string(n));
  }
  return std::tgamma(0.5 * (n - alpha)) /
         (std::pow(2.0, alpha) * std::pow(M_PI, 0.5 * n) * std::tgamma(0.5 * alpha));
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

Constants make_constants(int n, double alpha) {
  if (n < 1 || n > 3) throw ConfigError("dimension must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0,2]");
  Constants c;
  c.alpha = alpha;
  c.n = n;
  if (alpha < 2.0) c.operator_constant = operator_constant(n, alpha);
  if (alpha < n) c.riesz_constant = riesz_constant(n, alpha);
  return c;
}

}  // namespace fraclab
