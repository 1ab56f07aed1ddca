#include "fraclab/fractional_laplacian.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

Field frac_laplacian_spectral(const Field& u, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ConfigError("spectral fractional Laplacian needs alpha in (0,2], got " +
                      std::to_string(alpha));
  }
  return apply_multiplier(u, [alpha](double r) { return std::pow(r, alpha); });
}

namespace {

struct Direction {
  std::array<double, 3> omega;
  double weight;
};

// Quadrature over the whole unit sphere S^{n-1}; weights sum to its area.
std::vector<Direction> sphere_rule(int n, int m) {
  std::vector<Direction> dirs;
  if (n == 1) {
    dirs.push_back({{1.0, 0.0, 0.0}, 1.0});
    dirs.push_back({{-1.0, 0.0, 0.0}, 1.0});
  } else if (n == 2) {
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * M_PI * k / m;
      dirs.push_back({{std::cos(th), std::sin(th), 0.0}, 2.0 * M_PI / m});
    }
  } else {
    const auto& rule = numerics::gauss_legendre(m);
    const int az = 2 * m;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double mu = rule.nodes[i];
      const double s = std::sqrt(1.0 - mu * mu);
      for (int k = 0; k < az; ++k) {
        const double ph = 2.0 * M_PI * k / az;
        dirs.push_back({{s * std::cos(ph), s * std::sin(ph), mu}, rule.weights[i] * 2.0 * M_PI / az});
      }
    }
  }
  return dirs;
}

}  // namespace

QuadratureResult frac_laplacian_quadrature(const PointFunction& u, const std::array<double, 3>& x,
                                           int n, double alpha, const QuadratureOptions& opt) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw ConfigError("quadrature fractional Laplacian needs alpha in (0,2), got " +
                      std::to_string(alpha));
  }
  if (n < 1 || n > 3) throw ConfigError("dimension must be 1, 2 or 3");
  if (!(opt.cutoff > 0.0) || opt.inner_panels < 1 || opt.outer_panels < 1) {
    throw ConfigError("quadrature options must be positive");
  }
  const double C = operator_constant(n, alpha);
  const double ux = u(x);
  const auto dirs = sphere_rule(n, opt.angular_nodes);

  auto second_difference = [&](double r) {
    double acc = 0.0;
    for (const auto& d : dirs) {
      std::array<double, 3> xp = x, xm = x;
      for (int a = 0; a < n; ++a) {
        xp[a] += r * d.omega[a];
        xm[a] -= r * d.omega[a];
      }
      acc += d.weight * (2.0 * ux - u(xp) - u(xm));
    }
    return acc * std::pow(r, -1.0 - alpha);
  };

  const double r0 = std::min(opt.inner_radius, opt.cutoff);
  double integral = 0.0;
  double hi = r0;
  for (int m = 0; m < opt.inner_panels; ++m) {
    const double lo = 0.5 * hi;
    integral += numerics::integrate_panels(second_difference, lo, hi, 1);
    hi = lo;
  }
  // Innermost cell: the second difference behaves like -u''(x) r^2 there, so
  // integrate c r^{1-alpha} with c read off at the cell edge.
  integral += second_difference(hi) * std::pow(hi, 1.0 + alpha) * std::pow(hi, -alpha) /
              (2.0 - alpha);
  if (opt.cutoff > r0) {
    integral += numerics::integrate_panels(second_difference, r0, opt.cutoff, opt.outer_panels);
  }

  // Beyond the cutoff u(x +- z) is replaced by its mean over the shell
  // [cutoff, 2 cutoff]: zero for decaying data, exact for constants.
  constexpr int shell_samples = 64;
  double far_mean = 0.0, far_weight = 0.0;
  for (const auto& d : dirs) {
    for (int s = 0; s < shell_samples; ++s) {
      const double r = opt.cutoff * (1.0 + (s + 0.5) / shell_samples);
      std::array<double, 3> xp = x;
      for (int a = 0; a < n; ++a) xp[a] += r * d.omega[a];
      far_mean += d.weight * u(xp);
      far_weight += d.weight;
    }
  }
  far_mean /= far_weight;
  const double tail =
      unit_sphere_area(n) * 2.0 * (ux - far_mean) * std::pow(opt.cutoff, -alpha) / alpha;

  QuadratureResult res;
  res.value = 0.5 * C * (integral + tail);
  res.cutoff_warning = opt.cutoff < 4.0 * opt.support_scale;
  if (!std::isfinite(res.value)) throw NumericError("quadrature produced a non-finite value");
  return res;
}

}  // namespace fraclab
