#include "fraclab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclab/constants.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

namespace {

using std::numbers::pi;
namespace bq = boost::math::quadrature;

constexpr double kRelTol = 1e-13;

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("heat kernel: t must be positive, got " + std::to_string(t));
  }
}

// A fresh rule per evaluation: the integrator remembers the level the previous
// call converged at and starts there, which makes results depend on call history.
bq::ooura_fourier_cos<double> cosine_rule() { return bq::ooura_fourier_cos<double>(kRelTol); }

bq::ooura_fourier_sin<double> sine_rule() { return bq::ooura_fourier_sin<double>(kRelTol); }

KernelValue finish(double value, double err) {
  KernelValue kv{value, err, true};
  kv.converged = std::isfinite(value) && value > 0.0 && err <= 1e-8 * std::abs(value) + 1e-300;
  return kv;
}

struct SeriesValue {
  double g1 = 0.0;      // G_1(y, 1)
  double dg1 = 0.0;     // d/dy G_1(y, 1)
  double residual = 0.0;  // size of the first omitted term relative to g1
};

// Large-y expansion of the one-dimensional kernel,
//   G_1(y, 1) = (1/pi) sum_k (-1)^{k+1} Gamma(alpha k + 1)/k! sin(pi alpha k/2) y^{-alpha k - 1},
// convergent for alpha < 1 and asymptotic for 1 < alpha < 2.  Summation stops
// when the envelope Gamma(alpha k + 1)/k! y^{-alpha k} drops below 1e-17 or
// starts to grow.
SeriesValue large_y_series(double alpha, double y) {
  SeriesValue sv;
  const double ly = std::log(y);
  double prev = INFINITY;
  for (int k = 1; k < 2000; ++k) {
    const double env = std::exp(std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0) - alpha * k * ly);
    if (env > prev) break;
    prev = env;
    const double c = (k % 2 ? 1.0 : -1.0) * std::sin(pi * alpha * k / 2.0) * env / (pi * y);
    sv.g1 += c;
    sv.dg1 -= (alpha * k + 1.0) * c / y;
    if (sv.g1 != 0.0 && env / (pi * y) < 1e-17 * std::abs(sv.g1)) break;
  }
  sv.residual = prev / (pi * y) / std::abs(sv.g1);
  return sv;
}

// y = |x| t^{-1/alpha} beyond which the expansion replaces the oscillatory integral
constexpr double kSeriesFrom = 20.0;

KernelValue invert_1d(double alpha, double r, double t) {
  const double scale = std::pow(t, -1.0 / alpha);
  if (r == 0.0) return {std::tgamma(1.0 + 1.0 / alpha) * scale / pi, 0.0, true};
  const double y = r * scale;
  if (y >= kSeriesFrom) {
    const SeriesValue sv = large_y_series(alpha, y);
    if (sv.residual < 1e-12) return finish(scale * sv.g1, scale * sv.g1 * sv.residual);
  }
  const auto f = [&](double k) { return std::exp(-t * std::pow(k, alpha)); };
  auto [v, err] = cosine_rule().integrate(f, r);
  return finish(v / pi, err / pi);
}

// Radial functions satisfy G_3(r) = -G_1'(r) / (2 pi r).
KernelValue invert_3d(double alpha, double r, double t) {
  const double norm = 1.0 / (2.0 * pi * pi);
  const double scale = std::pow(t, -1.0 / alpha);
  if (r == 0.0) {
    return {norm * std::tgamma(3.0 / alpha) / alpha * scale * scale * scale, 0.0, true};
  }
  const double y = r * scale;
  if (y >= kSeriesFrom) {
    const SeriesValue sv = large_y_series(alpha, y);
    const double v = -sv.dg1 / (2.0 * pi * y) * scale * scale * scale;
    if (sv.residual < 1e-12) return finish(v, v * sv.residual);
  }
  const auto f = [&](double k) { return k * std::exp(-t * std::pow(k, alpha)); };
  auto [v, err] = sine_rule().integrate(f, r);
  return finish(norm * v / r, norm * err / r);
}

KernelValue invert_2d(double alpha, double r, double t) {
  // e^{-t k^alpha} < e^{-50} past k_max
  const double kmax = std::pow(50.0 / t, 1.0 / alpha);
  const auto f = [&](double k) {
    return k * std::exp(-t * std::pow(k, alpha)) * std::cyl_bessel_j(0.0, k * r);
  };
  const double width = std::min(kmax / 64.0, r > 0.0 ? pi / r : kmax);
  constexpr long max_panels = 400000;
  const long panels = static_cast<long>(std::ceil(kmax / width));
  if (panels > max_panels) return {0.0, INFINITY, false};
  const double w = kmax / static_cast<double>(panels);
  // k^{1+alpha} is not smooth at 0, so the first panel gets tanh-sinh
  bq::tanh_sinh<double> ts;
  double v = ts.integrate(f, 0.0, w);
  const double coarse = v + numerics::integrate_panels(f, w, kmax, static_cast<int>(panels - 1), 8);
  v += numerics::integrate_panels(f, w, kmax, static_cast<int>(panels - 1), 16);
  return finish(v / (2.0 * pi), std::abs(v - coarse) / (2.0 * pi));
}

}  // namespace

KernelSpec make_kernel_spec(int n, double alpha) {
  if (n < 1 || n > 3) throw ConfigError("kernel: n must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("kernel: alpha must lie in (0, 2]");
  return {alpha, n};
}

KernelValue kernel_fourier_inversion(const KernelSpec& spec, double r, double t) {
  require_time(t);
  make_kernel_spec(spec.n, spec.alpha);
  r = std::abs(r);
  switch (spec.n) {
    case 1: return invert_1d(spec.alpha, r, t);
    case 2: return invert_2d(spec.alpha, r, t);
    default: return invert_3d(spec.alpha, r, t);
  }
}

KernelValue kernel_eval(const KernelSpec& spec, double r, double t) {
  require_time(t);
  make_kernel_spec(spec.n, spec.alpha);
  const double n = spec.n;
  if (spec.alpha == 1.0) {
    const double B = std::tgamma(0.5 * (n + 1.0)) / std::pow(pi, 0.5 * (n + 1.0));
    return {B * t / std::pow(t * t + r * r, 0.5 * (n + 1.0)), 0.0, true};
  }
  if (spec.alpha == 2.0) {
    return {std::pow(4.0 * pi * t, -0.5 * n) * std::exp(-r * r / (4.0 * t)), 0.0, true};
  }
  return kernel_fourier_inversion(spec, r, t);
}

KernelValue kernel_eval(const KernelSpec& spec, const std::array<double, 3>& x, double t) {
  double r2 = 0.0;
  for (int a = 0; a < spec.n; ++a) r2 += x[a] * x[a];
  return kernel_eval(spec, std::sqrt(r2), t);
}

double kernel_profile(const KernelSpec& spec, double r, double t) {
  require_time(t);
  const double y = r * std::pow(t, -1.0 / spec.alpha);
  return std::pow(t, -spec.n / spec.alpha) * std::pow(1.0 + y * y, -0.5 * (spec.n + spec.alpha));
}

double kernel_mass(const KernelSpec& spec, double t) {
  require_time(t);
  make_kernel_spec(spec.n, spec.alpha);
  const double scale = std::pow(t, 1.0 / spec.alpha);
  const double near = numerics::integrate_panels(
      [&](double r) { return std::pow(r, spec.n - 1) * kernel_eval(spec, r, t).value; }, 0.0, scale, 4);
  // r = scale e^u; r^n G decays like e^{-alpha u}, so u up to 40/alpha suffices
  const double u_max = 40.0 / spec.alpha + 5.0;
  const double far = numerics::integrate_panels(
      [&](double u) {
        const double r = scale * std::exp(u);
        return std::pow(r, spec.n) * kernel_eval(spec, r, t).value;
      },
      0.0, u_max, static_cast<int>(std::ceil(u_max / 0.25)));
  return unit_sphere_area(spec.n) * (near + far);
}

double kernel_grid_mass(const KernelSpec& spec, const GridSpec& grid, double t) {
  require_time(t);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += kernel_eval(spec, grid.radius(i), t).value;
  return s * grid.cell_volume();
}

Field semigroup_apply(const Field& u0, double t, double alpha) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("semigroup_apply: t must be nonnegative");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("semigroup_apply: alpha must lie in (0, 2]");
  if (t == 0.0) return u0;
  return apply_multiplier(u0, [&](double k) { return std::exp(-t * std::pow(k, alpha)); });
}

Field periodic_kernel(const GridSpec& grid, double alpha, double t) {
  require_time(t);
  const double X = grid.half_width();
  if (alpha == 1.0 && grid.dimension() == 1) {
    const double a = pi * t / X;
    return Field::sample(grid, [&](const auto& p) {
      return std::sinh(a) / (2.0 * X * (std::cosh(a) - std::cos(pi * p[0] / X)));
    });
  }
  if (alpha == 2.0) {
    // product of one-dimensional Gaussian image sums
    const auto images = [&](double x) {
      double s = 0.0;
      for (int m = 0;; ++m) {
        const double e1 = (x + 2.0 * X * m) * (x + 2.0 * X * m) / (4.0 * t);
        const double e2 = (x - 2.0 * X * m) * (x - 2.0 * X * m) / (4.0 * t);
        const double term = std::exp(-e1) + (m > 0 ? std::exp(-e2) : 0.0);
        s += term;
        if (m > 0 && std::min(e1, e2) > 745.0) break;
      }
      return s / std::sqrt(4.0 * pi * t);
    };
    return Field::sample(grid, [&](const auto& p) {
      double v = 1.0;
      for (int ax = 0; ax < grid.dimension(); ++ax) v *= images(p[ax]);
      return v;
    });
  }
  return semigroup_apply(discrete_delta(grid), t, alpha);
}

SemigroupCheck check_semigroup(const GridSpec& grid, double alpha, double t, double s) {
  require_time(t);
  require_time(s);
  SemigroupCheck out;
  const Field u0 = Field::sample_radial(grid, [](double r) { return std::exp(-r * r); });
  out.spectral_error = max_abs_difference(semigroup_apply(semigroup_apply(u0, t, alpha), s, alpha),
                                          semigroup_apply(u0, t + s, alpha));

  const Field pt = periodic_kernel(grid, alpha, t);
  const Field ps = periodic_kernel(grid, alpha, s);
  const Field pts = periodic_kernel(grid, alpha, t + s);
  Field conv;
  if (grid.dimension() == 1) {
    conv = Field(grid, kernels::omp::circular_convolution(pt.values(), ps.values(), grid.spacing()));
  } else {
    conv = convolve(pt, ps);
  }
  out.convolution_error = max_abs_difference(conv, pts);
  return out;
}

TailEstimate estimate_tail_constant(const KernelSpec& spec, double r_lo, double r_hi, int samples) {
  make_kernel_spec(spec.n, spec.alpha);
  if (spec.alpha >= 2.0) throw DomainError("tail constant: the Gaussian kernel has no power tail");
  if (!(r_lo > 0.0 && r_hi > r_lo) || samples < 2) {
    throw ConfigError("tail constant: need 0 < r_lo < r_hi and at least two samples");
  }
  TailEstimate est;
  for (int i = 0; i < samples; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (samples - 1));
    const KernelValue kv = kernel_eval(spec, r, 1.0);
    est.converged = est.converged && kv.converged;
    est.radii.push_back(r);
    est.scaled_values.push_back(std::pow(r, spec.n + spec.alpha) * kv.value);
  }
  double sum = 0.0;
  for (double v : est.scaled_values) sum += v;
  est.constant = sum / samples;
  // c + d r^{-alpha}: the leading correction of the large-|x| expansion
  std::vector<double> z;
  for (double r : est.radii) z.push_back(std::pow(r, -spec.alpha));
  est.extrapolated_constant = numerics::linear_fit(z, est.scaled_values).second;
  for (double v : est.scaled_values) {
    est.plateau_quality = std::max(est.plateau_quality, std::abs(v / est.constant - 1.0));
  }
  if (!(est.constant > 0.0) || est.plateau_quality > 0.2) est.converged = false;
  return est;
}

TailEstimate estimate_tail_constant(const KernelSpec& spec) {
  return estimate_tail_constant(spec, 20.0, 800.0);
}

BoundEstimate check_two_sided_bound(const KernelSpec& spec, std::span<const BoundSample> samples) {
  if (samples.empty()) throw ConfigError("two-sided bound: empty sample set");
  BoundEstimate b{1.0, INFINITY, 0.0};
  for (const auto& s : samples) {
    const double ratio = kernel_eval(spec, s.r, s.t).value / kernel_profile(spec, s.r, s.t);
    if (!std::isfinite(ratio) || !(ratio > 0.0)) {
      throw NumericError("two-sided bound: non-finite ratio at r=" + std::to_string(s.r) +
                         " t=" + std::to_string(s.t));
    }
    b.min_ratio = std::min(b.min_ratio, ratio);
    b.max_ratio = std::max(b.max_ratio, ratio);
  }
  b.empirical_B = std::max(b.max_ratio, 1.0 / b.min_ratio);
  return b;
}

MassProbe asymptotic_mass_probe(const Field& v, std::span<const double> times, double alpha) {
  if (v.min() < 0.0) throw PreconditionError("mass probe: v must be nonnegative");
  MassProbe probe;
  const GridSpec& g = v.grid();
  FourierPlan plan(g);
  double prev = 0.0;
  for (double t : times) {
    require_time(t);
    if (t <= prev) throw ConfigError("mass probe: times must increase");
    prev = t;
    if (std::pow(t, 1.0 / alpha) > 0.25 * g.half_width()) probe.truncation_flag = true;
    const auto table =
        tabulate_multiplier(plan, [&](double k) { return std::exp(-t * std::pow(k, alpha)); });
    const Field w = apply_multiplier(plan, v, table);
    probe.times.push_back(t);
    probe.values.push_back(std::pow(t, g.dimension() / alpha) * w.max());
  }
  return probe;
}

}  // namespace fraclab
