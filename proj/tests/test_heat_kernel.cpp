#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/heat_kernel.hpp"
#include "fraclab/kernels.hpp"

using namespace fraclab;
using std::numbers::pi;

namespace {

// Convergent series in x^{-1} for alpha < 1:
// G(x,1) = (1/pi) sum_k (-1)^{k+1} Gamma(alpha k + 1) / k! sin(pi alpha k / 2) x^{-alpha k - 1}.
double large_x_series(double alpha, double x) {
  double s = 0.0;
  for (int k = 1; k < 80; ++k) {
    const double lg = std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0);
    s += (k % 2 ? 1.0 : -1.0) * std::exp(lg) * std::sin(pi * alpha * k / 2.0) *
         std::pow(x, -alpha * k - 1.0);
  }
  return s / pi;
}

// Convergent series in x^2 for alpha > 1:
// G(x,1) = (1/(pi alpha)) sum_k (-1)^k Gamma((2k+1)/alpha) / (2k)! x^{2k}.
double small_x_series(double alpha, double x) {
  double s = 0.0;
  for (int k = 0; k < 80; ++k) {
    const double lg = std::lgamma((2.0 * k + 1.0) / alpha) - std::lgamma(2.0 * k + 1.0);
    s += (k % 2 ? -1.0 : 1.0) * std::exp(lg) * std::pow(x, 2.0 * k);
  }
  return s / (pi * alpha);
}

// Composite Simpson rule for (1/pi) int_0^K e^{-k^alpha} cos(kx) dk.
double simpson_oracle(double alpha, double x, double K, int nodes) {
  const double h = K / nodes;
  double s = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double k = i * h;
    const double w = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(-std::pow(k, alpha)) * std::cos(k * x);
  }
  return s * h / 3.0 / pi;
}

}  // namespace

TEST_CASE("closed forms at the origin") {
  CHECK(kernel_eval(make_kernel_spec(1, 1.0), 0.0, 1.0).value == doctest::Approx(1.0 / pi).epsilon(1e-15));
  CHECK(kernel_eval(make_kernel_spec(1, 1.0), 0.0, 1.0).value == doctest::Approx(0.31831).epsilon(1e-5));
  CHECK(kernel_eval(make_kernel_spec(1, 2.0), 0.0, 1.0).value ==
        doctest::Approx(0.28209).epsilon(1e-5));
  // independent Simpson oracle for the Gaussian transform
  CHECK(kernel_fourier_inversion(make_kernel_spec(1, 2.0), 0.0, 1.0).value ==
        doctest::Approx(simpson_oracle(2.0, 0.0, 12.0, 20000)).epsilon(1e-12));
}

TEST_CASE("alpha = 1.5 against a million-node Simpson oracle") {
  const auto spec = make_kernel_spec(1, 1.5);
  for (double x : {0.0, 0.7, 2.5}) {
    // e^{-k^1.5} < 1e-30 beyond k = 40
    const double oracle = simpson_oracle(1.5, x, 40.0, 1000000);
    CHECK(std::abs(kernel_eval(spec, x, 1.0).value - oracle) < 1e-8 * oracle);
    CHECK(kernel_eval(spec, x, 1.0).value == doctest::Approx(small_x_series(1.5, x)).epsilon(1e-11));
  }
}

TEST_CASE("large-x expansion and oscillatory quadrature cross-check") {
  // below |x| = 20 the library integrates; compare with the test-side series
  const auto spec = make_kernel_spec(1, 0.5);
  for (double x : {5.0, 10.0, 19.0}) {
    CHECK(kernel_eval(spec, x, 1.0).value == doctest::Approx(large_x_series(0.5, x)).epsilon(1e-10));
  }
  // beyond it the library sums the expansion; compare with direct quadrature
  boost::math::quadrature::ooura_fourier_cos<double> rule(1e-13);
  for (double alpha : {0.5, 0.9, 1.5}) {
    for (double x : {20.0, 50.0, 100.0, 200.0, 600.0}) {
      const auto kv = kernel_eval(make_kernel_spec(1, alpha), x, 1.0);
      const auto [v, err] = rule.integrate([&](double k) { return std::exp(-std::pow(k, alpha)); }, x);
      CAPTURE(alpha);
      CAPTURE(x);
      CHECK(kv.converged);
      CHECK(std::abs(kv.value - v / pi) <= std::max(1e-9 * kv.value, 2.0 * err / pi));
    }
  }
}

TEST_CASE("Fourier inversion reproduces the Poisson kernel") {
  for (int n : {1, 3}) {
    const auto spec = make_kernel_spec(n, 1.0);
    for (double t : {0.1, 1.0, 10.0}) {
      for (double r : {0.0, 0.05, 0.5, 1.0, 3.0, 10.0, 40.0}) {
        const double closed = kernel_eval(spec, r, t).value;
        const double inv = kernel_fourier_inversion(spec, r, t).value;
        CHECK(std::abs(inv - closed) <= 1e-10 * closed);
      }
    }
  }
  // the panel J0 route in two dimensions is less accurate
  const auto spec2 = make_kernel_spec(2, 1.0);
  for (double r : {0.0, 0.5, 2.0, 8.0}) {
    const double closed = kernel_eval(spec2, r, 1.0).value;
    CHECK(std::abs(kernel_fourier_inversion(spec2, r, 1.0).value - closed) <= 1e-8 * closed);
  }
  const auto gauss3 = make_kernel_spec(3, 2.0);
  for (double r : {0.0, 1.0, 3.0}) {
    const double closed = kernel_eval(gauss3, r, 1.0).value;
    CHECK(kernel_fourier_inversion(gauss3, r, 1.0).value == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(kernel_eval(make_kernel_spec(1, 1.0), 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(kernel_eval(make_kernel_spec(1, 0.5), 1.0, -1.0), DomainError);
  CHECK_THROWS_AS(make_kernel_spec(4, 1.0), ConfigError);
  CHECK_THROWS_AS(make_kernel_spec(1, 2.5), ConfigError);
  CHECK_THROWS_AS(estimate_tail_constant(make_kernel_spec(1, 2.0)), DomainError);
  const auto g = make_grid(1, 8.0, 64);
  CHECK_THROWS_AS(semigroup_apply(Field(g), -1.0, 1.0), DomainError);
}

TEST_CASE("positivity, radial monotonicity and scaling") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    const auto spec = make_kernel_spec(1, alpha);
    for (double t : {0.1, 1.0, 10.0}) {
      double prev = INFINITY;
      for (double r = 0.0; r <= 60.0; r += 0.37) {
        const double v = kernel_eval(spec, r, t).value;
        if (alpha < 2.0) CHECK(v > 0.0);
        CHECK(v <= prev);
        prev = v;
        // G(x, t) = t^{-n/alpha} G(t^{-1/alpha} x, 1)
        const double scaled = std::pow(t, -1.0 / alpha) * kernel_eval(spec, r * std::pow(t, -1.0 / alpha), 1.0).value;
        if (v > 1e-280) CHECK(std::abs(v - scaled) <= 1e-8 * v);
      }
    }
  }
}

TEST_CASE("unit mass") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    for (double t : {0.1, 1.0, 10.0}) {
      CAPTURE(alpha);
      CAPTURE(t);
      CHECK(std::abs(kernel_mass(make_kernel_spec(1, alpha), t) - 1.0) < 1e-6);
    }
  }
  CHECK(std::abs(kernel_mass(make_kernel_spec(3, 1.0), 1.0) - 1.0) < 1e-6);
}

TEST_CASE("semigroup: multiplier and physical-space convolution") {
  const auto g = make_grid(1, 40.0, 4096);
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    for (double t : {0.1, 1.0, 10.0}) {
      const auto chk = check_semigroup(g, alpha, t, t);
      CAPTURE(alpha);
      CAPTURE(t);
      CHECK(chk.spectral_error < 1e-12);
      CHECK(chk.convolution_error < 1e-6);
    }
  }
  // closed-form periodic Poisson kernel against its truncated Fourier series
  const auto coarse = make_grid(1, 10.0, 256);
  const Field closed = periodic_kernel(coarse, 1.0, 2.0);
  const Field series = semigroup_apply(discrete_delta(coarse), 2.0, 1.0);
  CHECK(max_abs_difference(closed, series) < 1e-12);

  const Field u = Field::sample_radial(g, [](double r) { return std::exp(-r * r); });
  CHECK(max_abs_difference(semigroup_apply(u, 0.0, 0.5), u) == 0.0);
  const Field w = semigroup_apply(u, 1.0, 0.5);
  CHECK(w.min() > 0.0);
  CHECK(w.mean() == doctest::Approx(u.mean()).epsilon(1e-12));
}

TEST_CASE("tail constant") {
  const auto poisson = estimate_tail_constant(make_kernel_spec(1, 1.0), 20.0, 100.0);
  CHECK(poisson.constant == doctest::Approx(1.0 / pi).epsilon(0.02));
  CHECK(poisson.plateau_quality < 0.05);
  CHECK(poisson.converged);

  const auto half = estimate_tail_constant(make_kernel_spec(1, 0.5), 50.0, 200.0);
  CHECK(half.constant > 0.0);
  CHECK(half.plateau_quality < 0.05);
  // leading series coefficient Gamma(1 + alpha) sin(pi alpha / 2) / pi
  const double leading = std::tgamma(1.5) * std::sin(pi / 4.0) / pi;
  CHECK(half.extrapolated_constant == doctest::Approx(leading).epsilon(0.01));

  const auto three_half = estimate_tail_constant(make_kernel_spec(1, 1.5), 20.0, 200.0);
  CHECK(three_half.plateau_quality < 0.05);
  CHECK(three_half.extrapolated_constant ==
        doctest::Approx(std::tgamma(2.5) * std::sin(0.75 * pi) / pi).epsilon(0.01));
}

TEST_CASE("two-sided bound") {
  const auto poisson = make_kernel_spec(1, 1.0);
  std::vector<BoundSample> s;
  for (double t : {0.1, 1.0, 10.0}) {
    for (double r = 0.0; r < 100.0; r += 1.3) s.push_back({r, t});
  }
  // G_1 / profile = 1/pi identically
  const auto b = check_two_sided_bound(poisson, s);
  CHECK(b.empirical_B == doctest::Approx(pi).epsilon(1e-13));
  CHECK(b.min_ratio == doctest::Approx(1.0 / pi).epsilon(1e-13));

  for (double alpha : {0.5, 1.5}) {
    const auto spec = make_kernel_spec(1, alpha);
    std::vector<BoundSample> at_t, at_4t;
    for (double y = 0.0; y < 50.0; y += 0.7) {
      at_t.push_back({y, 1.0});
      at_4t.push_back({y * std::pow(4.0, 1.0 / alpha), 4.0});
    }
    const double b1 = check_two_sided_bound(spec, at_t).empirical_B;
    const double b4 = check_two_sided_bound(spec, at_4t).empirical_B;
    CHECK(std::abs(b1 - b4) <= 1e-10 * b1);
  }

  std::vector<BoundSample> sweep;
  for (double t : {0.5, 1.0, 2.0}) {
    for (double r = 0.0; r <= 100.0; r += 0.5) sweep.push_back({r, t});
  }
  const auto half = check_two_sided_bound(make_kernel_spec(1, 0.5), sweep);
  CHECK(half.empirical_B >= 1.0);
  CHECK(half.empirical_B < 10.0);
}

TEST_CASE("asymptotic mass probe") {
  const auto g = make_grid(1, 512.0, 8192);
  const Field bump = Field::sample_radial(g, [](double r) { return std::exp(-r * r) / std::sqrt(pi); });
  const std::vector<double> times{1, 2, 4, 8, 16, 32, 64};
  const auto probe = asymptotic_mass_probe(bump, times, 1.0);
  CHECK_FALSE(probe.truncation_flag);
  for (std::size_t i = 1; i < probe.values.size(); ++i) CHECK(probe.values[i] >= probe.values[i - 1]);
  CHECK(probe.values.back() == doctest::Approx(1.0 / pi).epsilon(0.05));

  const Field two = Field::sample(g, [](const auto& p) {
    return 0.5 * (std::exp(-(p[0] - 3) * (p[0] - 3)) + std::exp(-(p[0] + 3) * (p[0] + 3))) / std::sqrt(pi);
  });
  const auto probe2 = asymptotic_mass_probe(two, times, 1.0);
  CHECK(probe2.values.back() == doctest::Approx(probe.values.back()).epsilon(0.05));

  const auto zero = asymptotic_mass_probe(Field(g), times, 1.0);
  for (double v : zero.values) CHECK(v == 0.0);

  const std::vector<double> far{100.0, 200.0};
  CHECK(asymptotic_mass_probe(bump, far, 1.0).truncation_flag);
}

TEST_CASE("serial and OpenMP circular convolution agree") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> a(512), b(512);
  for (auto& v : a) v = d(rng);
  for (auto& v : b) v = d(rng);
  const auto s = kernels::serial::circular_convolution(a, b, 0.1);
  const auto o = kernels::omp::circular_convolution(a, b, 0.1);
  CHECK(s == o);
}

TEST_CASE("inversion does not depend on earlier evaluations") {
  for (int n : {1, 3}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const KernelSpec spec = make_kernel_spec(n, alpha);
      const double before = kernel_fourier_inversion(spec, 0.5, 1.0).value;
      for (double t : {1e-3, 0.01, 0.1, 10.0, 100.0})
        for (double r : {1e-3, 0.05, 0.5, 5.0, 50.0}) (void)kernel_fourier_inversion(spec, r, t);
      CHECK(kernel_fourier_inversion(spec, 0.5, 1.0).value == before);
    }
  }
}
