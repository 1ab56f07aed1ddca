#include <doctest.h>

#include <cmath>
#include <random>

#include "fraclab/constants.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/fractional_laplacian.hpp"
#include "fraclab/grid.hpp"

using namespace fraclab;

namespace {

Field gaussian(const GridSpec& g, double sigma = 1.0) {
  return Field::sample_radial(g, [sigma](double r) { return std::exp(-0.5 * r * r / (sigma * sigma)); });
}

double rel_linf_on(const Field& a, const Field& ref, double radius) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.grid().radius(i) > radius) continue;
    num = std::max(num, std::abs(a[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  return num / den;
}

}  // namespace

TEST_CASE("make_grid validates and derives spacing") {
  const auto g = make_grid(1, 20.0, 1024);
  CHECK(g.spacing() == 0.0390625);
  CHECK(g.coordinate(512) == 0.0);
  CHECK(make_grid(2, 10.0, 128).size() == 16384u);
  CHECK_THROWS_AS(make_grid(1, 20.0, 1000), ConfigError);
  CHECK_THROWS_AS(make_grid(1, -1.0, 64), ConfigError);
  CHECK_THROWS_AS(make_grid(4, 1.0, 64), ConfigError);
  CHECK_THROWS_AS(make_grid(1, 1.0, 4), ConfigError);
  // xi_j = pi j / X with j in {-N/2, ..., N/2 - 1}
  CHECK(g.frequency(1) == doctest::Approx(M_PI / 20.0));
  CHECK(g.frequency(512) == doctest::Approx(-512 * M_PI / 20.0));
  CHECK(g.frequency(1023) == doctest::Approx(-M_PI / 20.0));
}

TEST_CASE("Field rejects non-finite samples and size mismatches") {
  const auto g = make_grid(1, 1.0, 8);
  CHECK_THROWS_AS(Field(g, std::vector<double>(7, 0.0)), ConfigError);
  std::vector<double> v(8, 0.0);
  v[3] = NAN;
  CHECK_THROWS_AS(Field(g, v), NumericError);
}

TEST_CASE("normalization constants") {
  CHECK(operator_constant(1, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
  CHECK(riesz_constant(1, 0.5) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  // n = 3, alpha = 2: Newtonian potential 1 / (4 pi |x|)
  CHECK(riesz_constant(3, 2.0) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-14));
  CHECK_THROWS_AS(riesz_constant(1, 1.0), DomainError);
  CHECK_THROWS_AS(operator_constant(1, 2.0), ConfigError);
  const auto c = make_constants(1, 2.0);
  CHECK(c.operator_constant == 0.0);
  CHECK(c.riesz_constant == 0.0);
}

TEST_CASE("multiplier on eigenfunctions, identity and constants") {
  const auto g = make_grid(1, 20.0, 1024);
  const double k = 3.0 * M_PI / 20.0;
  const auto u = Field::sample(g, [k](const auto& x) { return std::cos(k * x[0]); });

  const auto same = apply_multiplier(u, [](double) { return 1.0; });
  CHECK(max_abs_difference(same, u) < 1e-13);

  const auto c = Field(g, std::vector<double>(g.size(), 2.5));
  CHECK(frac_laplacian_spectral(c, 0.7).sup_norm() < 1e-13);

  CHECK_THROWS_AS(apply_multiplier(u, [](double r) { return 1.0 / r; }), NumericError);
  CHECK_THROWS_AS(frac_laplacian_spectral(u, 2.5), ConfigError);
  CHECK_THROWS_AS(frac_laplacian_spectral(u, 0.0), ConfigError);
}

TEST_CASE("symbol consistency on every compatible wavenumber") {
  for (int n : {1, 2}) {
    const auto g = make_grid(n, 10.0, n == 1 ? 256 : 32);
    for (int j : {1, 2, 5, 11}) {
      const double k = M_PI * j / 10.0;
      const auto u = Field::sample(g, [k](const auto& x) { return std::cos(k * x[0]); });
      for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
        const auto Lu = frac_laplacian_spectral(u, alpha);
        const auto expect = u.scaled(std::pow(k, alpha));
        CHECK(max_abs_difference(Lu, expect) / expect.sup_norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("round trip and linearity on random fields") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const auto g = make_grid(n, 1.0 + trial, n == 3 ? 16 : 64);
    std::vector<double> a(g.size()), b(g.size());
    for (auto& x : a) x = unif(rng) * 100.0;
    for (auto& x : b) x = unif(rng);
    const Field u(g, a), v(g, b);
    FourierPlan plan(g);
    std::vector<std::complex<double>> spec;
    plan.forward(u.values(), spec);
    std::vector<double> back;
    plan.inverse(spec, back);
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) err = std::max(err, std::abs(back[i] - a[i]));
    CHECK(err < 1e-12 * 100.0);

    const double s = unif(rng), t = unif(rng);
    auto m = [](double r) { return std::exp(-r) + r; };
    const auto lhs = apply_multiplier(u.scaled(s).plus(v, t), m);
    const auto rhs = apply_multiplier(u, m).scaled(s).plus(apply_multiplier(v, m), t);
    CHECK(max_abs_difference(lhs, rhs) < 1e-10 * (1.0 + lhs.sup_norm()));
  }
}

TEST_CASE("alpha = 2 matches the centered-difference Laplacian to second order") {
  // Centered differences of a smooth field converge at O(h^2): halving h
  // divides the error by about four.
  double previous = 0.0;
  for (std::size_t N : {128u, 256u, 512u}) {
    const auto g = make_grid(1, 10.0, N);
    const auto u = gaussian(g, 0.5);
    const auto Lu = frac_laplacian_spectral(u, 2.0);
    const double h = g.spacing();
    double err = 0.0;
    for (std::size_t i = N / 4; i < 3 * N / 4; ++i) {
      const double fd = -(u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
      err = std::max(err, std::abs(fd - Lu[i]));
    }
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}

TEST_CASE("quadrature operator: constants and plane waves") {
  const PointFunction one = [](const auto&) { return 1.0; };
  QuadratureOptions opt;
  opt.cutoff = 10.0;
  CHECK(std::abs(frac_laplacian_quadrature(one, {0.3, 0, 0}, 1, 0.8, opt).value) < 1e-12);

  // The cutoff is a whole number of periods, so the leading oscillatory tail
  // term sin(k cutoff) vanishes.
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double k = 1.3;
    const PointFunction wave = [k](const auto& x) { return std::cos(k * x[0]); };
    QuadratureOptions w;
    w.cutoff = 2.0 * M_PI / k * 80.0;
    w.outer_panels = 2000;
    w.support_scale = 1e9;
    const double x0 = 0.4;
    const auto r = frac_laplacian_quadrature(wave, {x0, 0, 0}, 1, alpha, w);
    CHECK(r.value == doctest::Approx(std::pow(k, alpha) * std::cos(k * x0)).epsilon(1e-4));
    CHECK(r.cutoff_warning);
  }
  CHECK_THROWS_AS(frac_laplacian_quadrature(one, {0, 0, 0}, 1, 2.0), ConfigError);
}

TEST_CASE("quadrature operator agrees with the spectral one on Gaussians") {
  // Periodic images shift the spectral result by about zeta(1+alpha) (2X)^{-1-alpha},
  // nearly uniformly; X = 512 keeps that shift near 1e-4 for alpha = 0.5.
  const auto g = make_grid(1, 512.0, 65536);
  const auto u = gaussian(g);
  const PointFunction uf = [](const auto& x) { return std::exp(-0.5 * x[0] * x[0]); };
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto spectral = frac_laplacian_spectral(u, alpha);
    QuadratureOptions opt;
    opt.cutoff = 400.0;
    opt.outer_panels = 800;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 389) {
      const double x = g.coordinate(i);
      if (std::abs(x) > 64.0) continue;
      const double q = frac_laplacian_quadrature(uf, {x, 0, 0}, 1, alpha, opt).value;
      num = std::max(num, std::abs(q - spectral[i]));
      den = std::max(den, std::abs(spectral[i]));
    }
    const double at0 = frac_laplacian_quadrature(uf, {0, 0, 0}, 1, alpha, opt).value;
    CHECK(std::abs(at0 - spectral[g.origin_index()]) / std::abs(at0) < 1e-3);
    CHECK(num / den < 1e-3);
  }
}

TEST_CASE("quadrature operator in two dimensions") {
  const auto g = make_grid(2, 24.0, 256);
  const auto u = gaussian(g);
  const auto spectral = frac_laplacian_spectral(u, 1.0);
  const PointFunction uf = [](const auto& x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])); };
  QuadratureOptions opt;
  opt.cutoff = 12.0;
  opt.outer_panels = 40;
  opt.angular_nodes = 24;
  const auto at0 = frac_laplacian_quadrature(uf, {0, 0, 0}, 2, 1.0, opt);
  // (-Delta)^{1/2} of exp(-|x|^2/2) at 0 in 2D is sqrt(pi/2)
  CHECK(at0.value == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-3));
  CHECK(spectral[g.origin_index()] == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(5e-3));
}

TEST_CASE("convolution: identity element, mass and Gaussian closure") {
  const auto g = make_grid(1, 20.0, 1024);
  const auto u = gaussian(g, 0.7);
  CHECK(max_abs_difference(convolve(u, discrete_delta(g)), u) < 1e-13);

  auto normal = [&](double var) {
    return Field::sample_radial(g, [var](double r) {
      return std::exp(-0.5 * r * r / var) / std::sqrt(2.0 * M_PI * var);
    });
  };
  const auto c = convolve(normal(1.0), normal(2.0));
  CHECK(std::abs(c.integral() - 1.0) < 1e-8);
  CHECK(max_abs_difference(c, normal(3.0)) < 1e-12);

  const auto other = make_grid(1, 10.0, 1024);
  CHECK_THROWS_AS(convolve(u, Field(other)), ConfigError);

  const auto g2 = make_grid(2, 10.0, 64);
  const auto d2 = discrete_delta(g2);
  const auto u2 = gaussian(g2);
  CHECK(max_abs_difference(convolve(u2, d2), u2) < 1e-13);
}
