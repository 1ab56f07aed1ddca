#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "fraclab/constants.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/potential.hpp"

using namespace fraclab;
using std::numbers::pi;

namespace {

Field bump(const GridSpec& g, double width = 1.0) {
  return Field::sample_radial(g, [=](double r) {
    const double s = r / width;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  });
}

Field gaussian(const GridSpec& g) {
  return Field::sample_radial(g, [](double r) { return std::exp(-r * r); });
}

std::size_t node_at(const GridSpec& g, double x) {
  return static_cast<std::size_t>(std::lround((x + g.half_width()) / g.spacing()));
}

}  // namespace

TEST_CASE("riesz potential: zero data, domain and positivity") {
  const GridSpec g = make_grid(1, 20.0, 512);
  const Field u0 = riesz_potential(Field(g), 0.5);
  CHECK(u0.sup_norm() == 0.0);
  CHECK_THROWS_AS(riesz_potential(bump(g), 1.0), DomainError);
  CHECK_THROWS_AS(riesz_potential(bump(g), 1.5), DomainError);
  const Field u = riesz_potential(bump(g), 0.5);
  CHECK(u.min() > 0.0);
}

TEST_CASE("riesz potential: FFT convolution equals the direct pair sum") {
  for (int n : {1, 2}) {
    const GridSpec g = n == 1 ? make_grid(1, 20.0, 512) : make_grid(2, 8.0, 32);
    const Field f = bump(g, 2.0);
    for (double alpha : {0.25, 0.75}) {
      const Field u = riesz_potential(f, alpha);
      std::vector<std::size_t> targets;
      for (std::size_t i = 0; i < g.size(); i += g.size() / 7) targets.push_back(i);
      targets.push_back(g.origin_index());
      const auto direct = riesz_potential_direct(f, alpha, targets);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        CHECK(std::abs(u[targets[k]] - direct[k]) <= 1e-11 * std::abs(direct[k]));
      }
    }
  }
}

TEST_CASE("riesz potential: far field decays like c ||f||_1 |x|^{alpha-n}") {
  const GridSpec g = make_grid(1, 400.0, 16384);
  const Field f = bump(g);
  for (double alpha : {0.25, 0.5, 0.75}) {
    const Field u = riesz_potential(f, alpha);
    const double c = riesz_constant(1, alpha);
    for (double r : {20.0, 50.0, 100.0, 200.0, 350.0}) {
      const double far = c * f.l1_norm() * std::pow(r, alpha - 1.0);
      CHECK(std::abs(u[node_at(g, r)] - far) < 0.1 * far);
    }
  }
}

TEST_CASE("riesz potential is linear") {
  const GridSpec g = make_grid(1, 30.0, 1024);
  const Field a = bump(g, 3.0), b = gaussian(g);
  const Field lhs = riesz_potential(a.plus(b, -2.5), 0.5);
  const Field rhs = riesz_potential(a, 0.5).plus(riesz_potential(b, 0.5), -2.5);
  CHECK(max_abs_difference(lhs, rhs) < 1e-12 * rhs.sup_norm());
}

TEST_CASE("riesz potential inverts the spectral fractional Laplacian") {
  const GridSpec g = make_grid(1, 400.0, 65536);
  const Field f = gaussian(g);
  for (double alpha : {0.25, 0.5, 0.75}) {
    CAPTURE(alpha);
    CHECK(riesz_inversion_residual(f, alpha) < 1e-2);
  }
}

TEST_CASE("spherical riesz means match angular quadrature") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (auto [r, s] : std::vector<std::pair<double, double>>{{1.0, 0.3}, {0.7, 2.0}, {5.0, 4.0}}) {
      // n = 3: 2 pi int_0^pi |x - s omega|^{alpha-3} sin(theta) d theta
      const double oracle = 2.0 * pi * ts.integrate([&](double th) {
        return std::pow(r * r + s * s - 2.0 * r * s * std::cos(th), 0.5 * (alpha - 3.0)) * std::sin(th);
      }, 0.0, pi, 1e-13);
      CHECK(spherical_riesz_mean(3, alpha, r, s) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
  CHECK(spherical_riesz_mean(1, 0.5, 2.0, 1.0) == doctest::Approx(1.0 + std::pow(3.0, -0.5)));
  CHECK(spherical_riesz_mean(3, 1.0, 0.0, 2.0) == doctest::Approx(4.0 * pi / 4.0));
}

TEST_CASE("property (H): radial weights") {
  const auto one = radial_weight([](double) { return 1.0; }, "rho = 1");
  const PropertyHReport flat = check_property_H(one, 1.0, 3, {1.0, 10.0});
  CHECK_FALSE(flat.holds);
  CHECK_FALSE(flat.divergence_evidence.empty());
  // every probe grows at the same rate: the dichotomy surrogate
  for (const auto& P : flat.partial_integrals) CHECK(P[2] / P[0] == doctest::Approx(4.0).epsilon(1e-3));

  const auto lorentz = radial_weight([](double r) { return 1.0 / (1.0 + r * r); }, "(1+|y|^2)^-1");
  const PropertyHReport ok = check_property_H(lorentz, 1.0, 3, {10.0, 100.0, 1000.0});
  CHECK(ok.holds);
  CHECK(std::isfinite(ok.sup_estimate));
  // U(0) = 4 pi int_0^inf (1 + r^2)^{-1} dr = 2 pi^2, the largest value
  CHECK(ok.partial_integrals[0].back() == doctest::Approx(2.0 * pi * pi).epsilon(1e-5));
  CHECK(ok.sup_estimate == doctest::Approx(2.0 * pi * pi).epsilon(1e-5));
  for (std::size_t k = 1; k < ok.probe_points.size(); ++k) {
    CHECK(ok.partial_integrals[k].back() < ok.partial_integrals[k - 1].back());
  }

  const auto compact = radial_weight([](double r) { return r < 1.0 ? 1.0 - r : 0.0; }, "tent");
  for (int n : {1, 2, 3}) {
    const double alpha = n == 1 ? 0.5 : 1.0;
    CHECK(check_property_H(compact, alpha, n, {0.5, 3.0}).holds);
  }
  CHECK_FALSE(check_property_H(one, 0.5, 1, {1.0}).holds);
  // slow decay: rho ~ |y|^{-alpha} is borderline divergent (log)
  const auto borderline = radial_weight([](double r) { return std::pow(1.0 + r, -1.0); }, "(1+|y|)^-1");
  CHECK_FALSE(check_property_H(borderline, 1.0, 3, {1.0}).holds);

  const auto negative = radial_weight([](double r) { return 1.0 - r; }, "sign change");
  CHECK_THROWS_AS(check_property_H(negative, 1.0, 3, {1.0}), DomainError);
  CHECK_THROWS_AS(check_property_H(compact, 3.0, 3, {1.0}), DomainError);
}

TEST_CASE("property (H): grid weights") {
  const GridSpec g = make_grid(1, 256.0, 4096);
  CHECK(check_property_H(grid_weight(bump(g, 2.0), "bump"), 0.5, 1, {1.0, 10.0}).holds);
  const PropertyHReport flat =
      check_property_H(grid_weight(Field::sample_radial(g, [](double) { return 1.0; }), "one"), 0.5, 1, {1.0});
  CHECK_FALSE(flat.holds);
  CHECK(flat.partial_integrals[0][2] > flat.partial_integrals[0][0]);
}

TEST_CASE("ball solutions increase in R toward the riesz potential") {
  const GridSpec g = make_grid(1, 128.0, 4096);
  const Field f = bump(g);
  const BallSequence seq = minimal_solution_via_balls(f, 0.5, {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}, 1.0);
  CHECK(seq.worst_monotonicity_violation <= 1e-8);
  for (std::size_t k = 1; k < seq.inner_errors.size(); ++k) {
    CHECK(seq.inner_errors[k] < seq.inner_errors[k - 1]);
    CHECK(seq.sup_norms[k] > seq.sup_norms[k - 1]);
  }
  MESSAGE("inner error at R = 8: " << seq.inner_errors[2] << ", at R = 64: " << seq.inner_errors.back());
  CHECK(seq.inner_errors.back() < 0.1);

  const BallSequence zero = minimal_solution_via_balls(Field(g), 0.5, {2.0, 4.0}, 1.0);
  for (const Field& u : zero.solutions) CHECK(u.sup_norm() == 0.0);

  CHECK_THROWS_AS(minimal_solution_via_balls(f, 0.5, {2.0, 200.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(minimal_solution_via_balls(f, 0.5, {4.0, 2.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(minimal_solution_via_balls(bump(g, 3.0), 0.5, {2.0, 4.0}, 1.0), PreconditionError);
}

TEST_CASE("ball Green functions approach c |x - y|^{alpha - n}") {
  const GridSpec g = make_grid(1, 128.0, 4096);
  std::vector<double> d(g.size(), 0.0);
  d[g.origin_index()] = 1.0 / g.spacing();
  const Field delta(g, std::move(d));
  const double alpha = 0.5;
  const double c = riesz_constant(1, alpha);
  const BallSequence seq = minimal_solution_via_balls(delta, alpha, {4.0, 16.0, 64.0}, 0.0);
  for (double sep : {0.5, 1.0, 2.0}) {
    const double exact = c * std::pow(sep, alpha - 1.0);
    double previous = INFINITY;
    for (const Field& u : seq.solutions) {
      const double err = std::abs(u[node_at(g, sep)] - exact) / exact;
      CHECK(err < previous);
      previous = err;
    }
    CAPTURE(sep);
    CHECK(previous < 0.1);
  }
}
