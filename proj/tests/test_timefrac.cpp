#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/timefrac.hpp"

using namespace fraclab;

namespace {

std::vector<double> sample(const TimeMesh& m, const std::function<double(double)>& f) {
  std::vector<double> h(m.M + 1);
  for (std::size_t j = 0; j <= m.M; ++j) h[j] = f(m.node(j));
  return h;
}

// Gamma(mu + 1) / Gamma(mu + 1 - tau) t^{mu - tau}
double power_rule(double mu, double tau, double t) {
  return std::tgamma(mu + 1.0) / std::tgamma(mu + 1.0 - tau) * std::pow(t, mu - tau);
}

}  // namespace

TEST_CASE("time mesh and derivative order") {
  const TimeMesh m = make_time_mesh(2.0, 16);
  CHECK(m.nodes().size() == 17);
  CHECK(m.nodes().back() == 2.0);
  CHECK_THROWS_AS(make_time_mesh(1.0, 15), ConfigError);
  CHECK_THROWS_AS(make_time_mesh(0.0, 64), ConfigError);
  CHECK(derivative_order(0.5) == 1);
  CHECK(derivative_order(1.5) == 2);
  CHECK(derivative_order(1.0) == 2);
}

TEST_CASE("riemann-liouville integral: closed forms, linearity, domain") {
  const TimeMesh m = make_time_mesh(1.0, 200);
  const auto one = sample(m, [](double) { return 1.0; });
  const auto I = rl_integral(one, 0.5, m);
  CHECK(I[0] == 0.0);
  CHECK(std::abs(I.back() - 1.0 / std::tgamma(1.5)) < 1e-6);
  for (std::size_t j = 1; j <= m.M; ++j) CHECK(I[j] == doctest::Approx(std::sqrt(m.node(j)) / std::tgamma(1.5)).epsilon(1e-12));

  const auto lin = sample(m, [](double t) { return t; });
  const auto I1 = rl_integral(lin, 1.0, m);
  for (std::size_t j = 0; j <= m.M; ++j) CHECK(std::abs(I1[j] - 0.5 * m.node(j) * m.node(j)) < 1e-14);

  const auto a = sample(m, [](double t) { return std::cos(3.0 * t); });
  const auto b = sample(m, [](double t) { return std::exp(-t); });
  std::vector<double> ab(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) ab[j] = a[j] - 2.0 * b[j];
  const auto Ia = rl_integral(a, 0.3, m), Ib = rl_integral(b, 0.3, m), Iab = rl_integral(ab, 0.3, m);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(Iab[j] - (Ia[j] - 2.0 * Ib[j])) < 1e-13);

  CHECK(rl_integral_serial(a, 0.3, m) == Ia);
  CHECK_THROWS_AS(rl_integral(a, 0.0, m), DomainError);
  CHECK_THROWS_AS(rl_integral(std::vector<double>(5, 1.0), 0.5, m), ConfigError);
}

TEST_CASE("weighted product rule: exact on powers, matches direct quadrature") {
  const TimeMesh m = make_time_mesh(1.0, 400);
  for (double gamma : {-0.5, -0.25, 0.4}) {
    for (double mu : {0.3, 0.75, 1.5}) {
      const auto I = rl_integral_weighted(std::vector<double>(m.M + 1, 1.0), gamma, mu, m);
      for (std::size_t j : {1ul, 7ul, 100ul, 400ul}) {
        const double t = m.node(j);
        const double exact = std::tgamma(gamma + 1.0) / std::tgamma(gamma + 1.0 + mu) * std::pow(t, gamma + mu);
        CHECK(I[j] == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
  // s^{-1/2} cos s against tanh-sinh
  boost::math::quadrature::tanh_sinh<double> ts;
  const double mu = 0.6, gamma = -0.5;
  const double oracle =
      ts.integrate([&](double s) { return std::pow(1.0 - s, mu - 1.0) * std::pow(s, gamma) * std::cos(s); }, 0.0, 1.0) /
      std::tgamma(mu);
  const auto I = rl_integral_weighted(sample(m, [](double t) { return std::cos(t); }), gamma, mu, m);
  CHECK(I.back() == doctest::Approx(oracle).epsilon(1e-6));
  const auto g = sample(m, [](double t) { return std::cos(t); });
  CHECK(rl_integral_weighted_serial(g, gamma, mu, m) == rl_integral_weighted(g, gamma, mu, m));
  CHECK_THROWS_AS(rl_integral_weighted(g, -1.0, mu, m), DomainError);
}

TEST_CASE("gamma power rule for the riemann-liouville derivative") {
  const TimeMesh m = make_time_mesh(1.0, 1000);
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto h = sample(m, [mu](double t) { return std::pow(t, mu); });
    for (double tau : {0.3, 0.5, 0.7}) {
      const RLDerivative D = rl_derivative(h, tau, m);
      CHECK(D.k == 1);
      CHECK(D.first_confident == 51);
      double worst = 0.0;
      for (std::size_t j = D.first_confident; j <= m.M; ++j) {
        const double exact = power_rule(mu, tau, m.node(j));
        worst = std::max(worst, std::abs(D.values[j] - exact) / exact);
      }
      CAPTURE(mu);
      CAPTURE(tau);
      CHECK(worst < 1e-3);
    }
  }
  // k = 2
  const auto t2 = sample(m, [](double t) { return t * t; });
  const RLDerivative D2 = rl_derivative(t2, 1.5, m);
  CHECK(D2.k == 2);
  for (std::size_t j = D2.first_confident; j <= m.M; j += 50) {
    CHECK(D2.values[j] == doctest::Approx(power_rule(2.0, 1.5, m.node(j))).epsilon(1e-3));
  }
  CHECK_THROWS_AS(rl_derivative(t2, 1.0, m), DomainError);
  CHECK_THROWS_AS(rl_derivative(t2, -0.5, m), DomainError);
}

TEST_CASE("riemann-liouville derivative: kernel and classical limit") {
  const TimeMesh m = make_time_mesh(1.0, 1000);
  for (double tau : {0.3, 0.6}) {
    const auto h = sample(m, [tau](double t) { return t > 0.0 ? std::pow(t, tau - 1.0) : 0.0; });
    const RLDerivative D = rl_derivative(h, tau, m, tau - 1.0);
    for (std::size_t j = D.first_confident; j <= m.M; ++j) CHECK(std::abs(D.values[j]) < 1e-8);
  }
  const auto s = sample(m, [](double t) { return std::sin(t); });
  const RLDerivative D = rl_derivative(s, 0.999, m);
  for (std::size_t j = D.first_confident; j <= m.M; ++j) CHECK(std::abs(D.values[j] - std::cos(m.node(j))) < 5e-3);
}

TEST_CASE("riemann-liouville integrals compose: I^0.3 I^0.4 = I^0.7") {
  const TimeMesh m = make_time_mesh(1.0, 1000);
  const std::vector<std::function<double(double)>> fs{
      [](double t) { return t * t; }, [](double t) { return std::cos(t); }, [](double t) { return std::exp(t); }};
  for (const auto& f : fs) {
    const auto h = sample(m, f);
    // I^0.4 h = t^0.4 (smooth) for h(0) != 0
    const auto lhs = rl_integral(rl_integral(h, 0.4, m), 0.3, m, 0.4);
    const auto rhs = rl_integral(h, 0.7, m);
    double worst = 0.0;
    for (std::size_t j = 0; j <= m.M; ++j) worst = std::max(worst, std::abs(lhs[j] - rhs[j]));
    CHECK(worst < 1e-5);
  }
  const auto rhs = rl_integral(sample(m, fs[0]), 0.7, m);
  for (std::size_t j = 100; j <= m.M; j += 100) CHECK(rhs[j] == doctest::Approx(power_rule(2.0, -0.7, m.node(j))).epsilon(1e-5));
}

TEST_CASE("volterra form: linear case, domain, blow-up under refinement") {
  const TimeMesh m = make_time_mesh(1.0, 200);
  const VolterraTrace lin = solve_rl_quadratic(0.25, 0.0, 2.0, m);
  CHECK(std::isinf(lin.phi[0]));
  for (std::size_t j = 1; j <= m.M; ++j) {
    CHECK(lin.phi[j] == doctest::Approx(2.0 * std::pow(m.node(j), -0.75) / std::tgamma(0.25)).epsilon(1e-14));
  }
  CHECK_FALSE(lin.escalated);
  CHECK_THROWS_AS(solve_rl_quadratic(0.25, 1.0, 1.0, m), DomainError);
  CHECK_THROWS_AS(solve_rl_quadratic(0.5, 1.0, 1.0, m), DomainError);
  CHECK_THROWS_AS(solve_rl_quadratic(1.0, 1.0, 1.0, m), DomainError);
  CHECK_THROWS_AS(solve_rl_quadratic(0.75, -1.0, 1.0, m), DomainError);

  const VolterraTrace tr = solve_rl_quadratic(0.75, 1.0, 1.0, make_time_mesh(0.3, 1000));
  MESSAGE("T* = " << tr.T_star << " (" << tr.reason << "), doubled mesh " << tr.T_star_refined);
  CHECK(tr.escalated);
  CHECK(tr.blew_up);
  CHECK(tr.refinement_change < 0.05);
  for (std::size_t j = 0; j < tr.t.size() && tr.t[j] <= 0.9 * tr.T_star; ++j) CHECK(tr.refinement_flag[j] == 1);
  // phi increases after its initial decay from the kernel singularity
  for (std::size_t j = tr.phi.size() / 2; j + 1 < tr.phi.size(); ++j) CHECK(tr.phi[j + 1] > tr.phi[j]);

  // larger data blows up sooner
  const VolterraTrace big = solve_rl_quadratic(0.75, 1.0, 2.0, make_time_mesh(0.3, 1000));
  CHECK(big.T_star < tr.T_star);
}

TEST_CASE("volterra form: lambda rescaling") {
  const TimeMesh m = make_time_mesh(0.3, 500);
  const VolterraTrace one = solve_rl_quadratic(0.75, 1.0, 1.0, m, {1e6, false});
  const VolterraTrace two = solve_rl_quadratic(0.75, 2.0, 0.5, m, {1e6, false});
  // phi_lambda = phi_1 / lambda for b_lambda = b / lambda
  REQUIRE(one.phi.size() == two.phi.size());
  for (std::size_t j = 1; j < one.phi.size(); ++j) CHECK(two.phi[j] == doctest::Approx(0.5 * one.phi[j]).epsilon(1e-10));
  CHECK(two.T_star == one.T_star);
}

TEST_CASE("self-similar profile c t^{-beta} solves D^beta phi = lambda phi^2") {
  const TimeMesh m = make_time_mesh(1.0, 1000);
  for (double beta : {0.25, 0.4}) {
    for (double lambda : {1.0, 3.0}) {
      const double c = self_similar_constant(beta, lambda);
      const auto phi = sample(m, [&](double t) { return t > 0.0 ? c * std::pow(t, -beta) : 0.0; });
      const RLDerivative D = rl_derivative(phi, beta, m, -beta);
      double worst = 0.0;
      for (std::size_t j = D.first_confident; j <= m.M; ++j) {
        const double rhs = lambda * phi[j] * phi[j];
        worst = std::max(worst, std::abs(D.values[j] - rhs) / rhs);
      }
      CAPTURE(beta);
      CHECK(worst < 1e-2);
    }
  }
  CHECK(self_similar_constant(0.25, 1.0) == doctest::Approx(std::tgamma(0.75) / std::tgamma(0.5)));
  CHECK_THROWS_AS(self_similar_constant(0.5, 1.0), DomainError);
}

TEST_CASE("separable ansatz phi(t) w(x)") {
  const auto lorentz = radial_weight([](double r) { return 1.0 / (1.0 + r * r); }, "(1+|x|^2)^-1");
  const SeparableReport rep = separable_blowup_demo(0.75, 0.5, lorentz);
  CHECK(rep.phi.blew_up);
  CHECK(rep.samples.size() == 16);
  MESSAGE("largest separable residual " << rep.max_residual);
  CHECK(rep.max_residual < 0.05);

  // lambda -> 2 lambda with b -> b / 2: w doubles, phi halves, u is unchanged
  SeparableOptions two;
  two.lambda = 2.0;
  two.b = 0.5;
  const SeparableReport rep2 = separable_blowup_demo(0.75, 0.5, lorentz, two);
  const std::size_t i = rep.w.grid().origin_index();
  CHECK(rep2.w[i] == doctest::Approx(2.0 * rep.w[i]).epsilon(1e-10));
  for (std::size_t j = 1; j < rep.phi.phi.size(); j += 50) {
    CHECK(rep2.phi.phi[j] * rep2.w[i] == doctest::Approx(rep.phi.phi[j] * rep.w[i]).epsilon(1e-10));
  }
  CHECK(rep2.max_residual < 0.05);

  const auto flat = radial_weight([](double) { return 1.0; }, "rho = 1");
  CHECK_THROWS_AS(separable_blowup_demo(0.75, 0.5, flat), PreconditionError);
}
