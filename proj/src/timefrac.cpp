#include "fraclab/timefrac.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include <boost/math/special_functions/beta.hpp>

#include "fraclab/elliptic.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fractional_laplacian.hpp"

namespace fraclab {

std::vector<double> TimeMesh::nodes() const {
  std::vector<double> t(M + 1);
  for (std::size_t j = 0; j <= M; ++j) t[j] = node(j);
  return t;
}

TimeMesh make_time_mesh(double T, std::size_t M) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("time mesh: T must be positive");
  if (M < 16) throw ConfigError("time mesh: needs M >= 16");
  return {T, M};
}

int derivative_order(double tau) { return static_cast<int>(std::floor(tau)) + 1; }

namespace {

void check_input(std::span<const double> h, double mu, const TimeMesh& mesh) {
  if (!(mu > 0.0)) throw DomainError("rl_integral: order must be positive");
  if (h.size() != mesh.M + 1) throw ConfigError("rl_integral: expected one sample per node");
}

// (m+1)^q - 2 m^q + (m-1)^q; the even binomial terms for large m avoid the cancellation
double second_difference(double q, double m) {
  if (m < 20.0) return std::pow(m + 1.0, q) - 2.0 * std::pow(m, q) + std::pow(m - 1.0, q);
  double coeff = 0.5 * q * (q - 1.0);
  double power = std::pow(m, q - 2.0);
  double s = 2.0 * coeff * power;
  for (int r = 4; r < 40; r += 2) {
    coeff *= (q - r + 2.0) * (q - r + 1.0) / ((r - 1.0) * r);
    power /= m * m;
    const double term = 2.0 * coeff * power;
    s += term;
    if (std::abs(term) <= 1e-17 * std::abs(s)) break;
  }
  return s;
}

std::vector<double> linear_product_rule(std::span<const double> h, double mu, const TimeMesh& mesh, bool parallel) {
  check_input(h, mu, mesh);
  const std::size_t M = mesh.M;
  const double q = mu + 1.0;
  std::vector<double> d(M + 1, 0.0);
  for (std::size_t m = 1; m <= M; ++m) d[m] = second_difference(q, static_cast<double>(m));
  const double scale = std::pow(mesh.step(), mu) / std::tgamma(mu + 2.0);
  std::vector<double> out(M + 1, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (std::ptrdiff_t jj = 1; jj <= rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const double J = static_cast<double>(j);
    double s = (std::pow(J - 1.0, q) - (J - 1.0 - mu) * std::pow(J, mu)) * h[0] + h[j];
    for (std::size_t k = 1; k < j; ++k) s += d[j - k] * h[k];
    out[j] = scale * s;
  }
  return out;
}

// Coefficients c_0..c_j with int_0^{t_j} (t_j - s)^{mu-1} s^gamma g(s) ds
// = j t_j^{mu+gamma} sum c_k g_k for g piecewise linear.  In x = s / t_j the
// pieces are incomplete beta integrals of x^gamma (1-x)^{mu-1}; near x = 1
// their complements keep the differences accurate.
class WeightedRow {
public:
  WeightedRow(double gamma, double mu) : a1_(gamma + 1.0), a2_(gamma + 2.0), b_(mu) {
    full1_ = boost::math::beta(a1_, b_);
    full2_ = boost::math::beta(a2_, b_);
  }

  void fill(std::size_t j, std::vector<double>& c) {
    c.assign(j + 1, 0.0);
    lo1_.resize(j + 1);
    lo2_.resize(j + 1);
    const double J = static_cast<double>(j);
    for (std::size_t k = 0; k <= j; ++k) {
      const double x = static_cast<double>(k) / J;
      if (x <= 0.5) {
        lo1_[k] = x == 0.0 ? 0.0 : boost::math::beta(a1_, b_, x);
        lo2_[k] = x == 0.0 ? 0.0 : boost::math::beta(a2_, b_, x);
      } else {
        lo1_[k] = x == 1.0 ? 0.0 : boost::math::beta(b_, a1_, 1.0 - x);
        lo2_[k] = x == 1.0 ? 0.0 : boost::math::beta(b_, a2_, 1.0 - x);
      }
    }
    for (std::size_t k = 0; k < j; ++k) {
      const double x0 = static_cast<double>(k) / J, x1 = static_cast<double>(k + 1) / J;
      const double d1 = diff(lo1_, full1_, k, x0, x1);
      const double d2 = diff(lo2_, full2_, k, x0, x1);
      c[k] += x1 * d1 - d2;
      c[k + 1] += d2 - x0 * d1;
    }
  }

private:
  static double diff(const std::vector<double>& v, double full, std::size_t k, double x0, double x1) {
    if (x1 <= 0.5) return v[k + 1] - v[k];
    if (x0 > 0.5) return v[k] - v[k + 1];
    return (full - v[k + 1]) - v[k];
  }

  double a1_, a2_, b_;
  double full1_ = 0.0, full2_ = 0.0;
  std::vector<double> lo1_, lo2_;
};

std::vector<double> weighted_product_rule(std::span<const double> g, double gamma, double mu, const TimeMesh& mesh,
                                          bool parallel) {
  check_input(g, mu, mesh);
  if (!(gamma > -1.0)) throw DomainError("rl_integral_weighted: needs gamma > -1");
  const std::size_t M = mesh.M;
  const double norm = 1.0 / std::tgamma(mu);
  std::vector<double> out(M + 1, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel if (parallel)
  {
    WeightedRow row(gamma, mu);
    std::vector<double> c;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t jj = 1; jj <= rows; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      row.fill(j, c);
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += c[k] * g[k];
      out[j] = norm * static_cast<double>(j) * std::pow(mesh.node(j), mu + gamma) * s;
    }
  }
  return out;
}

std::vector<double> differentiate(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return d;
}

}  // namespace

std::vector<double> rl_integral(std::span<const double> h, double mu, const TimeMesh& mesh, double singular_power) {
  if (singular_power == 0.0) return linear_product_rule(h, mu, mesh, true);
  check_input(h, mu, mesh);
  std::vector<double> g(h.size());
  for (std::size_t j = 1; j < h.size(); ++j) g[j] = h[j] * std::pow(mesh.node(j), -singular_power);
  g[0] = 2.0 * g[1] - g[2];
  return weighted_product_rule(g, singular_power, mu, mesh, true);
}

std::vector<double> rl_integral_serial(std::span<const double> h, double mu, const TimeMesh& mesh) {
  return linear_product_rule(h, mu, mesh, false);
}

std::vector<double> rl_integral_weighted(std::span<const double> g, double gamma, double mu, const TimeMesh& mesh) {
  return weighted_product_rule(g, gamma, mu, mesh, true);
}

std::vector<double> rl_integral_weighted_serial(std::span<const double> g, double gamma, double mu,
                                                const TimeMesh& mesh) {
  return weighted_product_rule(g, gamma, mu, mesh, false);
}

RLDerivative rl_derivative(std::span<const double> h, double tau, const TimeMesh& mesh, double singular_power) {
  if (!(tau > 0.0)) throw DomainError("rl_derivative: order must be positive");
  if (tau == std::floor(tau)) throw DomainError("rl_derivative: integer order");
  if (h.size() != mesh.M + 1) throw ConfigError("rl_derivative: expected one sample per node");
  RLDerivative out;
  out.k = derivative_order(tau);
  if (mesh.M + 1 < static_cast<std::size_t>(2 * out.k + 2)) {
    throw ConfigError("rl_derivative: mesh too coarse for the difference stencil");
  }
  const double mu = out.k - tau;
  std::vector<double> I = rl_integral(h, mu, mesh, singular_power);
  for (int pass = 0; pass < out.k; ++pass) I = differentiate(I, mesh.step());
  out.values = std::move(I);
  out.first_confident = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(0.05 * (mesh.M + 1))),
                                              static_cast<std::size_t>(out.k + 1));
  return out;
}

// Volterra marching ---------------------------------------------------------------

namespace {

struct March {
  std::vector<double> phi;  // valid nodes only
  bool escalated = false;
  std::string reason;
  double T_star = 0.0;
};

March march(double beta, double lambda, double b, const TimeMesh& mesh, double threshold) {
  // phi = t^{beta-1} psi, phi^2 = t^{gamma} g with gamma = 2 beta - 2 and g = psi^2
  const double gamma = 2.0 * beta - 2.0;
  const double gb = std::tgamma(beta);
  March out;
  out.phi.push_back(b > 0.0 ? INFINITY : 0.0);
  std::vector<double> g{(b / gb) * (b / gb)};
  if (lambda == 0.0 || b == 0.0) {
    // no interaction with the nonlinearity beyond the kernel term
    for (std::size_t j = 1; j <= mesh.M; ++j) out.phi.push_back(b * std::pow(mesh.node(j), beta - 1.0) / gb);
    return out;
  }
  WeightedRow row(gamma, beta);
  std::vector<double> c;
  for (std::size_t j = 1; j <= mesh.M; ++j) {
    const double t = mesh.node(j);
    row.fill(j, c);
    const double pref = lambda * static_cast<double>(j) * std::pow(t, beta + gamma) / gb;
    double history = 0.0;
    for (std::size_t k = 0; k < j; ++k) history += c[k] * g[k];
    const double A = b * std::pow(t, beta - 1.0) / gb + pref * history;
    const double q = pref * c[j] * std::pow(t, -gamma);
    const double disc = 1.0 - 4.0 * q * A;
    if (!std::isfinite(A) || !std::isfinite(q)) throw NumericError("solve_rl_quadratic: non-finite node " + std::to_string(j));
    if (disc < 0.0) {
      out.escalated = true;
      out.reason = "node equation lost its real root at node " + std::to_string(j);
      out.T_star = t;
      return out;
    }
    const double phi = 2.0 * A / (1.0 + std::sqrt(disc));
    out.phi.push_back(phi);
    g.push_back(phi * phi * std::pow(t, -gamma));
    if (phi >= threshold) {
      out.escalated = true;
      out.reason = "phi crossed the threshold at node " + std::to_string(j);
      out.T_star = t;
      return out;
    }
  }
  return out;
}

}  // namespace

VolterraTrace solve_rl_quadratic(double beta, double lambda, double b, const TimeMesh& mesh,
                                 const VolterraOptions& options) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("solve_rl_quadratic: beta must lie in (0,1)");
  if (!(lambda >= 0.0) || !(b >= 0.0)) throw DomainError("solve_rl_quadratic: lambda and b must be nonnegative");
  if (lambda * b > 0.0 && beta <= 0.5) {
    throw DomainError("solve_rl_quadratic: for beta <= 1/2 the square of b t^{beta-1} is not integrable at 0");
  }
  if (!(options.threshold > 0.0)) throw ConfigError("solve_rl_quadratic: threshold must be positive");
  VolterraTrace tr;
  tr.beta = beta;
  tr.lambda = lambda;
  tr.b = b;
  const March coarse = march(beta, lambda, b, mesh, options.threshold);
  tr.phi = coarse.phi;
  for (std::size_t j = 0; j < tr.phi.size(); ++j) tr.t.push_back(mesh.node(j));
  tr.escalated = coarse.escalated;
  tr.T_star = coarse.T_star;
  tr.reason = coarse.escalated ? coarse.reason : "no escalation before T";
  tr.refinement_flag.assign(tr.phi.size(), 0);
  if (!options.refine) {
    if (tr.escalated) tr.reason += "; refinement skipped";
    return tr;
  }
  const March fine = march(beta, lambda, b, make_time_mesh(mesh.T, 2 * mesh.M), options.threshold);
  for (std::size_t j = 0; j < tr.phi.size() && 2 * j < fine.phi.size(); ++j) {
    const double a = tr.phi[j], f = fine.phi[2 * j];
    tr.refinement_flag[j] = (std::isinf(a) && std::isinf(f)) || std::abs(a - f) <= 1e-2 * std::abs(f) ? 1 : 0;
  }
  if (tr.escalated && fine.escalated) {
    tr.T_star_refined = fine.T_star;
    tr.refinement_change = std::abs(tr.T_star - fine.T_star) / fine.T_star;
    tr.blew_up = tr.refinement_change < options.agreement;
    if (!tr.blew_up) tr.reason += "; doubled mesh disagrees";
  } else if (tr.escalated) {
    tr.reason += "; doubled mesh did not escalate";
  }
  return tr;
}

double self_similar_constant(double beta, double lambda) {
  if (!(beta > 0.0 && beta < 0.5)) throw DomainError("self_similar_constant: needs beta in (0, 1/2)");
  if (!(lambda > 0.0)) throw DomainError("self_similar_constant: needs lambda > 0");
  return std::tgamma(1.0 - beta) / (lambda * std::tgamma(1.0 - 2.0 * beta));
}

// Separable ansatz --------------------------------------------------------------------

SeparableReport separable_blowup_demo(double beta, double alpha, const WeightSpec& rho,
                                      const SeparableOptions& options) {
  const GridSpec& g = options.grid;
  if (g.dimension() != 1) throw ConfigError("separable demo: n = 1 only");
  if (!(options.lambda > 0.0)) throw DomainError("separable demo: lambda must be positive");
  SeparableReport rep;
  rep.beta = beta;
  rep.alpha = alpha;
  rep.lambda = options.lambda;

  // v = w^2 solves L v = lambda rho sqrt(v); with lambda = 1 it is the p = 1/2 problem and v scales like lambda^2
  const WholeSpaceResult ws = whole_space_sublinear_solve(rho, 0.5, alpha, g, options.radii);
  const Field v = ws.solutions.back().scaled(options.lambda * options.lambda);
  std::vector<double> wv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) wv[i] = std::sqrt(std::max(v[i], 0.0));
  rep.w = Field(g, std::move(wv));

  rep.phi = solve_rl_quadratic(beta, options.lambda, options.b, make_time_mesh(options.horizon, options.time_nodes));
  const std::size_t last = rep.phi.phi.size() - 1;
  if (last < 16) throw NumericError("separable demo: phi escalated within the first 16 nodes");
  const TimeMesh sub{rep.phi.t[last], last};
  const RLDerivative D = rl_derivative(rep.phi.phi, beta, sub, beta - 1.0);

  const double X = g.half_width(), h = g.spacing();
  const PointFunction vf = [&](const std::array<double, 3>& x) {
    const double s = (x[0] + X) / h;
    if (s <= 0.0 || s >= static_cast<double>(g.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(s);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * v[i] + f * v[i + 1];
  };
  QuadratureOptions q;
  q.cutoff = X;
  q.support_scale = options.radii.back();
  q.outer_panels = 2000;
  q.inner_radius = 0.25;
  q.inner_panels = 20;
  const Field rho_grid = sample_weight(rho, g);
  for (double x : options.sample_x) {
    const double Lv = frac_laplacian_quadrature(vf, {x, 0.0, 0.0}, 1, alpha, q).value;
    const double s = (x + X) / h;
    const auto i = static_cast<std::size_t>(std::lround(s));
    for (double f : options.sample_t) {
      const auto j = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(f * last)), D.first_confident, last - 1);
      SeparableSample smp;
      smp.x = g.point(i)[0];
      smp.t = sub.node(j);
      smp.lhs = rho_grid[i] * rep.w[i] * D.values[j];
      smp.rhs = rep.phi.phi[j] * rep.phi.phi[j] * Lv;
      smp.relative = std::abs(smp.lhs - smp.rhs) / std::abs(smp.rhs);
      rep.max_residual = std::max(rep.max_residual, smp.relative);
      rep.samples.push_back(smp);
    }
  }
  return rep;
}

}  // namespace fraclab
