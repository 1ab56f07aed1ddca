#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// Riemann-Liouville calculus on t_j = j T / M and the separable blow-up ansatz.

struct TimeMesh {
  double T = 1.0;
  std::size_t M = 16;

  [[nodiscard]] double step() const noexcept { return T / static_cast<double>(M); }
  [[nodiscard]] double node(std::size_t j) const noexcept { return static_cast<double>(j) * step(); }
  [[nodiscard]] std::vector<double> nodes() const;
};

/// Throws ConfigError unless T > 0 and M >= 16.
TimeMesh make_time_mesh(double T, std::size_t M);

/// k = floor(tau) + 1.
int derivative_order(double tau);

/// I^mu h at every node, h piecewise linear between the M + 1 samples and the
/// weights integrated exactly against (t - s)^{mu-1} / Gamma(mu).
/// With singular_power = gamma != 0 the samples are read as t^gamma g(t) and
/// rl_integral_weighted is used, g extrapolated linearly to t = 0.
/// DomainError for mu <= 0, ConfigError when h has the wrong length.
std::vector<double> rl_integral(std::span<const double> h, double mu, const TimeMesh& mesh,
                                double singular_power = 0.0);

/// I^mu [s^gamma g(s)] with g piecewise linear and gamma > -1; the weights are
/// incomplete beta functions.  Exact for g constant.
std::vector<double> rl_integral_weighted(std::span<const double> g, double gamma, double mu, const TimeMesh& mesh);

/// Serial versions of the two above, for benchmarking.
std::vector<double> rl_integral_serial(std::span<const double> h, double mu, const TimeMesh& mesh);
std::vector<double> rl_integral_weighted_serial(std::span<const double> g, double gamma, double mu,
                                                const TimeMesh& mesh);

struct RLDerivative {
  std::vector<double> values;
  int k = 1;
  /// Nodes below this index (the first 5%, rounded up, at least k + 1) are low confidence.
  std::size_t first_confident = 0;
};

/// D^tau h = d^k/dt^k I^{k - tau} h with k = floor(tau) + 1; the k-th
/// derivative is k passes of second-order differences (one-sided at the ends).
/// With singular_power = gamma != 0, h is treated as t^gamma g(t), g is read
/// off the samples at t > 0 and extrapolated linearly to t = 0.
/// DomainError for tau <= 0 or integer tau.
RLDerivative rl_derivative(std::span<const double> h, double tau, const TimeMesh& mesh, double singular_power = 0.0);

struct VolterraOptions {
  double threshold = 1e6;
  /// Repeat on the doubled mesh and compare.
  bool refine = true;
  /// Relative agreement of the two escalation times.
  double agreement = 0.05;
};

struct VolterraTrace {
  double beta = 0.0, lambda = 0.0, b = 0.0;
  std::vector<double> t;
  /// phi(t_j); phi(0) = +inf when b > 0.
  std::vector<double> phi;
  /// 1 where the doubled mesh agrees within 1% at the same time.
  std::vector<int> refinement_flag;
  /// The threshold was crossed, or the node equation lost its real root.
  bool escalated = false;
  std::string reason;
  double T_star = 0.0;  ///< node time of the escalation
  double T_star_refined = 0.0;
  double refinement_change = 0.0;
  /// escalated on both meshes with times within `agreement`: evidence, not proof.
  bool blew_up = false;
};

/// phi(t) = b t^{beta-1} / Gamma(beta) + lambda I^beta [phi^2](t), the Volterra
/// form of D^beta phi = lambda phi^2 with I^{1-beta} phi (0+) = b.  Product
/// integration in phi = t^{beta-1} psi; the node equation is quadratic in phi_j
/// and solved on the branch that tends to the linear solution as lambda -> 0.
/// DomainError for beta outside (0,1), lambda < 0, b < 0, or beta <= 1/2 with
/// lambda b > 0 (phi^2 ~ t^{2 beta - 2} is then not integrable at 0).
VolterraTrace solve_rl_quadratic(double beta, double lambda, double b, const TimeMesh& mesh,
                                 const VolterraOptions& options = {});

/// c with D^beta (c t^{-beta}) = lambda (c t^{-beta})^2: Gamma(1-beta) / (lambda Gamma(1-2beta)), beta < 1/2.
double self_similar_constant(double beta, double lambda);

struct SeparableSample {
  double x = 0.0, t = 0.0;
  double lhs = 0.0;  ///< rho w D^beta phi
  double rhs = 0.0;  ///< phi^2 (-Delta)^{alpha/2} w^2
  double relative = 0.0;
};

struct SeparableOptions {
  double lambda = 1.0;
  double b = 1.0;
  GridSpec grid = make_grid(1, 64.0, 2048);
  std::vector<double> radii{4.0, 8.0, 16.0, 32.0};
  double horizon = 0.5;
  std::size_t time_nodes = 1024;
  std::vector<double> sample_x{0.0, 0.5, 1.0, 2.0};
  /// Fractions of the escalation time.
  std::vector<double> sample_t{0.2, 0.4, 0.6, 0.8};
};

struct SeparableReport {
  double beta = 0.0, alpha = 0.0, lambda = 0.0;
  /// w = sqrt(v) with (-Delta)^{alpha/2} v = lambda rho sqrt(v) on the largest ball.
  Field w;
  VolterraTrace phi;
  std::vector<SeparableSample> samples;
  double max_residual = 0.0;
};

/// u(x,t) = phi(t) w(x) for rho D^beta u = (-Delta)^{alpha/2} u^2.  The spatial
/// factor comes from the p = 1/2 whole-space solve, the temporal one from
/// solve_rl_quadratic; the identity is checked with an independent quadrature
/// of the operator and a numerical D^beta.  n = 1.  PreconditionError when rho
/// fails property (H).
SeparableReport separable_blowup_demo(double beta, double alpha, const WeightSpec& rho,
                                      const SeparableOptions& options = {});

}  // namespace fraclab
