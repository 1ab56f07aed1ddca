#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "fraclab/constants.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

namespace {

constexpr std::size_t kMaxInterior = 4096;

bool inside(const GridSpec& g, double R, std::size_t i) { return std::abs(g.coordinate(i)) < R; }

double sup_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

BallProblem make_ball_problem(const GridSpec& grid, double R, double alpha, std::optional<Field> rho,
                              std::optional<Field> exterior) {
  if (grid.dimension() != 1) throw ConfigError("ball problem: only n = 1 grids are supported");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("ball problem: alpha must lie in (0, 2)");
  if (!(R > 0.0) || R >= grid.half_width()) {
    throw ConfigError("ball problem: need 0 < R < X (R = " + std::to_string(R) + ")");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) count += inside(grid, R, i) ? 1 : 0;
  if (count == 0) throw ConfigError("ball problem: the ball contains no grid nodes");
  if (count > kMaxInterior) {
    throw ConfigError("ball problem: " + std::to_string(count) + " interior nodes exceed the budget of " +
                      std::to_string(kMaxInterior));
  }
  BallProblem p;
  p.grid = grid;
  p.R = R;
  p.alpha = alpha;
  p.rho = rho ? std::move(*rho) : Field::sample(grid, [](const auto&) { return 1.0; });
  p.exterior = exterior ? std::move(*exterior) : Field(grid);
  if (!(p.rho.grid() == grid) || !(p.exterior.grid() == grid)) {
    throw ConfigError("ball problem: rho and exterior data must live on the problem grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!inside(grid, R, i) && p.exterior[i] < 0.0) {
      throw ConfigError("ball problem: exterior data must be nonnegative");
    }
  }
  return p;
}

double hat_weight(double alpha, std::size_t k) {
  if (k == 0) return 0.0;
  const auto kd = static_cast<double>(k);
  const auto rising = [&](double s) { return (s - (kd - 1.0)) * std::pow(s, -1.0 - alpha); };
  const auto falling = [&](double s) { return ((kd + 1.0) - s) * std::pow(s, -1.0 - alpha); };
  double w = numerics::integrate_panels(falling, kd, kd + 1.0, 1, 20);
  if (k >= 2) w += numerics::integrate_panels(rising, kd - 1.0, kd, 1, 20);
  return w;
}

DirichletSolver::DirichletSolver(BallProblem problem) : problem_(std::move(problem)) {
  const GridSpec& g = problem_.grid;
  const double alpha = problem_.alpha;
  const double h = g.spacing();
  const double C = operator_constant(1, alpha);
  const double scale = C * std::pow(h, -alpha);

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (inside(g, problem_.R, i)) interior_.push_back(i);
  }
  coupling_.assign(g.points_per_axis(), 0.0);
  for (std::size_t d = 1; d < coupling_.size(); ++d) {
    coupling_[d] = scale * (hat_weight(alpha, d) + (d == 1 ? 1.0 / (2.0 - alpha) : 0.0));
  }
  const double diag = scale * (2.0 / (2.0 - alpha) + 2.0 / alpha);

  const auto m = static_cast<Eigen::Index>(interior_.size());
  A_.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const std::size_t d = a > b ? static_cast<std::size_t>(a - b) : static_cast<std::size_t>(b - a);
      A_(a, b) = d == 0 ? diag : -coupling_[d];
    }
  }
  load_ = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (inside(g, problem_.R, j) || problem_.exterior[j] == 0.0) continue;
    for (Eigen::Index a = 0; a < m; ++a) {
      const std::size_t i = interior_[static_cast<std::size_t>(a)];
      load_(a) += coupling_[i > j ? i - j : j - i] * problem_.exterior[j];
    }
  }
  llt_.compute(A_);
  if (llt_.info() != Eigen::Success) throw NumericError("Dirichlet operator: Cholesky factorization failed");
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd u = llt_.solve(rhs);
  if (!u.allFinite()) throw NumericError("Dirichlet solve produced non-finite values");
  return u;
}

Field DirichletSolver::solve(const Field& f) const {
  return extend(solve(restrict_to_ball(f) + load_));
}

Eigen::VectorXd DirichletSolver::restrict_to_ball(const Field& u) const {
  if (!(u.grid() == problem_.grid)) throw ConfigError("Dirichlet solver: field on a different grid");
  Eigen::VectorXd v(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t a = 0; a < interior_.size(); ++a) v(static_cast<Eigen::Index>(a)) = u[interior_[a]];
  return v;
}

Field DirichletSolver::extend(const Eigen::VectorXd& v) const {
  std::vector<double> out(problem_.exterior.values().begin(), problem_.exterior.values().end());
  for (std::size_t a = 0; a < interior_.size(); ++a) out[interior_[a]] = v(static_cast<Eigen::Index>(a));
  return Field(problem_.grid, std::move(out));
}

Eigen::VectorXd DirichletSolver::apply(const Field& u) const {
  Eigen::VectorXd out = A_ * restrict_to_ball(u);
  const GridSpec& g = problem_.grid;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (inside(g, problem_.R, j) || u[j] == 0.0) continue;
    for (std::size_t a = 0; a < interior_.size(); ++a) {
      const std::size_t i = interior_[a];
      out(static_cast<Eigen::Index>(a)) -= coupling_[i > j ? i - j : j - i] * u[j];
    }
  }
  return out;
}

Eigen::MatrixXd assemble_dirichlet_operator(double R, double alpha, const GridSpec& grid) {
  return DirichletSolver(make_ball_problem(grid, R, alpha)).matrix();
}

Field solve_linear_dirichlet(const BallProblem& problem, const Field& f) {
  const DirichletSolver solver(problem);
  if (solver.restrict_to_ball(f).minCoeff() < 0.0) {
    throw PreconditionError("solve_linear_dirichlet: f must be nonnegative on the ball");
  }
  return solver.solve(f);
}

EigenPair principal_eigenpair(const BallProblem& problem, int max_iterations) {
  const DirichletSolver solver(problem);
  const Eigen::VectorXd rho = solver.restrict_to_ball(problem.rho);
  if (rho.minCoeff() <= 0.0) throw PreconditionError("principal_eigenpair: rho must be positive on the ball");
  const Eigen::MatrixXd& A = solver.matrix();

  Eigen::VectorXd v = Eigen::VectorXd::Ones(rho.size());
  std::vector<double> history, residuals;
  EigenPair out;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = solver.solve(Eigen::VectorXd(rho.cwiseProduct(v)));
    v = y / y.maxCoeff();
    const Eigen::VectorXd Av = A * v;
    const double lambda = v.dot(Av) / v.dot(rho.cwiseProduct(v));
    history.push_back(lambda);
    const double res = sup_abs(Av - lambda * rho.cwiseProduct(v)) / sup_abs(Av);
    // below 1e-8, stop as soon as rounding halts the progress
    const bool stalled = res < 1e-8 && !residuals.empty() && res > 0.5 * residuals.back();
    residuals.push_back(res);
    if (res < 1e-12 || stalled) {
      out.lambda = lambda;
      out.residual = res;
      out.iterations = it;
      break;
    }
    if (it == max_iterations) {
      std::ostringstream msg;
      msg << "principal_eigenpair: residual " << res << " after " << it << " iterations; lambda history";
      for (std::size_t k = history.size() > 5 ? history.size() - 5 : 0; k < history.size(); ++k) {
        msg << ' ' << history[k];
      }
      throw NumericError(msg.str());
    }
  }
  std::vector<double> phi(problem.grid.size(), 0.0);
  for (std::size_t a = 0; a < solver.interior().size(); ++a) {
    phi[solver.interior()[a]] = v(static_cast<Eigen::Index>(a));
  }
  out.phi = Field(problem.grid, std::move(phi));
  return out;
}

Nonlinearity power_nonlinearity(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("power nonlinearity: exponent must be positive");
  return {[sigma](double u) { return u > 0.0 ? std::pow(u, sigma) : 0.0; }, 0.0,
          "u^" + std::to_string(sigma)};
}

double nonlinear_residual(const DirichletSolver& solver, const Nonlinearity& nl, const Field& u) {
  const Eigen::VectorXd Lu = solver.apply(u);
  const Eigen::VectorXd v = solver.restrict_to_ball(u);
  const Eigen::VectorXd rho = solver.restrict_to_ball(solver.problem().rho);
  double r = 0.0;
  for (Eigen::Index a = 0; a < v.size(); ++a) r = std::max(r, std::abs(Lu(a) - rho(a) * nl.f(v(a))));
  return r;
}

namespace {

MonotoneTrace run_sequence(const DirichletSolver& solver, const Eigen::LLT<Eigen::MatrixXd>& shifted,
                           const Nonlinearity& nl, Eigen::VectorXd& v, double direction,
                           const MonotoneOptions& opt) {
  const Eigen::VectorXd rho = solver.restrict_to_ball(solver.problem().rho);
  const Eigen::VectorXd& load = solver.exterior_load();
  const Eigen::MatrixXd& A = solver.matrix();
  MonotoneTrace trace;
  const auto source = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd s(w.size());
    for (Eigen::Index a = 0; a < w.size(); ++a) s(a) = rho(a) * nl.f(w(a));
    return s;
  };
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd next = shifted.solve(source(v) + nl.shift * v + load);
    if (!next.allFinite()) throw NumericError("monotone_iterate: non-finite iterate");
    const Eigen::VectorXd step = next - v;
    trace.increments.push_back(sup_abs(step));
    trace.worst_order_violation =
        std::max(trace.worst_order_violation, (-direction * step).maxCoeff());
    v = next;
    trace.residuals.push_back(sup_abs(A * v - source(v) - load));
    if (trace.increments.back() <= opt.tolerance * std::max(1.0, sup_abs(v))) {
      trace.converged = true;
      return trace;
    }
  }
  std::ostringstream msg;
  msg << "monotone_iterate: no convergence after " << opt.max_iterations << " iterations; residuals";
  for (std::size_t k = trace.residuals.size() > 5 ? trace.residuals.size() - 5 : 0; k < trace.residuals.size(); ++k) {
    msg << ' ' << trace.residuals[k];
  }
  throw NumericError(msg.str());
}

}  // namespace

MonotoneResult monotone_iterate(const DirichletSolver& solver, const Nonlinearity& nl, const Field& lower,
                                const Field& upper, const MonotoneOptions& options) {
  Eigen::VectorXd lo = solver.restrict_to_ball(lower);
  Eigen::VectorXd hi = solver.restrict_to_ball(upper);
  if ((lo - hi).maxCoeff() > options.order_slack) {
    throw PreconditionError("monotone_iterate: lower barrier exceeds the upper one inside the ball");
  }
  if (nl.shift < 0.0) throw ConfigError("monotone_iterate: shift must be nonnegative");
  MonotoneResult out;
  const Eigen::VectorXd rho = solver.restrict_to_ball(solver.problem().rho);
  const auto defect = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd d = solver.matrix() * v - solver.exterior_load();
    for (Eigen::Index a = 0; a < v.size(); ++a) d(a) -= rho(a) * nl.f(v(a));
    return d;
  };
  out.lower_barrier_defect = defect(lo).maxCoeff();
  out.upper_barrier_defect = defect(hi).minCoeff();

  Eigen::MatrixXd shifted = solver.matrix();
  shifted.diagonal().array() += nl.shift;
  const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw NumericError("monotone_iterate: factorization failed");

  out.lower_trace = run_sequence(solver, llt, nl, lo, +1.0, options);
  out.upper_trace = run_sequence(solver, llt, nl, hi, -1.0, options);
  out.from_lower = solver.extend(lo);
  out.from_upper = solver.extend(hi);
  out.gap = sup_abs(lo - hi);
  return out;
}

Barriers sublinear_barriers(const BallProblem& problem, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sublinear barriers: sigma must lie in (0, 1)");
  for (std::size_t i = 0; i < problem.grid.size(); ++i) {
    if (problem.exterior[i] != 0.0 && std::abs(problem.grid.coordinate(i)) >= problem.R) {
      throw PreconditionError("sublinear barriers: exterior data must vanish");
    }
  }
  const GridSpec& g = problem.grid;
  Barriers b;
  // core ball: rho >= rho_max / 2 on every node closer to the centre
  double rho_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.coordinate(i)) < problem.R) rho_max = std::max(rho_max, problem.rho[i]);
  }
  if (!(rho_max > 0.0)) throw PreconditionError("sublinear barriers: rho vanishes on the ball");
  b.core_radius = problem.R;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = std::abs(g.coordinate(i));
    if (r < problem.R && problem.rho[i] < 0.5 * rho_max) b.core_radius = std::min(b.core_radius, r);
  }
  if (b.core_radius <= 2.0 * g.spacing()) {
    throw PreconditionError("sublinear barriers: rho is not bounded below near the centre of the ball");
  }
  const EigenPair ep = principal_eigenpair(make_ball_problem(g, b.core_radius, problem.alpha, problem.rho));
  b.lambda = ep.lambda;
  // largest eps with lambda (eps sup phi)^{1-sigma} <= 1, less a relative 1e-9
  // so the eigen-residual cannot flip the sign of the defect
  b.epsilon = (1.0 - 1e-9) * std::pow(ep.lambda, -1.0 / (1.0 - sigma)) / ep.phi.max();
  b.lower = ep.phi.scaled(b.epsilon);

  const DirichletSolver solver(problem);
  const Field U = solver.solve(problem.rho.scaled(0.5));
  // equality holds at sup U; the relative 1e-9 keeps the defect sign under rounding
  b.C = (1.0 + 1e-9) * std::pow(2.0 * std::pow(U.max(), sigma), 1.0 / (1.0 - sigma));
  b.upper = U.scaled(b.C);
  return b;
}

UniquenessVerdict uniqueness_check(const DirichletSolver& solver, const Nonlinearity& nl, const Field& w1,
                                   const Field& w2, double tolerance, double residual_tolerance) {
  const Eigen::VectorXd a = solver.restrict_to_ball(w1);
  const Eigen::VectorXd b = solver.restrict_to_ball(w2);
  if (a.minCoeff() <= 0.0 || b.minCoeff() <= 0.0) {
    throw PreconditionError("uniqueness_check: candidates must be positive inside the ball");
  }
  UniquenessVerdict v;
  v.residual_1 = nonlinear_residual(solver, nl, w1);
  v.residual_2 = nonlinear_residual(solver, nl, w2);
  if (v.residual_1 > residual_tolerance || v.residual_2 > residual_tolerance) {
    std::ostringstream msg;
    msg << "uniqueness_check: candidate residuals " << v.residual_1 << ", " << v.residual_2
        << " exceed " << residual_tolerance;
    throw PreconditionError(msg.str());
  }
  v.lambda_star = b.cwiseQuotient(a).minCoeff();
  v.lambda_star_reverse = a.cwiseQuotient(b).minCoeff();
  v.relative_difference = sup_abs(a - b) / sup_abs(a);
  v.unique = v.relative_difference < tolerance;
  return v;
}

WholeSpaceResult whole_space_sublinear_solve(const WeightSpec& w, double sigma, double alpha,
                                             const GridSpec& grid, const std::vector<double>& radii) {
  if (grid.dimension() != 1) throw ConfigError("whole-space solve: n = 1 only");
  if (radii.empty()) throw ConfigError("whole-space solve: empty radius schedule");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw ConfigError("whole-space solve: radii must increase");
  }
  const PropertyHReport H = check_property_H(w, alpha, 1, {1.0, 0.25 * grid.half_width()});
  if (!H.holds) throw PreconditionError("whole-space solve: property (H) fails: " + H.divergence_evidence);

  WholeSpaceResult out;
  out.radii = radii;
  const Field rho = sample_weight(w, grid);
  out.U = riesz_potential(rho.scaled(0.5), alpha);
  out.C = std::pow(2.0 * std::pow(out.U.max(), sigma), 1.0 / (1.0 - sigma));
  const Nonlinearity nl = power_nonlinearity(sigma);
  for (double R : radii) {
    const BallProblem problem = make_ball_problem(grid, R, alpha, rho);
    const Barriers b = sublinear_barriers(problem, sigma);
    const DirichletSolver solver(problem);
    Field u = monotone_iterate(solver, nl, b.lower, b.upper).from_lower;
    if (!out.solutions.empty()) {
      const Field& prev = out.solutions.back();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        out.worst_monotonicity_violation = std::max(out.worst_monotonicity_violation, prev[i] - u[i]);
      }
    }
    double ratio = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (inside(grid, R, i)) ratio = std::max(ratio, u[i] / (out.C * out.U[i]));
    }
    out.bound_ratios.push_back(ratio);
    out.sup_norms.push_back(u.max());
    out.solutions.push_back(std::move(u));
  }
  if (out.worst_monotonicity_violation > 1e-8 * out.sup_norms.back()) {
    throw NumericError("whole-space solve: u_R decreased in R by " +
                       std::to_string(out.worst_monotonicity_violation));
  }
  return out;
}

}  // namespace fraclab
