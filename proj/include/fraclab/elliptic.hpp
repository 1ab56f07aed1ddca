#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/grid.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// Zero-exterior problems on the ball B_R = {|x| < R} of a one-dimensional grid.
//
// Row i of the operator discretizes C_{1,alpha} PV int (u(x_i) - u(x_i + z)) |z|^{-1-alpha} dz.
// On |z| < h the second difference stands in for u'' (weight h^{-alpha}/(2-alpha));
// on |z| >= h u is the piecewise-linear interpolant of the nodal values, integrated
// exactly against |z|^{-1-alpha}.  Nodes outside the ball carry the exterior data,
// which is zero past the edge of the grid.  The resulting matrix is a symmetric
// M-matrix with nonnegative row sums.

struct BallProblem {
  GridSpec grid;
  double R = 1.0;
  double alpha = 0.5;
  /// Weight rho; only its values inside the ball are used.
  Field rho;
  /// Exterior data phi; only its values outside the ball are used.
  Field exterior;
};

/// rho = 1 and phi = 0 unless given.  Throws ConfigError unless n = 1,
/// 0 < alpha < 2, 0 < R < X and the ball holds at most 4096 nodes.
BallProblem make_ball_problem(const GridSpec& grid, double R, double alpha,
                              std::optional<Field> rho = std::nullopt,
                              std::optional<Field> exterior = std::nullopt);

/// Interior-node weights w_k = int psi_k(z) z^{-1-alpha} dz over z >= h for the
/// hat function psi_k centred at k h, k >= 1, divided by h^{-alpha}.
double hat_weight(double alpha, std::size_t k);

class DirichletSolver {
public:
  explicit DirichletSolver(BallProblem problem);

  [[nodiscard]] const BallProblem& problem() const noexcept { return problem_; }
  /// Grid indices of the interior nodes, in matrix order.
  [[nodiscard]] const std::vector<std::size_t>& interior() const noexcept { return interior_; }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return A_; }
  /// Contribution of the exterior data to the right-hand side.
  [[nodiscard]] const Eigen::VectorXd& exterior_load() const noexcept { return load_; }

  /// Solves A u = f + load; returns u on the ball and phi outside.
  [[nodiscard]] Field solve(const Field& f) const;
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Discrete L u at the interior nodes, with u taken from the field everywhere
  /// (the exterior values of u, not phi, enter).
  [[nodiscard]] Eigen::VectorXd apply(const Field& u) const;
  /// Magnitude of the (nonpositive) matrix entry between nodes d apart, d >= 1.
  [[nodiscard]] double coupling(std::size_t d) const { return coupling_[d]; }

  [[nodiscard]] Eigen::VectorXd restrict_to_ball(const Field& u) const;
  /// Interior values from v, phi elsewhere.
  [[nodiscard]] Field extend(const Eigen::VectorXd& v) const;

private:
  BallProblem problem_;
  std::vector<std::size_t> interior_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd load_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  /// h^{-alpha}-scaled coupling to a node at distance d h, d = 0, 1, ...
  std::vector<double> coupling_;
};

/// Matrix of the homogeneous operator (phi = 0, rho = 1) on B_R.
Eigen::MatrixXd assemble_dirichlet_operator(double R, double alpha, const GridSpec& grid);

/// u_R with A u = f + load.  Throws PreconditionError if f < 0 on the ball.
Field solve_linear_dirichlet(const BallProblem& problem, const Field& f);

struct EigenPair {
  double lambda = 0.0;
  /// Positive on the ball, zero outside, sup = 1.
  Field phi;
  /// ||A phi - lambda rho phi||_inf / ||A phi||_inf.
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest lambda with A phi = lambda diag(rho) phi, by inverse iteration.
/// Throws PreconditionError if rho <= 0 somewhere on the ball and NumericError
/// (with the eigenvalue history) if 1e-8 is not reached.
EigenPair principal_eigenpair(const BallProblem& problem, int max_iterations = 1000);

/// f and, when known, a shift M with rho f(u) + M u nondecreasing on the range
/// of interest.  Nondecreasing f needs M = 0.
struct Nonlinearity {
  std::function<double(double)> f;
  double shift = 0.0;
  std::string name;
};

/// u -> u^sigma on u >= 0.
Nonlinearity power_nonlinearity(double sigma);

struct MonotoneTrace {
  std::vector<double> residuals;  ///< ||A u_k - rho f(u_k) - load||_inf
  std::vector<double> increments;  ///< ||u_{k+1} - u_k||_inf
  /// Largest step against the expected direction, >= 0.
  double worst_order_violation = 0.0;
  bool converged = false;
};

struct MonotoneResult {
  Field from_lower;
  Field from_upper;
  MonotoneTrace lower_trace;
  MonotoneTrace upper_trace;
  /// Residual signs of the starting barriers: max(A u - rho f(u) - load) for the
  /// lower one (should be <= 0) and min(...) for the upper one (>= 0).
  double lower_barrier_defect = 0.0;
  double upper_barrier_defect = 0.0;
  /// sup |from_lower - from_upper|.
  double gap = 0.0;
};

struct MonotoneOptions {
  double tolerance = 1e-12;
  int max_iterations = 5000;
  /// Allowed step against the monotone direction.
  double order_slack = 1e-10;
};

/// Iterates u_{k+1} = (A + M)^{-1}(rho f(u_k) + M u_k + load) from each barrier.
/// Throws PreconditionError if lower > upper somewhere on the ball and
/// NumericError (with the residual trace) if either sequence stalls.
MonotoneResult monotone_iterate(const DirichletSolver& solver, const Nonlinearity& nl,
                                const Field& lower, const Field& upper,
                                const MonotoneOptions& options = {});

/// sup_x |A u - rho f(u) - load| over the ball.
double nonlinear_residual(const DirichletSolver& solver, const Nonlinearity& nl, const Field& u);

struct Barriers {
  Field lower;
  Field upper;
  double epsilon = 0.0;
  double C = 0.0;
  double lambda = 0.0;
  /// Radius of the core ball carrying the eigenfunction.
  double core_radius = 0.0;
};

/// Sub- and super-solution pair for Lu = rho u^sigma with phi = 0:
/// lower = eps phi_core, the principal eigenfunction of a core ball on which
/// rho >= rho_max / 2, extended by zero, with the largest eps satisfying
/// lambda (eps sup phi)^{1-sigma} <= 1; upper = C U with A U = rho / 2 and
/// C = (2 (sup U)^sigma)^{1/(1-sigma)}.
Barriers sublinear_barriers(const BallProblem& problem, double sigma);

struct UniquenessVerdict {
  double lambda_star = 0.0;  ///< min over the ball of w2 / w1
  double lambda_star_reverse = 0.0;  ///< min over the ball of w1 / w2
  double relative_difference = 0.0;  ///< sup |w1 - w2| / sup w1
  double residual_1 = 0.0;
  double residual_2 = 0.0;
  bool unique = false;
};

/// Compares two candidate solutions.  Throws PreconditionError if either is
/// nonpositive inside the ball or has residual above residual_tolerance.
UniquenessVerdict uniqueness_check(const DirichletSolver& solver, const Nonlinearity& nl,
                                   const Field& w1, const Field& w2, double tolerance = 1e-6,
                                   double residual_tolerance = 1e-6);

struct WholeSpaceResult {
  std::vector<double> radii;
  std::vector<Field> solutions;
  std::vector<double> sup_norms;
  /// sup of u_R / (C U_inf) over the ball, one per radius.
  std::vector<double> bound_ratios;
  double C = 0.0;
  Field U;  ///< U_inf = I_alpha(rho / 2)
  /// Largest decrease of u_R against the previous radius, >= 0.
  double worst_monotonicity_violation = 0.0;
};

/// Monotone iteration on each ball of the schedule with phi = 0.  The weight
/// is sampled on the grid.  Throws PreconditionError unless property (H) holds.
WholeSpaceResult whole_space_sublinear_solve(const WeightSpec& w, double sigma, double alpha,
                                             const GridSpec& grid, const std::vector<double>& radii);

// Exponent ladder -------------------------------------------------------------

struct LadderResult {
  double p = 0.0;
  double alpha = 0.0;
  int n = 0;
  /// p_1, ..., p_K.
  std::vector<double> sequence;
  /// Exact rationals "a/b", same order, when p and alpha are rational with small denominators.
  std::vector<std::string> exact;
  /// Smallest k with p_k >= 0: from there on the lower bound no longer decays.
  std::optional<int> first_positive;
  /// Smallest k with p_k > 0.
  std::optional<int> first_strictly_positive;
  /// alpha / (1 - p) for p < 1, +inf for p = 1, and for p > 1 the limit
  /// p_1 + alpha / (p - 1) of p_k / p^{k-1}, whose sign decides growth.
  double analytic_limit = 0.0;
  /// max |recursion - closed form| over the sequence.
  double closed_form_error = 0.0;
  /// p > n / (n - alpha).
  bool out_of_range = false;
};

/// p_1 = alpha - n, p_{k+1} = p p_k + alpha, computed in rational arithmetic.
LadderResult exponent_ladder(double p, double alpha, int n, int K);

struct BootstrapTrace {
  std::vector<double> radii;
  /// Fitted decay exponent of each iterate (seed first).
  std::vector<double> exponents;
  /// Iterate values at the largest radius.
  std::vector<double> tail_values;
  /// Index of the first iterate whose fitted exponent is >= 0, if any.
  std::optional<int> divergence_step;
};

/// Iterates u_{k+1}(x) = int_{|x-y| <= |x|/2} u_k(y)^p |x-y|^{alpha-n} dy with
/// rho = 1 (or (1+|y|)^{-theta}) on a log-radial mesh over [1, 1e4] and fits the
/// decay exponent on the last decade.
BootstrapTrace liouville_bootstrap_probe(double p, double alpha, int n, int iterations,
                                         double seed_amplitude = 1.0, double theta = 0.0,
                                         int mesh_points = 512);

}  // namespace fraclab
