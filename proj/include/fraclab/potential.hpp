#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Nonnegative weight rho: a closed-form radial profile, grid samples, or both.
struct WeightSpec {
  std::function<double(double)> radial;
  std::optional<Field> field;
  std::string description;
};

WeightSpec radial_weight(std::function<double(double)> profile, std::string description);
WeightSpec grid_weight(Field samples, std::string description);

/// Samples the weight on a grid (the radial profile wins if both are present).
Field sample_weight(const WeightSpec& w, const GridSpec& grid);

/// Value of the discrete Riesz kernel c_{n,alpha} |x|^{alpha-n} at distance r.
/// At r = 0 the kernel is replaced by its average over the origin cell (in
/// n >= 2, over the ball of volume h^n).
double riesz_kernel_sample(const GridSpec& grid, double alpha, double r);

/// I_alpha f = c_{n,alpha} |x|^{alpha-n} * f by zero-padded FFT convolution.
/// Throws DomainError for alpha >= n.
Field riesz_potential(const Field& f, double alpha);

/// Same discrete sum evaluated pair by pair at the given nodes (O(N^n) each).
std::vector<double> riesz_potential_direct(const Field& f, double alpha,
                                           const std::vector<std::size_t>& targets);

/// ||L I_alpha f - (f - mean f)||_2 / ||f||_2 over |x| <= X/2 with the spectral
/// operator.  The periodic operator annihilates constants, so L I_alpha f can
/// only reproduce f up to its mean.
double riesz_inversion_residual(const Field& f, double alpha);

struct PropertyHReport {
  bool holds = false;
  /// sup over probes of the largest partial integral.
  double sup_estimate = 0.0;
  std::vector<double> probe_points;
  /// For each probe, U restricted to |y| <= R, 2R, 4R.
  std::vector<std::vector<double>> partial_integrals;
  std::vector<double> partial_radii;
  bool converged = true;
  std::string divergence_evidence;
};

/// Decides whether U(x) = int rho(y) |x - y|^{alpha-n} dy is bounded by
/// evaluating it at the origin and at |x| = each probe radius.  Radial weights
/// use the exact spherical mean of |x - y|^{alpha-n} and one-dimensional
/// quadrature; grid weights use partial grid sums over |y| <= X/4, X/2, X.
/// Throws DomainError for alpha >= n or a negative weight.
PropertyHReport check_property_H(const WeightSpec& w, double alpha, int n,
                                 const std::vector<double>& probe_radii);

/// Spherical mean int_{S^{n-1}} |x - s omega|^{alpha-n} d omega at |x| = r.
double spherical_riesz_mean(int n, double alpha, double r, double s);

struct BallSequence {
  std::vector<double> radii;
  std::vector<Field> solutions;
  Field limit;  ///< riesz_potential(f, alpha)
  std::vector<double> sup_norms;
  /// sup over |x| <= inner_radius of |u_R - u_inf| / u_inf.
  std::vector<double> inner_errors;
  /// Largest decrease max(u_{R_prev} - u_R) over the grid, >= 0.
  double worst_monotonicity_violation = 0.0;
};

/// Solves the zero-exterior problems L u = f on each ball of the schedule and
/// compares with the Riesz potential.  n = 1.  Throws ConfigError if a ball
/// leaves the box or the schedule is not increasing.
BallSequence minimal_solution_via_balls(const Field& f, double alpha, const std::vector<double>& radii,
                                        double inner_radius);

}  // namespace fraclab
