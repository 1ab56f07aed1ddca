#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/potential.hpp"

namespace fraclab {

// Mild solutions of u_t + (-Delta)^{alpha/2} u = rho u^p on the periodic box.

struct ProblemSpec {
  double alpha = 1.0;
  double p = 2.0;
  /// Radial profiles survive regridding; grid samples pin the box.
  WeightSpec rho;
  Field u0;
  double horizon = 1.0;
};

/// Validates 0 < alpha <= 2, p > 0, T > 0, u0 >= 0 and not identically zero,
/// and rho >= 0 on the grid of u0.
ProblemSpec make_problem(Field u0, double alpha, double p, WeightSpec rho, double horizon);

/// rho = 1.
WeightSpec unit_weight();

struct StepResult {
  Field u;
  /// h^n times the sum of the negative parts removed by clipping.
  double clipped = 0.0;
};

/// One exponential-Euler step
///   u+ = e^{-dt L} u + dt phi_1(dt L) (rho u^p),  phi_1(z) = (1 - e^{-z}) / z,
/// with both operators applied as Fourier multipliers, followed by clipping
/// at zero.  Throws PreconditionError if u < -1e-12 somewhere and
/// NumericError on non-finite output.
StepResult step_mild(const Field& u, double dt, double alpha, double p, const Field& rho);

/// Reusable stepper holding the FFT plan of one grid.
class MildStepper {
public:
  MildStepper(const GridSpec& grid, double alpha, double p, Field rho);
  ~MildStepper();
  MildStepper(MildStepper&&) noexcept;
  MildStepper& operator=(MildStepper&&) noexcept;

  [[nodiscard]] StepResult step(const Field& u, double dt);
  [[nodiscard]] const GridSpec& grid() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Controls {
  double dt_init = 1e-2;
  double dt_floor = 1e-14;
  double blowup_threshold = 1e8;
  /// Record every k-th accepted step (the first and last are always kept).
  int sample_stride = 1;
  /// Target relative sup-norm growth per step for the predicted step size.
  double growth_target = 5e-3;
  /// Steps growing the sup norm by more than this are rejected and halved.
  double max_growth = 0.1;
  /// dt <= max(dt_init, time_fraction * t).
  double time_fraction = 0.02;
  /// Double the box (same N, coarser h) when more than `outer_mass_limit` of
  /// the mass sits in the outer eighth of each axis.
  bool regrid = true;
  double outer_mass_limit = 0.01;
  /// While the solution is still growing or the Weissler value exceeds 1 at T,
  /// double T up to max_horizon.
  bool extend_horizon = false;
  double max_horizon = 1e4;
  bool weissler_monitor = true;
  long max_steps = 2'000'000;
};

enum class VerdictKind { BlownUp, Survived, Inconclusive };

std::string to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  /// Time the threshold was crossed (BlownUp) or the horizon reached (Survived).
  double time = 0.0;
  std::string reason;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<double> l1_norms;
  /// weissler_bound(u0, t, p, alpha) at the sample times (p > 1 only).
  std::vector<double> weissler_values;
  Verdict verdict;
  long accepted = 0;
  long rejected = 0;
  int regrids = 0;
  double clipped_mass = 0.0;
  /// Horizon in force when the run ended (after any extension).
  double horizon = 0.0;
  /// Mass in the outer eighth exceeded the limit and the box could not grow.
  bool box_warning = false;
  Field final_state;
};

/// Adaptive exponential-Euler integration with blow-up detection.  BlownUp
/// needs the threshold crossing (or dt below the floor) together with norm
/// growth and a step size collapsed to 10% of its largest accepted value.
/// The Weissler value is re-evaluated once t has moved by 0.1%.
EvolutionTrace integrate(const ProblemSpec& spec, const Controls& controls = {});

/// (p-1)^{1/(p-1)} tau^{1/(p-1)} sup e^{-tau L} u0 with the whole-space
/// semigroup: the grid multiplier while tau^{1/alpha} <= X/16, direct
/// summation against the kernel beyond.  Throws DomainError for p <= 1.
double weissler_bound(const Field& u0, double tau, double p, double alpha);

struct CriticalMassProbe {
  double alpha = 1.0;
  int n = 1;
  double p_F = 2.0;
  std::vector<double> s;
  /// ||G_{s+1}^{p_F}||_{L^1} by radial quadrature.
  std::vector<double> norms;
  /// (s+1) ||G_{s+1}^{p_F}||_{L^1}.
  std::vector<double> products;
  double C2 = 0.0;  ///< mean of the products
  double spread = 0.0;  ///< max |product / C2 - 1|
  /// Running sums of the norms over the schedule.
  std::vector<double> partial_sums;
};

/// Throws ConfigError for an empty schedule or s <= -1.
CriticalMassProbe critical_mass_growth_probe(double alpha, int n, const std::vector<double>& s);

struct FujitaCell {
  double p = 0.0;
  double amplitude = 0.0;
  Verdict verdict;
  double T_reached = 0.0;
  double max_sup = 0.0;
  double max_weissler = 0.0;
  bool box_warning = false;
  /// Last recorded sup norms, oldest first.
  std::vector<double> sup_tail;
};

/// Auto-extended horizon capped at 1e16: small critical data blows up only
/// after ln t of order 2 pi / ||u0||_1.
Controls fujita_controls();

struct FujitaOptions {
  GridSpec grid = make_grid(1, 16.0, 2048);
  double horizon = 50.0;
  Controls controls = fujita_controls();
};

struct FujitaSweep {
  double alpha = 1.0;
  int n = 1;
  std::vector<FujitaCell> cells;
  /// (p, a, a') with a < a', a blown up, a' not.
  std::vector<std::string> comparison_violations;
};

/// u0 = a exp(-|x|^2), rho = 1, for every (p, a).  The horizon is extended
/// when controls.extend_horizon is set.
FujitaSweep fujita_sweep(double alpha, const std::vector<double>& ps, const std::vector<double>& amplitudes,
                         const FujitaOptions& options);

}  // namespace fraclab
