#pragma once

#include <array>
#include <span>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Order and dimension of an alpha-stable heat kernel.
struct KernelSpec {
  double alpha = 1.0;
  int n = 1;
};

/// Validates 0 < alpha <= 2 and n in {1, 2, 3}.
KernelSpec make_kernel_spec(int n, double alpha);

struct KernelValue {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// G_alpha(x, t) at radius r = |x|.
///
/// alpha = 1 and alpha = 2 use the Poisson and Gauss closed forms.  Other
/// orders invert e^{-t|xi|^alpha}: n = 1 and n = 3 reduce to one-sided cosine
/// and sine transforms (Ooura's double-exponential rule), switching to the
/// large-|x| expansion once |x| t^{-1/alpha} >= 20; n = 2 integrates against
/// J0 on panels and is only accurate to about 1e-9 relative for moderate r.
KernelValue kernel_eval(const KernelSpec& spec, double r, double t);
KernelValue kernel_eval(const KernelSpec& spec, const std::array<double, 3>& x, double t);

/// Always takes the Fourier-inversion route, also for alpha in {1, 2}.
KernelValue kernel_fourier_inversion(const KernelSpec& spec, double r, double t);

/// t^{-n/alpha} (1 + |t^{-1/alpha} x|^2)^{-(n+alpha)/2}.
double kernel_profile(const KernelSpec& spec, double r, double t);

/// Integral of G(., t) over R^n: Gauss panels in r up to t^{1/alpha}, then in
/// log r out to where the power tail has shed all but e^{-40} of its mass.
double kernel_mass(const KernelSpec& spec, double t);

/// h^n times the sum of kernel_eval over the nodes of a grid.  Loses the mass
/// outside the box and anything the grid does not resolve.
double kernel_grid_mass(const KernelSpec& spec, const GridSpec& grid, double t);

/// e^{-tL} applied through the multiplier e^{-t|xi|^alpha}.
Field semigroup_apply(const Field& u0, double t, double alpha);

/// Kernel of e^{-tL} on the periodic box, sampled on the grid.  Closed forms
/// (Poisson image sum, Gaussian images) for alpha in {1, 2}; otherwise the
/// Fourier series truncated at the grid's frequencies.
Field periodic_kernel(const GridSpec& grid, double alpha, double t);

struct SemigroupCheck {
  /// sup |e^{-sL} e^{-tL} u0 - e^{-(t+s)L} u0| through the multiplier.
  double spectral_error = 0.0;
  /// sup |P_t * P_s - P_{t+s}| with the convolution done in physical space.
  double convolution_error = 0.0;
};

SemigroupCheck check_semigroup(const GridSpec& grid, double alpha, double t, double s);

struct TailEstimate {
  /// Least-squares constant (the sample mean).
  double constant = 0.0;
  /// Intercept of c + d |x|^{-alpha}, the leading correction at large |x|.
  double extrapolated_constant = 0.0;
  /// max relative deviation of the samples from `constant`.
  double plateau_quality = 0.0;
  bool converged = true;
  std::vector<double> radii;
  std::vector<double> scaled_values;
};

/// Fits |x|^{n+alpha} G(x, 1) on log-spaced radii in [r_lo, r_hi].  A plateau worse than 20% is reported as
/// unconverged.  alpha = 2 is a DomainError.
TailEstimate estimate_tail_constant(const KernelSpec& spec, double r_lo, double r_hi,
                                    int samples = 17);
/// Default window [20, 800].
TailEstimate estimate_tail_constant(const KernelSpec& spec);

struct BoundSample {
  double r = 0.0;
  double t = 1.0;
};

struct BoundEstimate {
  double empirical_B = 1.0;
  double min_ratio = 1.0;
  double max_ratio = 1.0;
};

/// max over samples of max(ratio, 1/ratio), ratio = G / kernel_profile.
BoundEstimate check_two_sided_bound(const KernelSpec& spec, std::span<const BoundSample> samples);

struct MassProbe {
  std::vector<double> times;
  std::vector<double> values;
  /// Set when some t^{1/alpha} exceeded X/4.
  bool truncation_flag = false;
};

/// t^{n/alpha} sup(e^{-tL} v) over a schedule of times.
MassProbe asymptotic_mass_probe(const Field& v, std::span<const double> times, double alpha);

}  // namespace fraclab
