#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Forward/inverse real FFT pair for one grid.
///
/// Plans are created under a process-wide lock (the FFTW planner is not
/// reentrant).  A plan owns its work buffers, so one instance must not be used
/// from two threads at once; create one per thread or per call instead.
class FourierPlan {
public:
  explicit FourierPlan(const GridSpec& grid);
  ~FourierPlan();
  FourierPlan(const FourierPlan&) = delete;
  FourierPlan& operator=(const FourierPlan&) = delete;
  FourierPlan(FourierPlan&&) noexcept;
  FourierPlan& operator=(FourierPlan&&) noexcept;

  [[nodiscard]] const GridSpec& grid() const noexcept;
  /// Number of half-spectrum coefficients (N^{n-1} (N/2 + 1)).
  [[nodiscard]] std::size_t spectrum_size() const noexcept;

  /// |xi| for every half-spectrum coefficient, in storage order.
  [[nodiscard]] const std::vector<double>& frequency_magnitudes() const noexcept;

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  /// Inverse transform including the 1/N^n normalization.
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Multiplier m(|xi|) tabulated over the half spectrum of a plan.
std::vector<double> tabulate_multiplier(const FourierPlan& plan,
                                        const std::function<double(double)>& m);

/// Inverse transform of m(|xi|) u_hat(xi).  Throws NumericError if m is not
/// finite at some grid frequency.
Field apply_multiplier(const Field& u, const std::function<double(double)>& m);

/// Same, reusing a plan and a pre-tabulated multiplier.
Field apply_multiplier(FourierPlan& plan, const Field& u, std::span<const double> table);

/// Periodic convolution scaled by h^n, approximating int u(x - y) v(y) dy.
Field convolve(const Field& u, const Field& v);

/// 1/h^n at the origin node, zero elsewhere.
Field discrete_delta(const GridSpec& grid);

}  // namespace fraclab
