#pragma once

#include <array>
#include <functional>

#include "fraclab/grid.hpp"

namespace fraclab {

/// (-Delta)^{alpha/2} u through the symbol |xi|^alpha, alpha in (0,2].
Field frac_laplacian_spectral(const Field& u, double alpha);

/// Point evaluation of the singular-integral form of the operator.
struct QuadratureOptions {
  /// Outer radius of the explicitly integrated region.
  double cutoff = 50.0;
  /// Geometric panels (ratio 1/2) covering (inner_radius 2^-k, inner_radius]; the
  /// remaining cell next to zero uses the second-order Taylor behaviour.
  int inner_panels = 14;
  /// Uniform panels covering [inner_radius, cutoff].
  int outer_panels = 400;
  /// End of the graded inner region.
  double inner_radius = 1.0;
  /// Length scale of u; a cutoff below 4 times this raises the warning flag.
  double support_scale = 1.0;
  /// Direction nodes per angular coordinate when n > 1.
  int angular_nodes = 32;
};

struct QuadratureResult {
  double value = 0.0;
  /// Set when the cutoff is small compared with the support scale of u.
  bool cutoff_warning = false;
};

using PointFunction = std::function<double(const std::array<double, 3>&)>;

/// Evaluates (C_{n,alpha}/2) int [2u(x) - u(x+z) - u(x-z)] |z|^{-n-alpha} dz at x.
///
/// The radial integral uses 16-point Gauss panels graded geometrically toward
/// z = 0.  Beyond the cutoff u(x +- z) is replaced by its mean over the shell
/// [cutoff, 2 cutoff], which gives a closed-form tail; this is exact for
/// constants and for data that has decayed by the cutoff.
/// alpha must lie in (0,2); the dimension is taken from `n`.
QuadratureResult frac_laplacian_quadrature(const PointFunction& u, const std::array<double, 3>& x,
                                           int n, double alpha,
                                           const QuadratureOptions& options = {});

}  // namespace fraclab
