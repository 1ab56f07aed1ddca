#pragma once

namespace fraclab {

/// Normalization constants attached to the order alpha in dimension n.
struct Constants {
  double alpha = 0.0;
  int n = 0;
  /// C_{n,alpha} of the singular-integral operator; zero when alpha == 2.
  double operator_constant = 0.0;
  /// c_{n,alpha} of the Riesz kernel c |x|^{alpha-n}; zero when alpha >= n.
  double riesz_constant = 0.0;
};

/// C_{n,alpha} = 2^alpha Gamma((n+alpha)/2) / (pi^{n/2} |Gamma(-alpha/2)|), alpha in (0,2).
double operator_constant(int n, double alpha);

/// c_{n,alpha} = Gamma((n-alpha)/2) / (2^alpha pi^{n/2} Gamma(alpha/2)), 0 < alpha < n.
double riesz_constant(int n, double alpha);

/// Surface area of the unit sphere S^{n-1}.
double unit_sphere_area(int n);

/// Fills both constants where defined.  Throws ConfigError for alpha outside (0,2]
/// or n outside {1,2,3}.
Constants make_constants(int n, double alpha);

}  // namespace fraclab
