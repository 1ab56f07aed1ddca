#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "fraclab/constants.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

namespace {

using boost::multiprecision::cpp_rational;

// Best rational with denominator <= 10^4 if it reproduces x exactly in double,
// otherwise the exact binary value of x.
cpp_rational to_rational(double x) {
  double rem = x;
  boost::multiprecision::cpp_int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int it = 0; it < 40; ++it) {
    const double a = std::floor(rem);
    const boost::multiprecision::cpp_int ai(static_cast<long long>(a));
    const boost::multiprecision::cpp_int h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > 10000) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    const cpp_rational q(h1, k1);
    if (static_cast<double>(q) == x) return q;
    const double frac = rem - a;
    if (frac == 0.0) break;
    rem = 1.0 / frac;
  }
  return cpp_rational(x);
}

std::string rational_string(const cpp_rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

}  // namespace

LadderResult exponent_ladder(double p, double alpha, int n, int K) {
  if (!(p > 0.0)) throw ConfigError("exponent ladder: p must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("exponent ladder: alpha must lie in (0, 2)");
  if (n < 1) throw ConfigError("exponent ladder: n must be positive");
  if (alpha >= n) throw DomainError("exponent ladder: needs alpha < n");
  if (K < 1) throw ConfigError("exponent ladder: K must be positive");

  LadderResult out;
  out.p = p;
  out.alpha = alpha;
  out.n = n;
  out.out_of_range = p > n / (n - alpha);

  const cpp_rational P = to_rational(p), A = to_rational(alpha);
  const cpp_rational p1 = A - n;
  cpp_rational pk = p1;
  cpp_rational power = 1;  // p^{k-1}
  for (int k = 1; k <= K; ++k) {
    if (k > 1) {
      pk = P * pk + A;
      power *= P;
    }
    out.sequence.push_back(static_cast<double>(pk));
    out.exact.push_back(rational_string(pk));
    if (!out.first_positive && pk >= 0) out.first_positive = k;
    if (!out.first_strictly_positive && pk > 0) out.first_strictly_positive = k;

    // p_{k} = p^{k-1} p_1 + alpha (1 + p + ... + p^{k-2}), the geometric sum
    // in closed form when p != 1
    cpp_rational closed;
    if (P == 1) {
      closed = p1 + (k - 1) * A;
    } else {
      closed = power * p1 + A * (1 - power) / (1 - P);
    }
    const cpp_rational diff = closed - pk;
    out.closed_form_error =
        std::max(out.closed_form_error, std::abs(static_cast<double>(diff)));
  }

  if (p < 1.0) {
    out.analytic_limit = alpha / (1.0 - p);
  } else if (p == 1.0) {
    out.analytic_limit = std::numeric_limits<double>::infinity();
  } else {
    // p_{k+1} = p^k [p_1 + alpha (1 - p^{-k}) / (p - 1)]; the bracket tends to
    // p_1 + alpha / (p - 1), positive exactly when p < n / (n - alpha)
    out.analytic_limit = static_cast<double>(p1 + A / (P - 1));
  }
  return out;
}

namespace {

// Log-log interpolation of a positive radial profile, extended by the end slopes.
struct LogProfile {
  std::vector<double> lr, lu;

  double operator()(double r) const {
    const double x = std::log(r);
    const std::size_t m = lr.size();
    std::size_t j;
    if (x <= lr.front()) {
      j = 0;
    } else if (x >= lr.back()) {
      j = m - 2;
    } else {
      j = static_cast<std::size_t>(std::upper_bound(lr.begin(), lr.end(), x) - lr.begin()) - 1;
      j = std::min(j, m - 2);
    }
    const double s = (lu[j + 1] - lu[j]) / (lr[j + 1] - lr[j]);
    return std::exp(lu[j] + s * (x - lr[j]));
  }
};

// Average over the unit sphere, times its area, of g(|x + t omega|) with |x| = r.
template <class G>
double sphere_integral(int n, double r, double t, const G& g) {
  if (n == 1) return g(r + t) + g(std::abs(r - t));
  const auto& rule = numerics::gauss_legendre(32);
  const double lower_area = unit_sphere_area(n - 1);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double th = 0.5 * std::numbers::pi * (rule.nodes[q] + 1.0);
    const double d = std::sqrt(std::max(r * r + t * t + 2.0 * r * t * std::cos(th), 0.0));
    s += rule.weights[q] * g(d) * std::pow(std::sin(th), n - 2);
  }
  return lower_area * 0.5 * std::numbers::pi * s;
}

}  // namespace

BootstrapTrace liouville_bootstrap_probe(double p, double alpha, int n, int iterations,
                                         double seed_amplitude, double theta, int mesh_points) {
  if (!(p > 0.0)) throw ConfigError("bootstrap probe: p must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("bootstrap probe: alpha must lie in (0, 2)");
  if (n < 1 || n > 3) throw ConfigError("bootstrap probe: n must be 1, 2 or 3");
  if (alpha >= n) throw DomainError("bootstrap probe: needs alpha < n");
  if (iterations < 0 || mesh_points < 16) throw ConfigError("bootstrap probe: bad iteration count or mesh");
  if (!(seed_amplitude > 0.0) || theta < 0.0) throw ConfigError("bootstrap probe: bad seed or theta");

  BootstrapTrace out;
  LogProfile u;
  for (int i = 0; i < mesh_points; ++i) {
    const double lr = std::log(1e4) * i / (mesh_points - 1);
    out.radii.push_back(std::exp(lr));
    u.lr.push_back(lr);
    u.lu.push_back(std::log(seed_amplitude) + (alpha - n) * std::log1p(out.radii.back()));
  }
  const auto rho = [&](double r) { return theta == 0.0 ? 1.0 : std::pow(1.0 + r, -theta); };

  std::vector<std::size_t> fit_idx;  // last decade
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    if (out.radii[i] >= 1e3 * (1.0 - 1e-12)) fit_idx.push_back(i);
  }
  const auto record = [&]() {
    std::vector<double> x, y;
    for (std::size_t i : fit_idx) {
      x.push_back(u.lr[i]);
      y.push_back(u.lu[i]);
    }
    const double slope = numerics::linear_fit(x, y).first;
    out.exponents.push_back(slope);
    out.tail_values.push_back(std::exp(u.lu.back()));
    if (!out.divergence_step && slope >= 0.0) out.divergence_step = static_cast<int>(out.exponents.size()) - 1;
  };
  record();

  // int_{|z| <= r/2} rho u^p (|x + z|) |z|^{alpha-n} dz with t = tau^{1/alpha}
  // absorbing the t^{alpha-1} singularity
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(out.radii.size());
    for (std::size_t i = 0; i < out.radii.size(); ++i) {
      const double r = out.radii[i];
      const auto g = [&](double s) { return rho(s) * std::pow(u(std::max(s, 1e-300)), p); };
      const double top = std::pow(0.5 * r, alpha);
      const double val = numerics::integrate_panels(
          [&](double tau) { return sphere_integral(n, r, std::pow(tau, 1.0 / alpha), g); }, 0.0, top, 4);
      next[i] = std::log(val / alpha);
    }
    u.lu = std::move(next);
    record();
  }
  return out;
}

}  // namespace fraclab
