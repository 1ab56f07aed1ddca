#include "fraclab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclab/constants.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/fractional_laplacian.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

namespace {

using std::numbers::pi;

void require_riesz_order(double alpha, int n) {
  if (!(alpha > 0.0)) throw ConfigError("Riesz potential: alpha must be positive");
  if (alpha >= n) throw DomainError("Riesz potential: needs alpha < n");
}

// Padded grid of twice the extent; original node j sits at j + N/2 per axis.
std::size_t padded_index(const GridSpec& g, const GridSpec& padded, std::size_t flat) {
  auto idx = g.unflatten(flat);
  for (int a = 0; a < g.dimension(); ++a) idx[a] += g.points_per_axis() / 2;
  return padded.flatten(idx);
}

}  // namespace

WeightSpec radial_weight(std::function<double(double)> profile, std::string description) {
  return {std::move(profile), std::nullopt, std::move(description)};
}

WeightSpec grid_weight(Field samples, std::string description) {
  return {nullptr, std::move(samples), std::move(description)};
}

Field sample_weight(const WeightSpec& w, const GridSpec& grid) {
  if (w.radial) return Field::sample_radial(grid, w.radial);
  if (w.field) {
    if (!(w.field->grid() == grid)) throw ConfigError("weight: samples live on a different grid");
    return *w.field;
  }
  throw ConfigError("weight: neither a profile nor samples were given");
}

double riesz_kernel_sample(const GridSpec& grid, double alpha, double r) {
  const int n = grid.dimension();
  const double c = riesz_constant(n, alpha);
  if (r > 0.0) return c * std::pow(r, alpha - n);
  const double ball_volume = unit_sphere_area(n) / n;
  const double r0 = std::pow(grid.cell_volume() / ball_volume, 1.0 / n);
  return c * n * std::pow(r0, alpha - n) / alpha;
}

Field riesz_potential(const Field& f, double alpha) {
  const GridSpec& g = f.grid();
  require_riesz_order(alpha, g.dimension());
  const GridSpec padded = make_grid(g.dimension(), 2.0 * g.half_width(), 2 * g.points_per_axis());
  std::vector<double> fp(padded.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) fp[padded_index(g, padded, i)] = f[i];
  const Field kernel =
      Field::sample_radial(padded, [&](double r) { return riesz_kernel_sample(padded, alpha, r); });
  const Field conv = convolve(kernel, Field(padded, std::move(fp)));
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = conv[padded_index(g, padded, i)];
  return Field(g, std::move(out));
}

std::vector<double> riesz_potential_direct(const Field& f, double alpha,
                                           const std::vector<std::size_t>& targets) {
  const GridSpec& g = f.grid();
  require_riesz_order(alpha, g.dimension());
  return kernels::omp::radial_pair_sum(g, f.values(), targets,
                                       [&](double r) { return riesz_kernel_sample(g, alpha, r); });
}

double riesz_inversion_residual(const Field& f, double alpha) {
  const GridSpec& g = f.grid();
  const Field Lu = frac_laplacian_spectral(riesz_potential(f, alpha), alpha);
  const double mean = f.mean();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    bool inner = true;
    for (int a = 0; a < g.dimension(); ++a) inner = inner && std::abs(x[a]) <= 0.5 * g.half_width();
    if (!inner) continue;
    const double d = Lu[i] - (f[i] - mean);
    num += d * d;
    den += f[i] * f[i];
  }
  return std::sqrt(num / den);
}

namespace {

// Spherical mean with the distance d = |r - s| supplied separately, so callers
// near the diagonal can pass it without cancellation.
double spherical_mean(int n, double alpha, double r, double s, double d) {
  if (r == 0.0 || s == 0.0) return unit_sphere_area(n) * std::pow(std::max(r, s), alpha - n);
  switch (n) {
    case 1: return std::pow(d, alpha - 1.0) + std::pow(r + s, alpha - 1.0);
    case 3: {
      if (alpha == 1.0) return 2.0 * pi * std::log((r + s) / d) / (r * s);
      return 2.0 * pi * (std::pow(r + s, alpha - 1.0) - std::pow(d, alpha - 1.0)) / (r * s * (alpha - 1.0));
    }
    default: {
      // the log singularity at d = 0 is integrable in s; the floor only keeps
      // d^2 from underflowing
      d = std::max(d, 1e-100 * r);
      boost::math::quadrature::tanh_sinh<double> ts;
      const auto f = [&](double th) {
        const double sn = std::sin(0.5 * th);
        return std::pow(d * d + 4.0 * r * s * sn * sn, 0.5 * (alpha - 2.0));
      };
      return 2.0 * ts.integrate(f, 0.0, pi, 1e-12);
    }
  }
}

}  // namespace

double spherical_riesz_mean(int n, double alpha, double r, double s) {
  return spherical_mean(n, alpha, r, s, std::abs(r - s));
}

namespace {

// int_a^b rho(s) s^{n-1} M(r, s) ds.  Tanh-sinh copes with the |r - s|^{alpha-1}
// singularity (kept at an endpoint) and the s^{alpha-1} one at s = 0; beyond
// that, Gauss panels in log s.
double radial_segment(const WeightSpec& w, int n, double alpha, double r, double a, double b) {
  if (b <= a) return 0.0;
  const auto integrand = [&](double s, double d) {
    const double rho = w.radial(s);
    if (rho == 0.0) return 0.0;
    if (r == 0.0) return rho * unit_sphere_area(n) * std::pow(s, alpha - 1.0);
    return rho * std::pow(s, n - 1) * spherical_mean(n, alpha, r, s, d);
  };
  if (a == 0.0 || (r > 0.0 && b <= 2.0 * r)) {
    // xc is the signed distance to the nearer endpoint; use it for |r - s| there
    const auto f = [&](double s, double xc) {
      const bool near_a = s < 0.5 * (a + b);
      const double endpoint = near_a ? a : b;
      return integrand(s, endpoint == r ? std::abs(xc) : std::abs(r - s));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, 1e-10);
  }
  const double la = std::log(a), lb = std::log(b);
  const int panels = std::max(1, static_cast<int>(std::ceil((lb - la) / 0.25)));
  return numerics::integrate_panels(
      [&](double u) {
        const double s = std::exp(u);
        return integrand(s, std::abs(r - s)) * s;
      },
      la, lb, panels);
}

// Partial integrals of U at |x| = r over |y| <= R_k.
std::vector<double> radial_partials(const WeightSpec& w, int n, double alpha, double r,
                                    const std::vector<double>& radii) {
  std::vector<double> out;
  double total = 0.0;
  double from = 0.0;
  std::vector<double> breaks;
  if (r > 0.0) {
    breaks = {r, 2.0 * r};
  } else {
    breaks = {1.0};
  }
  for (double R : radii) {
    for (double b : breaks) {
      if (b > from && b < R) {
        total += radial_segment(w, n, alpha, r, from, b);
        from = b;
      }
    }
    total += radial_segment(w, n, alpha, r, from, R);
    from = R;
    out.push_back(total);
  }
  return out;
}

std::vector<double> grid_partials(const Field& rho, double alpha, std::size_t target,
                                  const std::vector<double>& radii) {
  const GridSpec& g = rho.grid();
  const double c = riesz_constant(g.dimension(), alpha);
  std::vector<double> out;
  for (double R : radii) {
    std::vector<double> masked(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.radius(i) <= R) masked[i] = rho[i];
    }
    const std::vector<std::size_t> t{target};
    out.push_back(kernels::omp::radial_pair_sum(g, masked, t, [&](double s) {
      return riesz_kernel_sample(g, alpha, s) / c;
    })[0]);
  }
  return out;
}

}  // namespace

PropertyHReport check_property_H(const WeightSpec& w, double alpha, int n,
                                 const std::vector<double>& probe_radii) {
  require_riesz_order(alpha, n);
  if (n < 1 || n > 3) throw ConfigError("property (H): n must be 1, 2 or 3");
  PropertyHReport rep;
  rep.probe_points.push_back(0.0);
  for (double r : probe_radii) {
    if (!(r > 0.0)) throw ConfigError("property (H): probe radii must be positive");
    rep.probe_points.push_back(r);
  }
  const double r_max = *std::max_element(rep.probe_points.begin(), rep.probe_points.end());

  std::ostringstream evidence;
  bool all_stable = true;
  if (w.radial) {
    const double base = 1000.0 * std::max(r_max, 1.0);
    rep.partial_radii = {base, 2.0 * base, 4.0 * base};
    for (int k = 0; k <= 400; ++k) {
      const double s = k == 0 ? 0.0 : std::pow(10.0, -3.0 + k * (std::log10(4.0 * base) + 3.0) / 400.0);
      if (w.radial(s) < 0.0) throw DomainError("property (H): weight is negative at r = " + std::to_string(s));
    }
    for (double r : rep.probe_points) rep.partial_integrals.push_back(radial_partials(w, n, alpha, r, rep.partial_radii));
  } else if (w.field) {
    const Field& rho = *w.field;
    const GridSpec& g = rho.grid();
    if (g.dimension() != n) throw ConfigError("property (H): weight samples have the wrong dimension");
    if (rho.min() < 0.0) throw DomainError("property (H): weight has negative samples");
    const double X = g.half_width();
    rep.partial_radii = {0.25 * X, 0.5 * X, X};
    for (double r : rep.probe_points) {
      if (r >= X) throw ConfigError("property (H): probe radius outside the grid");
      auto idx = g.unflatten(g.origin_index());
      idx[0] += static_cast<std::size_t>(std::lround(r / g.spacing()));
      rep.partial_integrals.push_back(grid_partials(rho, alpha, g.flatten(idx), rep.partial_radii));
    }
  } else {
    throw ConfigError("property (H): weight has neither a profile nor samples");
  }

  for (std::size_t k = 0; k < rep.probe_points.size(); ++k) {
    const auto& P = rep.partial_integrals[k];
    const bool finite = std::all_of(P.begin(), P.end(), [](double v) { return std::isfinite(v); });
    rep.converged = rep.converged && finite;
    const double change = finite ? std::abs(P.back() - P.front()) / std::abs(P.back()) : INFINITY;
    if (finite) rep.sup_estimate = std::max(rep.sup_estimate, P.back());
    if (!(change < 0.01)) {
      all_stable = false;
      evidence << "|x|=" << rep.probe_points[k] << ": U_R=" << P[0] << " U_2R=" << P[1] << " U_4R=" << P[2]
               << "; ";
    }
  }
  rep.holds = all_stable && rep.converged;
  rep.divergence_evidence = evidence.str();
  if (!rep.holds) rep.sup_estimate = INFINITY;
  return rep;
}

BallSequence minimal_solution_via_balls(const Field& f, double alpha, const std::vector<double>& radii,
                                        double inner_radius) {
  const GridSpec& g = f.grid();
  if (g.dimension() != 1) throw ConfigError("ball sequence: n = 1 only");
  if (radii.empty()) throw ConfigError("ball sequence: empty radius schedule");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw ConfigError("ball sequence: radii must increase");
  }
  if (radii.back() >= g.half_width()) throw ConfigError("ball sequence: largest ball leaves the box");
  if (f.min() < 0.0) throw PreconditionError("ball sequence: f must be nonnegative");
  const double fmax = f.max();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.coordinate(i)) >= radii.front() && f[i] > 1e-12 * fmax) {
      throw PreconditionError("ball sequence: f must be supported in the smallest ball");
    }
  }

  BallSequence seq;
  seq.radii = radii;
  seq.limit = riesz_potential(f, alpha);
  for (double R : radii) {
    const DirichletSolver solver(make_ball_problem(g, R, alpha));
    Field u = solver.solve(f);
    if (!seq.solutions.empty()) {
      const Field& prev = seq.solutions.back();
      for (std::size_t i = 0; i < g.size(); ++i) {
        seq.worst_monotonicity_violation = std::max(seq.worst_monotonicity_violation, prev[i] - u[i]);
      }
    }
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::abs(g.coordinate(i)) > inner_radius) continue;
      err = std::max(err, std::abs(u[i] - seq.limit[i]) / seq.limit[i]);
    }
    seq.inner_errors.push_back(err);
    seq.sup_norms.push_back(u.max());
    seq.solutions.push_back(std::move(u));
  }
  return seq;
}

}  // namespace fraclab
