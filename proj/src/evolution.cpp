#include "fraclab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fraclab/constants.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/fourier.hpp"
#include "fraclab/heat_kernel.hpp"
#include "fraclab/numerics.hpp"

namespace fraclab {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("evolution: alpha must lie in (0, 2]");
}

double phi1(double z) { return z < 1e-8 ? 1.0 - 0.5 * z : -std::expm1(-z) / z; }

}  // namespace

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::BlownUp: return "BlownUp";
    case VerdictKind::Survived: return "Survived";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

WeightSpec unit_weight() { return radial_weight([](double) { return 1.0; }, "rho = 1"); }

ProblemSpec make_problem(Field u0, double alpha, double p, WeightSpec rho, double horizon) {
  require_alpha(alpha);
  if (!(p > 0.0)) throw ConfigError("evolution: p must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("evolution: horizon must be positive");
  if (u0.size() == 0) throw ConfigError("evolution: empty initial data");
  if (u0.min() < 0.0) throw PreconditionError("evolution: u0 must be nonnegative");
  if (u0.max() == 0.0) throw PreconditionError("evolution: u0 vanishes identically");
  if (sample_weight(rho, u0.grid()).min() < 0.0) throw PreconditionError("evolution: rho must be nonnegative");
  return {alpha, p, std::move(rho), std::move(u0), horizon};
}

// Stepper ---------------------------------------------------------------------

struct MildStepper::Impl {
  FourierPlan plan;
  double p;
  Field rho;
  std::vector<double> symbol;  // |xi|^alpha
  std::vector<std::complex<double>> su, sn;
  std::vector<double> work;

  Impl(const GridSpec& g, double alpha, double p_, Field rho_) : plan(g), p(p_), rho(std::move(rho_)) {
    for (double k : plan.frequency_magnitudes()) symbol.push_back(std::pow(k, alpha));
  }
};

MildStepper::MildStepper(const GridSpec& grid, double alpha, double p, Field rho) {
  require_alpha(alpha);
  if (!(rho.grid() == grid)) throw ConfigError("MildStepper: rho lives on another grid");
  impl_ = std::make_unique<Impl>(grid, alpha, p, std::move(rho));
}

MildStepper::~MildStepper() = default;
MildStepper::MildStepper(MildStepper&&) noexcept = default;
MildStepper& MildStepper::operator=(MildStepper&&) noexcept = default;

const GridSpec& MildStepper::grid() const noexcept { return impl_->plan.grid(); }

StepResult MildStepper::step(const Field& u, double dt) {
  Impl& m = *impl_;
  if (!(dt > 0.0)) throw DomainError("step_mild: dt must be positive");
  if (!(u.grid() == m.plan.grid())) throw ConfigError("step_mild: field lives on another grid");
  if (u.min() < -1e-12) throw PreconditionError("step_mild: u is negative");
  const std::size_t N = u.size();
  m.work.resize(N);
  for (std::size_t i = 0; i < N; ++i) m.work[i] = m.rho[i] * std::pow(std::max(u[i], 0.0), m.p);
  m.plan.forward(u.values(), m.su);
  m.plan.forward(m.work, m.sn);
  for (std::size_t s = 0; s < m.su.size(); ++s) {
    const double z = dt * m.symbol[s];
    m.su[s] = std::exp(-z) * m.su[s] + dt * phi1(z) * m.sn[s];
  }
  std::vector<double> out;
  m.plan.inverse(m.su, out);
  StepResult r;
  double neg = 0.0;
  for (double& v : out) {
    if (!std::isfinite(v)) throw NumericError("step_mild: non-finite value");
    if (v < 0.0) {
      neg -= v;
      v = 0.0;
    }
  }
  r.clipped = neg * u.grid().cell_volume();
  r.u = Field(u.grid(), std::move(out));
  return r;
}

StepResult step_mild(const Field& u, double dt, double alpha, double p, const Field& rho) {
  MildStepper s(u.grid(), alpha, p, rho);
  return s.step(u, dt);
}

// Weissler monitor --------------------------------------------------------------

namespace {

// G(x, t) ~ c t |x|^{-n-alpha} for |x| >> t^{1/alpha}; zero for alpha = 2.
double tail_constant(int n, double alpha) {
  if (alpha >= 2.0) return 0.0;
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (n + alpha)) /
         (std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(1.0 - 0.5 * alpha));
}

// sum over k != 0 of |x + 2 k X|^{-n-alpha}, lattice truncated at |k|_inf <= K
// with the remainder replaced by its integral
double image_sum(const std::array<double, 3>& x, int n, double X, double alpha) {
  const int K = n == 1 ? 64 : (n == 2 ? 8 : 3);
  const double e = -0.5 * (n + alpha);
  double s = 0.0;
  std::array<int, 3> k{-K, n > 1 ? -K : 0, n > 2 ? -K : 0};
  while (true) {
    if (k[0] != 0 || k[1] != 0 || k[2] != 0) {
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (x[a] + 2.0 * k[a] * X) * (x[a] + 2.0 * k[a] * X);
      s += std::pow(r2, e);
    }
    int a = 0;
    while (a < n && ++k[a] > K) k[a++] = -K;
    if (a == n) break;
  }
  // the cube |k|_inf <= K + 1/2 replaced by the ball of equal volume
  const double radius = (K + 0.5) * 2.0 * std::pow(n / unit_sphere_area(n), 1.0 / n);
  return s + unit_sphere_area(n) * std::pow(2.0 * X, -n - alpha) * std::pow(radius, -alpha) / alpha;
}

// G(y, 1) on [0, 20] at spacing 1/200 with Catmull-Rom interpolation; the
// large-y expansion inside kernel_eval covers the rest cheaply.
class KernelTable {
public:
  KernelTable(int n, double alpha) : spec_(make_kernel_spec(n, alpha)) {
    values_.resize(kCount + 1);
    for (int i = 0; i <= kCount; ++i) values_[i] = kernel_eval(spec_, i * kStep, 1.0).value;
  }

  double operator()(double y) const {
    if (y >= kCount * kStep) return kernel_eval(spec_, y, 1.0).value;
    const double s = y / kStep;
    const int i = static_cast<int>(s);
    const double f = s - i;
    const auto at = [&](int j) { return values_[std::min(std::abs(j), kCount)]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  }

private:
  static constexpr int kCount = 4000;
  static constexpr double kStep = 0.005;
  KernelSpec spec_;
  std::vector<double> values_;
};

const KernelTable& kernel_table(int n, double alpha) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<KernelTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, alpha}];
  if (!slot) slot = std::make_unique<KernelTable>(n, alpha);
  return *slot;
}

double semigroup_sup(const Field& u0, double tau, double alpha) {
  const GridSpec& g = u0.grid();
  if (std::pow(tau, 1.0 / alpha) <= g.half_width() / 16.0) {
    // torus value minus the far-field images c tau m |x + 2kX|^{-n-alpha}
    const Field v = semigroup_apply(u0, tau, alpha);
    const double A = tail_constant(g.dimension(), alpha) * tau * u0.l1_norm();
    const double top = v.max();
    double best = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (v[i] < 0.5 * top) continue;
      best = std::max(best, v[i] - (A > 0.0 ? A * image_sum(g.point(i), g.dimension(), g.half_width(), alpha) : 0.0));
    }
    return best;
  }
  const KernelTable& G = kernel_table(g.dimension(), alpha);
  const double top = u0.max();
  std::vector<std::size_t> sources, targets;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u0[i] > 1e-14 * top) sources.push_back(i);
    if (u0[i] >= 1e-2 * top) targets.push_back(i);
  }
  const double scale = std::pow(tau, -1.0 / alpha);
  const double amp = std::pow(tau, -g.dimension() / alpha) * g.cell_volume();
  double best = 0.0;
  for (std::size_t t : targets) {
    const auto xt = g.point(t);
    double s = 0.0;
    for (std::size_t j : sources) {
      const auto xj = g.point(j);
      double r2 = 0.0;
      for (int a = 0; a < g.dimension(); ++a) r2 += (xt[a] - xj[a]) * (xt[a] - xj[a]);
      s += G(std::sqrt(r2) * scale) * u0[j];
    }
    best = std::max(best, amp * s);
  }
  return best;
}

}  // namespace

double weissler_bound(const Field& u0, double tau, double p, double alpha) {
  require_alpha(alpha);
  if (!(p > 1.0)) throw DomainError("weissler_bound: needs p > 1");
  if (!(tau > 0.0)) throw DomainError("weissler_bound: tau must be positive");
  if (u0.max() <= 0.0) return 0.0;
  const double e = 1.0 / (p - 1.0);
  return std::pow(p - 1.0, e) * std::pow(tau, e) * semigroup_sup(u0, tau, alpha);
}

// Integration ---------------------------------------------------------------------

namespace {

double outer_fraction(const Field& u) {
  const GridSpec& g = u.grid();
  const double edge = 0.875 * g.half_width();
  double outer = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    bool out = false;
    for (int a = 0; a < g.dimension(); ++a) out = out || std::abs(x[a]) > edge;
    total += u[i];
    if (out) outer += u[i];
  }
  return total > 0.0 ? outer / total : 0.0;
}

// Same N on a box twice as wide.  The far field u ~ A |x|^{-n-alpha} that the
// old torus folded back inside is removed, the old box is restricted to the
// middle half by full weighting, the new shell gets the far field, and the
// images of the new torus are added back; the total is rescaled to the old mass.
Field regrid(const Field& u, double alpha, double A) {
  const GridSpec& g = u.grid();
  const std::size_t N = g.points_per_axis();
  const int n = g.dimension();
  const double X = g.half_width();
  std::vector<double> w(u.values().begin(), u.values().end());
  if (A > 0.0) {
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::max(0.0, w[i] - A * image_sum(g.point(i), n, X, alpha));
  }
  const GridSpec big = make_grid(n, 2.0 * X, N);
  std::vector<double> out(big.size(), 0.0);
  const int combos = n == 1 ? 3 : (n == 2 ? 9 : 27);
  for (std::size_t f = 0; f < big.size(); ++f) {
    const auto j = big.unflatten(f);
    bool inside = true;
    for (int a = 0; a < n; ++a) inside = inside && j[a] >= N / 4 && j[a] < 3 * N / 4;
    if (!inside) {
      if (A > 0.0) {
        const auto x = big.point(f);
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
        out[f] = A * std::pow(r2, -0.5 * (n + alpha));
      }
      continue;
    }
    double s = 0.0;
    for (int c = 0; c < combos; ++c) {
      std::array<std::size_t, 3> idx{0, 0, 0};
      double wt = 1.0;
      int rest = c;
      for (int a = 0; a < n; ++a) {
        const int o = rest % 3 - 1;
        rest /= 3;
        const std::size_t centre = 2 * j[a] - N / 2;
        idx[a] = (centre + N + static_cast<std::size_t>(o + 1) - 1) % N;
        wt *= o == 0 ? 0.5 : 0.25;
      }
      s += wt * w[g.flatten(idx)];
    }
    out[f] = s;
  }
  if (A > 0.0) {
    for (std::size_t f = 0; f < big.size(); ++f) out[f] += A * image_sum(big.point(f), n, 2.0 * X, alpha);
  }
  Field v(big, std::move(out));
  const double m = v.l1_norm();
  return m > 0.0 ? v.scaled(u.l1_norm() / m) : v;
}

}  // namespace

EvolutionTrace integrate(const ProblemSpec& spec, const Controls& c) {
  if (!(c.dt_init > 0.0 && c.dt_floor > 0.0 && c.blowup_threshold > 0.0 && c.growth_target > 0.0 &&
        c.max_growth > 0.0 && c.time_fraction > 0.0 && c.sample_stride >= 1)) {
    throw ConfigError("integrate: controls must be positive");
  }
  EvolutionTrace tr;
  Field u = spec.u0;
  Field rho = sample_weight(spec.rho, u.grid());
  MildStepper stepper(u.grid(), spec.alpha, spec.p, rho);
  const int n = u.grid().dimension();
  const bool localized = outer_fraction(u) <= c.outer_mass_limit;
  const bool can_regrid = c.regrid && static_cast<bool>(spec.rho.radial) && localized;
  const bool monitor = c.weissler_monitor && spec.p > 1.0;

  double t = 0.0, T = spec.horizon;
  double sup = u.max();
  double dt_max_seen = 0.0;
  bool growing = false;
  long since_sample = 0;
  double monitored_at = 0.0, monitored = 0.0;
  // int_0^t ||u||_1 ds fixes the far field c_tail * mass_time * |x|^{-n-alpha}
  double mass_time = 0.0, mass = u.l1_norm();

  const auto record = [&]() {
    // late steps can fall below ulp(t); the newest state replaces the sample
    if (!tr.times.empty() && tr.times.back() == t) {
      tr.times.pop_back();
      tr.sup_norms.pop_back();
      tr.l1_norms.pop_back();
      if (!tr.weissler_values.empty()) tr.weissler_values.pop_back();
    }
    tr.times.push_back(t);
    tr.sup_norms.push_back(sup);
    tr.l1_norms.push_back(u.l1_norm());
    if (monitor) {
      // the monitor depends on t alone; within 0.1% of the last evaluation reuse it
      if (t > 0.0 && t > 1.001 * monitored_at) {
        monitored = weissler_bound(spec.u0, t, spec.p, spec.alpha);
        monitored_at = t;
      }
      tr.weissler_values.push_back(monitored);
    }
    since_sample = 0;
  };
  const auto finish = [&](VerdictKind kind, double when, std::string reason) {
    tr.verdict = {kind, when, std::move(reason)};
    record();
  };
  // t^{n/alpha} sup u at the sample closest to `when`
  const auto scaled_amplitude = [&](double when) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      if (std::abs(tr.times[i] - when) < std::abs(tr.times[k] - when)) k = i;
    }
    return std::pow(tr.times[k], n / spec.alpha) * tr.sup_norms[k];
  };

  record();
  while (true) {
    if (t >= T * (1.0 - 1e-14)) {
      bool extend = false;
      if (c.extend_horizon && T < c.max_horizon) {
        record();
        const bool still_growing = growing || scaled_amplitude(T) > (1.0 + 1e-3) * scaled_amplitude(0.5 * T);
        const bool certified = monitor && tr.weissler_values.back() > 1.0;
        extend = still_growing || certified;
      }
      if (extend) {
        T = std::min(2.0 * T, c.max_horizon);
        continue;
      }
      finish(VerdictKind::Survived, t, "horizon reached");
      break;
    }
    if (tr.accepted >= c.max_steps) {
      finish(VerdictKind::Inconclusive, t, "step budget exhausted");
      break;
    }

    double rate = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) rate = std::max(rate, rho[i] * std::pow(u[i], spec.p));
    rate /= sup;
    double dt = std::max(c.dt_init, c.time_fraction * t);
    if (rate > 0.0) dt = std::min(dt, c.growth_target / rate);
    dt = std::min(dt, T - t);

    StepResult res;
    bool done = false;
    while (true) {
      if (dt < c.dt_floor) {
        if (growing) {
          finish(VerdictKind::BlownUp, t, "step size collapsed below the floor while the norm grew");
        } else {
          finish(VerdictKind::Inconclusive, t, "step size collapsed without norm growth");
        }
        done = true;
        break;
      }
      try {
        res = stepper.step(u, dt);
      } catch (const NumericError&) {
        if (growing) {
          finish(VerdictKind::BlownUp, t, "non-finite state after norm growth");
        } else {
          finish(VerdictKind::Inconclusive, t, "non-finite state");
        }
        done = true;
        break;
      }
      if (res.u.max() > sup * (1.0 + c.max_growth)) {
        ++tr.rejected;
        dt *= 0.5;
        continue;
      }
      break;
    }
    if (done) break;

    u = std::move(res.u);
    const double new_mass = u.l1_norm();
    mass_time += 0.5 * (mass + new_mass) * dt;
    mass = new_mass;
    t += dt;
    ++tr.accepted;
    tr.clipped_mass += res.clipped;
    dt_max_seen = std::max(dt_max_seen, dt);
    const double new_sup = u.max();
    growing = new_sup > sup;
    sup = new_sup;

    if (sup >= c.blowup_threshold) {
      if (growing && dt <= 0.1 * dt_max_seen) {
        finish(VerdictKind::BlownUp, t, "sup norm crossed the threshold");
      } else {
        finish(VerdictKind::Inconclusive, t, "threshold crossed without step collapse");
      }
      break;
    }

    if (outer_fraction(u) > c.outer_mass_limit && localized) {
      if (can_regrid) {
        u = regrid(u, spec.alpha, tail_constant(n, spec.alpha) * mass_time);
        rho = sample_weight(spec.rho, u.grid());
        stepper = MildStepper(u.grid(), spec.alpha, spec.p, rho);
        sup = u.max();
        ++tr.regrids;
      } else {
        tr.box_warning = true;
      }
    }
    if (++since_sample >= c.sample_stride) record();
  }
  tr.horizon = T;
  tr.final_state = std::move(u);
  return tr;
}

// Critical mass growth ------------------------------------------------------------

CriticalMassProbe critical_mass_growth_probe(double alpha, int n, const std::vector<double>& s) {
  const KernelSpec spec = make_kernel_spec(n, alpha);
  if (s.empty()) throw ConfigError("critical mass probe: empty schedule");
  CriticalMassProbe out;
  out.alpha = alpha;
  out.n = n;
  out.p_F = 1.0 + alpha / n;
  const double p = out.p_F;
  double running = 0.0;
  for (double si : s) {
    if (!(si > -1.0)) throw ConfigError("critical mass probe: s must exceed -1");
    const double t = si + 1.0;
    const double scale = std::pow(t, 1.0 / alpha);
    const auto Gp = [&](double r) {
      const KernelValue v = kernel_eval(spec, r, t);
      if (!v.converged) throw NumericError("critical mass probe: kernel quadrature did not converge");
      return std::pow(v.value, p);
    };
    const double near = numerics::integrate_panels([&](double r) { return std::pow(r, n - 1) * Gp(r); }, 0.0,
                                                   scale, 8);
    // r^n G^p decays like r^{n - (n + alpha) p}
    const double u_max = 40.0 / ((n + alpha) * p - n) + 5.0;
    const double far = numerics::integrate_panels(
        [&](double u) {
          const double r = scale * std::exp(u);
          return std::pow(r, n) * Gp(r);
        },
        0.0, u_max, static_cast<int>(std::ceil(u_max / 0.25)));
    const double norm = unit_sphere_area(n) * (near + far);
    out.s.push_back(si);
    out.norms.push_back(norm);
    out.products.push_back(t * norm);
    running += norm;
    out.partial_sums.push_back(running);
  }
  double sum = 0.0;
  for (double v : out.products) sum += v;
  out.C2 = sum / static_cast<double>(out.products.size());
  for (double v : out.products) out.spread = std::max(out.spread, std::abs(v / out.C2 - 1.0));
  return out;
}

// Fujita sweep ------------------------------------------------------------------------

Controls fujita_controls() {
  Controls c;
  c.extend_horizon = true;
  c.max_horizon = 1e16;
  return c;
}

FujitaSweep fujita_sweep(double alpha, const std::vector<double>& ps, const std::vector<double>& amplitudes,
                         const FujitaOptions& options) {
  require_alpha(alpha);
  if (ps.empty() || amplitudes.empty()) throw ConfigError("fujita sweep: empty parameter grid");
  for (double a : amplitudes) {
    if (!(a > 0.0)) throw ConfigError("fujita sweep: amplitudes must be positive");
  }
  FujitaSweep out;
  out.alpha = alpha;
  out.n = options.grid.dimension();
  out.cells.resize(ps.size() * amplitudes.size());
  const auto cells = static_cast<std::ptrdiff_t>(out.cells.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < cells; ++k) {
    try {
    const double p = ps[static_cast<std::size_t>(k) / amplitudes.size()];
    const double a = amplitudes[static_cast<std::size_t>(k) % amplitudes.size()];
    const Field u0 = Field::sample_radial(options.grid, [a](double r) { return a * std::exp(-r * r); });
    const EvolutionTrace tr = integrate(make_problem(u0, alpha, p, unit_weight(), options.horizon), options.controls);
    FujitaCell& cell = out.cells[static_cast<std::size_t>(k)];
    cell.p = p;
    cell.amplitude = a;
    cell.verdict = tr.verdict;
    cell.T_reached = tr.times.back();
    cell.max_sup = *std::max_element(tr.sup_norms.begin(), tr.sup_norms.end());
    cell.max_weissler =
        tr.weissler_values.empty() ? 0.0 : *std::max_element(tr.weissler_values.begin(), tr.weissler_values.end());
    cell.box_warning = tr.box_warning;
    const std::size_t keep = std::min<std::size_t>(10, tr.sup_norms.size());
    cell.sup_tail.assign(tr.sup_norms.end() - static_cast<std::ptrdiff_t>(keep), tr.sup_norms.end());
    } catch (...) {
#pragma omp critical(fujita_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (const FujitaCell& lo : out.cells) {
    if (lo.verdict.kind != VerdictKind::BlownUp) continue;
    for (const FujitaCell& hi : out.cells) {
      if (hi.p == lo.p && hi.amplitude > lo.amplitude && hi.verdict.kind != VerdictKind::BlownUp) {
        std::ostringstream msg;
        msg << "p=" << lo.p << ": amplitude " << lo.amplitude << " blew up but " << hi.amplitude << " did not";
        out.comparison_violations.push_back(msg.str());
      }
    }
  }
  return out;
}

}  // namespace fraclab
