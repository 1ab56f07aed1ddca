#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fraclab/elliptic.hpp"
#include "fraclab/fractional_laplacian.hpp"
#include "fraclab/heat_kernel.hpp"
#include "fraclab/potential.hpp"
#include "harness_internal.hpp"

namespace fraclab::harness::detail {

namespace {

using std::numbers::pi;
const auto num = format_number;

std::string label(const std::string& what, double a) {
  std::ostringstream os;
  os << what << a;
  return os.str();
}

Field bump(const GridSpec& g, double width) {
  return Field::sample_radial(g, [=](double r) {
    const double s = r / width;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  });
}

Field uniform(const GridSpec& g, double a) {
  return Field::sample_radial(g, [a](double) { return a; });
}

}  // namespace

RunReport run_kernel_check(const Params& p, const std::filesystem::path& out) {
  RunReport r;
  const GridSpec grid = make_grid(1, get(p, "half_width"), get_size(p, "points"));
  const auto& alphas = p.at("alphas");
  const auto& times = p.at("times");

  CsvTable cells{{"alpha", "n", "t", "mass_error", "semigroup_error", "spectral_error", "scaling_error", "empirical_B"}, {}};
  nlohmann::json records = nlohmann::json::array();
  double worst_mass = 0.0, worst_conv = 0.0, worst_spec = 0.0, worst_scaling = 0.0;
  std::vector<TailEstimate> tails;
  {
    Stage s(r, "tail law", 2);
    const auto& ta = p.at("tail_alphas");
    for (std::size_t k = 0; k < ta.size(); ++k) {
      tails.push_back(estimate_tail_constant(make_kernel_spec(1, ta[k]), p.at("tail_lo")[k], p.at("tail_hi")[k]));
    }
  }
  {
    Stage s(r, "kernel identities", 1);
    for (double alpha : alphas) {
      const KernelSpec spec = make_kernel_spec(1, alpha);
      for (double t : times) {
        const double mass = std::abs(kernel_mass(spec, t) - 1.0);
        const SemigroupCheck sg = check_semigroup(grid, alpha, t, t);
        double scaling = 0.0;
        const double c = std::pow(t, -1.0 / alpha);
        for (double x = 0.0; x <= 60.0; x += 0.37) {
          const double v = kernel_eval(spec, x, t).value;
          if (v <= 1e-280) continue;
          scaling = std::max(scaling, std::abs(v - c * kernel_eval(spec, x * c, 1.0).value) / v);
        }
        double B = std::nan("");
        if (alpha < 2.0) {
          std::vector<BoundSample> samples;
          for (double x = 0.0; x < 100.0; x += 1.3) samples.push_back({x, t});
          B = check_two_sided_bound(spec, samples).empirical_B;
        }
        worst_mass = std::max(worst_mass, mass);
        worst_conv = std::max(worst_conv, sg.convolution_error);
        worst_spec = std::max(worst_spec, sg.spectral_error);
        worst_scaling = std::max(worst_scaling, scaling);
        cells.add({num(alpha), "1", num(t), num(mass), num(sg.convolution_error), num(sg.spectral_error), num(scaling),
                   num(B)});

        nlohmann::json rec{{"alpha", alpha},          {"n", 1},
                           {"t", t},                  {"mass_error", mass},
                           {"semigroup_error", sg.convolution_error}, {"scaling_error", scaling},
                           {"tail_constant", nullptr}, {"plateau_quality", nullptr},
                           {"empirical_B", std::isfinite(B) ? nlohmann::json(B) : nlohmann::json(nullptr)}};
        const auto& ta = p.at("tail_alphas");
        const auto it = std::find(ta.begin(), ta.end(), alpha);
        if (it != ta.end()) {
          const TailEstimate& te = tails[static_cast<std::size_t>(it - ta.begin())];
          rec["tail_constant"] = te.constant;
          rec["plateau_quality"] = te.plateau_quality;
        }
        records.push_back(rec);
      }
    }
  }
  add_check(r, 1, "kernel mass error, worst over alpha and t", worst_mass, "<", get(p, "mass_tol"));
  add_check(r, 1, "semigroup convolution error (L-inf)", worst_conv, "<", get(p, "semigroup_tol"));
  add_check(r, 1, "semigroup spectral error (L-inf)", worst_spec, "<", get(p, "spectral_tol"));
  add_check(r, 1, "scaling identity, relative", worst_scaling, "<", get(p, "scaling_tol"));

  {
    Stage s(r, "poisson closed form", 1);
    const KernelSpec cauchy = make_kernel_spec(1, 1.0);
    double worst = 0.0;
    CsvTable tab{{"t", "r", "closed_form", "fourier_inversion"}, {}};
    for (double t : times) {
      for (double x : {0.0, 0.05, 0.5, 1.0, 3.0, 10.0, 40.0}) {
        const double closed = t / (pi * (x * x + t * t));
        const double inv = kernel_fourier_inversion(cauchy, x, t).value;
        const double lib = kernel_eval(cauchy, x, t).value;
        worst = std::max({worst, std::abs(inv - closed) / closed, std::abs(lib - closed) / closed});
        tab.add({num(t), num(x), num(closed), num(inv)});
      }
    }
    add_check(r, 1, "alpha = 1 against the Poisson closed form, relative", worst, "<=", get(p, "poisson_tol"));
    emit_csv(r, out / "poisson_closed_form.csv", tab);
  }

  CsvTable tail_tab{{"alpha", "r", "scaled_value"}, {}};
  const auto& ta = p.at("tail_alphas");
  for (std::size_t k = 0; k < ta.size(); ++k) {
    const TailEstimate& te = tails[k];
    add_check(r, 2, label("tail plateau quality, alpha = ", ta[k]), te.plateau_quality, "<", get(p, "plateau_tol"));
    if (!te.converged) r.warnings.push_back(label("tail fit did not converge for alpha = ", ta[k]));
    if (ta[k] == 1.0) {
      add_check(r, 2, "alpha = 1 tail constant vs 1/pi, relative", std::abs(te.constant * pi - 1.0), "<",
                get(p, "tail_constant_tol"));
    }
    for (std::size_t i = 0; i < te.radii.size(); ++i) tail_tab.add({num(ta[k]), num(te.radii[i]), num(te.scaled_values[i])});
  }

  {
    Stage s(r, "operator cross-check", 3);
    const GridSpec g = make_grid(1, get(p, "operator_half_width"), get_size(p, "operator_points"));
    const Field u = Field::sample_radial(g, [](double x) { return std::exp(-x * x); });
    const PointFunction uf = [](const auto& x) { return std::exp(-x[0] * x[0]); };
    QuadratureOptions opt;
    opt.cutoff = get(p, "operator_cutoff");
    opt.outer_panels = static_cast<int>(get(p, "operator_panels"));
    const std::size_t stride = std::max<std::size_t>(1, g.size() / 168);
    CsvTable tab{{"alpha", "x", "spectral", "quadrature"}, {}};
    for (double alpha : p.at("operator_alphas")) {
      const Field spectral = frac_laplacian_spectral(u, alpha);
      double diff = 0.0, scale = 0.0;
      bool cut = false;
      for (std::size_t i = 0; i < g.size(); i += stride) {
        const double x = g.coordinate(i);
        if (std::abs(x) > 64.0) continue;
        const QuadratureResult q = frac_laplacian_quadrature(uf, {x, 0.0, 0.0}, 1, alpha, opt);
        cut = cut || q.cutoff_warning;
        diff = std::max(diff, std::abs(q.value - spectral[i]));
        scale = std::max(scale, std::abs(spectral[i]));
        tab.add({num(alpha), num(x), num(spectral[i]), num(q.value)});
      }
      add_check(r, 3, label("spectral vs quadrature, relative L-inf, alpha = ", alpha), diff / scale, "<",
                get(p, "operator_tol"));
      if (cut) r.warnings.push_back(label("quadrature cutoff warning for alpha = ", alpha));
    }
    emit_csv(r, out / "operator_crosscheck.csv", tab);
  }

  emit_csv(r, out / "kernel_checks.csv", cells);
  emit_csv(r, out / "tail_law.csv", tail_tab);
  emit_json_text(r, out / "kernel_checks.json", records.dump(2) + "\n");
  return r;
}

RunReport run_poisson(const Params& p, const std::filesystem::path& out) {
  RunReport r;
  {
    Stage s(r, "riesz inversion", 4);
    const GridSpec g = make_grid(1, get(p, "riesz_half_width"), get_size(p, "riesz_points"));
    const Field f = bump(g, get(p, "bump_width"));
    CsvTable tab{{"alpha", "relative_residual"}, {}};
    for (double alpha : p.at("riesz_alphas")) {
      const double res = riesz_inversion_residual(f, alpha);
      add_check(r, 4, label("||L I_alpha f - f|| / ||f||, alpha = ", alpha), res, "<", get(p, "riesz_tol"));
      tab.add({num(alpha), num(res)});
    }
    emit_csv(r, out / "riesz_inversion.csv", tab);
  }
  {
    Stage s(r, "ball sequence", 4);
    const GridSpec g = make_grid(1, get(p, "ball_half_width"), get_size(p, "ball_points"));
    const BallSequence seq =
        minimal_solution_via_balls(bump(g, 1.0), get(p, "ball_alpha"), p.at("ball_radii"), get(p, "inner_radius"));
    add_check(r, 4, "u_R nondecreasing in R, worst decrease", seq.worst_monotonicity_violation, "<=",
              get(p, "monotone_slack"));
    add_check(r, 4, "largest ball vs Riesz limit on the inner region, relative", seq.inner_errors.back(), "<",
              get(p, "limit_tol"));
    CsvTable tab{{"R", "sup_u", "inner_error_vs_limit"}, {}};
    for (std::size_t k = 0; k < seq.radii.size(); ++k)
      tab.add({num(seq.radii[k]), num(seq.sup_norms[k]), num(seq.inner_errors[k])});
    emit_csv(r, out / "ball_sequence.csv", tab);
  }
  {
    Stage s(r, "property (H)", 5);
    const WeightSpec one = radial_weight([](double) { return 1.0; }, "rho = 1");
    const WeightSpec tent = radial_weight([](double x) { return x < 1.0 ? 1.0 - x : 0.0; }, "compact tent (1-|y|)+");
    const WeightSpec lorentz = radial_weight([](double x) { return 1.0 / (1.0 + x * x); }, "(1+|y|^2)^-1");
    struct Case {
      const WeightSpec* w;
      double alpha;
      int n;
      std::vector<double> probes;
      bool expected;
    };
    const std::vector<Case> cases{{&one, 1.0, 3, {1.0, 10.0}, false},
                                  {&one, 0.5, 1, {1.0}, false},
                                  {&tent, 0.5, 1, {0.5, 3.0}, true},
                                  {&tent, 1.0, 3, {0.5, 3.0}, true},
                                  {&lorentz, 1.0, 3, {10.0, 100.0, 1000.0}, true}};
    nlohmann::json reports = nlohmann::json::array();
    for (const Case& c : cases) {
      const PropertyHReport h = check_property_H(*c.w, c.alpha, c.n, c.probes);
      std::ostringstream name;
      name << c.w->description << ", n = " << c.n << ", alpha = " << c.alpha << " classified "
           << (c.expected ? "true" : "false");
      add_flag(r, 5, name.str(), h.holds == c.expected, h.divergence_evidence);
      reports.push_back({{"weight", c.w->description},
                         {"n", c.n},
                         {"alpha", c.alpha},
                         {"holds", h.holds},
                         {"sup_estimate", std::isfinite(h.sup_estimate) ? nlohmann::json(h.sup_estimate) : nlohmann::json(nullptr)},
                         {"probe_points", h.probe_points},
                         {"partial_radii", h.partial_radii},
                         {"partial_integrals", h.partial_integrals},
                         {"converged", h.converged},
                         {"divergence_evidence", h.divergence_evidence}});
    }
    emit_json_text(r, out / "property_h.json", reports.dump(2) + "\n");
  }
  return r;
}

RunReport run_elliptic(const Params& p, const std::filesystem::path& out) {
  RunReport r;
  {
    Stage s(r, "monotone iteration", 6);
    const GridSpec g = make_grid(1, get(p, "half_width"), get_size(p, "points"));
    const double alpha = get(p, "alpha");
    const BallProblem pb = make_ball_problem(g, get(p, "radius"), alpha, uniform(g, 1.0));
    const DirichletSolver solver(pb);
    CsvTable hist{{"sigma", "side", "k", "residual", "increment"}, {}};
    nlohmann::json verdicts = nlohmann::json::array();
    double worst_order = 0.0, worst_gap = 0.0, worst_res = 0.0;
    bool converged = true, barriers = true;
    for (double sigma : p.at("sigmas")) {
      const Nonlinearity nl = power_nonlinearity(sigma);
      const Barriers b = sublinear_barriers(pb, sigma);
      const MonotoneResult m = monotone_iterate(solver, nl, b.lower, b.upper);
      converged = converged && m.lower_trace.converged && m.upper_trace.converged;
      barriers = barriers && m.lower_barrier_defect <= 0.0 && m.upper_barrier_defect >= 0.0;
      worst_order = std::max({worst_order, m.lower_trace.worst_order_violation, m.upper_trace.worst_order_violation});
      worst_gap = std::max(worst_gap, m.gap);
      worst_res = std::max({worst_res, nonlinear_residual(solver, nl, m.from_lower), nonlinear_residual(solver, nl, m.from_upper)});
      for (const auto& [side, tr] : {std::pair{"lower", &m.lower_trace}, std::pair{"upper", &m.upper_trace}}) {
        for (std::size_t k = 0; k < tr->residuals.size(); ++k) {
          const double inc = k < tr->increments.size() ? tr->increments[k] : std::nan("");
          hist.add({num(sigma), side, std::to_string(k), num(tr->residuals[k]), num(inc)});
        }
      }
      const UniquenessVerdict v = uniqueness_check(solver, nl, m.from_lower, m.from_upper);
      verdicts.push_back({{"sigma", sigma},
                          {"epsilon", b.epsilon},
                          {"lambda_star", v.lambda_star},
                          {"lambda_star_reverse", v.lambda_star_reverse},
                          {"relative_difference", v.relative_difference},
                          {"unique", v.unique}});
    }
    add_flag(r, 6, "epsilon phi is a sub-solution and C U a super-solution", barriers);
    add_flag(r, 6, "both monotone sequences converged", converged);
    add_check(r, 6, "worst order violation along either sequence", worst_order, "<=", get(p, "order_slack"));
    add_check(r, 6, "sup |limit from below - limit from above|", worst_gap, "<", get(p, "gap_tol"));
    add_check(r, 6, "final nonlinear residual", worst_res, "<", get(p, "residual_tol"));
    emit_csv(r, out / "monotone_history.csv", hist);
    emit_json_text(r, out / "uniqueness.json", verdicts.dump(2) + "\n");
  }
  {
    Stage s(r, "eigenvalues", 7);
    const GridSpec g = make_grid(1, get(p, "eigen_half_width"), get_size(p, "eigen_points"));
    CsvTable tab{{"alpha", "R", "lambda", "lambda_2rho", "residual"}, {}};
    double worst_halving = 0.0;
    bool positive = true, decreasing = true;
    for (double alpha : p.at("eigen_alphas")) {
      double previous = INFINITY;
      for (double R : p.at("eigen_radii")) {
        const EigenPair e = principal_eigenpair(make_ball_problem(g, R, alpha, uniform(g, 1.0)));
        const EigenPair h = principal_eigenpair(make_ball_problem(g, R, alpha, uniform(g, 2.0)));
        positive = positive && e.lambda > 0.0;
        decreasing = decreasing && e.lambda < previous;
        previous = e.lambda;
        worst_halving = std::max(worst_halving, std::abs(h.lambda - 0.5 * e.lambda) / e.lambda);
        tab.add({num(alpha), num(R), num(e.lambda), num(h.lambda), num(e.residual)});
      }
    }
    add_flag(r, 7, "lambda_1R > 0", positive);
    add_flag(r, 7, "lambda_1R strictly decreasing in R", decreasing);
    add_check(r, 7, "rho -> 2 rho halves lambda_1R, relative", worst_halving, "<=", get(p, "halving_tol"));
    emit_csv(r, out / "eigenvalues.csv", tab);
  }
  return r;
}

RunReport run_ladder(const Params& p, const std::filesystem::path& out) {
  RunReport r;
  const double pp = get(p, "p"), alpha = get(p, "alpha");
  const int n = static_cast<int>(get(p, "n")), K = static_cast<int>(get(p, "K"));
  {
    Stage s(r, "ladder", 8);
    const LadderResult main = exponent_ladder(pp, alpha, n, K);
    const LadderResult a = exponent_ladder(1.0, 0.5, 2, 8);
    const LadderResult b = exponent_ladder(0.5, 1.0, 3, 60);
    const LadderResult c = exponent_ladder(1.8, 1.5, 3, 6);
    double worst = 0.0;
    for (const LadderResult* l : {&main, &a, &b, &c})
      worst = std::max(worst, l->closed_form_error / std::max(1.0, std::abs(l->sequence.back())));
    add_check(r, 8, "recursion vs closed form, relative", worst, "<=", get(p, "closed_form_tol"));
    add_check(r, 8, "(p=1, alpha=0.5, n=2) first_positive", a.first_positive ? *a.first_positive : -1, "==", 4);
    add_check(r, 8, "(p=0.5, alpha=1, n=3) analytic limit", b.analytic_limit, "==", 2.0);
    add_check(r, 8, "(p=0.5, alpha=1, n=3) |p_60 - 2|", std::abs(b.sequence.back() - 2.0), "<",
              get(p, "closed_form_tol"));
    add_check(r, 8, "(p=1.8, alpha=1.5, n=3) first_positive", c.first_positive ? *c.first_positive : -1, "==", 4);

    CsvTable seq{{"k", "p_k", "exact"}, {}};
    for (int k = 1; k <= K; ++k) {
      const auto i = static_cast<std::size_t>(k - 1);
      seq.add({std::to_string(k), num(main.sequence[i]), main.exact[i]});
    }
    const auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("none"); };
    CsvTable summary{{"p", "alpha", "n", "K", "first_positive", "first_strictly_positive", "analytic_limit", "out_of_range"},
                     {}};
    summary.add({num(pp), num(alpha), std::to_string(n), std::to_string(K), opt(main.first_positive),
                 opt(main.first_strictly_positive), num(main.analytic_limit), main.out_of_range ? "1" : "0"});
    emit_csv(r, out / "ladder.csv", seq);
    emit_csv(r, out / "ladder_summary.csv", summary);
  }
  {
    Stage s(r, "bootstrap probe", 9);
    const int iterations = static_cast<int>(get(p, "probe_iterations"));
    const BootstrapTrace t = liouville_bootstrap_probe(pp, alpha, n, iterations);
    const LadderResult lad = exponent_ladder(pp, alpha, n, iterations + 1);
    double worst = 0.0;
    CsvTable tab{{"k", "fitted_exponent", "ladder_exponent", "tail_value"}, {}};
    bool before_positive = true;
    int compared = 0;
    for (std::size_t k = 0; k < t.exponents.size(); ++k) {
      tab.add({std::to_string(k + 1), num(t.exponents[k]), num(lad.sequence[k]), num(t.tail_values[k])});
      before_positive = before_positive && lad.sequence[k] < 0.0;
      if (!before_positive) continue;
      worst = std::max(worst, std::abs(t.exponents[k] - lad.sequence[k]) / std::abs(lad.sequence[k]));
      ++compared;
    }
    add_check(r, 9, "fitted exponents vs ladder until positivity, relative", worst, "<=", get(p, "probe_tol"),
              std::to_string(compared) + " iterates compared");
    emit_csv(r, out / "bootstrap.csv", tab);
  }
  return r;
}

}  // namespace fraclab::harness::detail
