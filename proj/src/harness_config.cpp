#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "harness_internal.hpp"

namespace fraclab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

ConfigValue parse_value(const std::string& raw, int line) {
  ConfigValue v;
  v.line = line;
  std::stringstream ss(raw);
  std::string token;
  while (std::getline(ss, token, ',')) {
    double x = 0.0;
    if (!parse_number(token, x)) {
      v.numbers.clear();
      v.is_text = true;
      v.text = trim(raw);
      return v;
    }
    v.numbers.push_back(x);
  }
  if (v.numbers.empty()) {
    v.is_text = true;
    v.text = trim(raw);
  }
  return v;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line;
  os << ": " << what;
  throw ConfigParseError(os.str());
}

// checks shared by the schemas
std::string positive(double x) { return x > 0.0 && std::isfinite(x) ? "" : "must be positive"; }
std::string order_alpha(double x) { return x > 0.0 && x <= 2.0 ? "" : "must lie in (0, 2]"; }
std::string open_alpha(double x) { return x > 0.0 && x < 2.0 ? "" : "must lie in (0, 2)"; }
std::string unit_open(double x) { return x > 0.0 && x < 1.0 ? "" : "must lie in (0, 1)"; }
std::string count(double x) {
  return x >= 1.0 && x == std::floor(x) && x < 1e9 ? "" : "must be a positive integer";
}
std::string grid_points(double x) {
  if (!count(x).empty() || x < 16.0) return "must be an integer >= 16";
  const auto k = static_cast<unsigned long>(x);
  return (k & (k - 1)) == 0 ? "" : "must be a power of two";
}
std::string dimension(double x) { return x == 1.0 || x == 2.0 || x == 3.0 ? "" : "must be 1, 2 or 3"; }
std::string exponent(double x) { return x > 1.0 && std::isfinite(x) ? "" : "must exceed 1"; }
std::string fractional_order(double x) {
  return x > 0.0 && x != std::floor(x) && std::isfinite(x) ? "" : "must be positive and not an integer";
}
std::string one_d_only(double x) { return x == 1.0 ? "" : "only n = 1 is supported here"; }

bool increasing(const std::vector<double>& v) { return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end(); }

using detail::Param;
using detail::Params;
using detail::Schema;

std::map<std::string, Schema> build_schemas() {
  std::map<std::string, Schema> s;

  s["kernel-check"] = Schema{
      {{"n", {1}, one_d_only},
       {"alphas", {0.5, 1.0, 1.5, 2.0}, order_alpha, true},
       {"times", {0.1, 1.0, 10.0}, positive, true},
       {"half_width", {40.0}, positive},
       {"points", {4096}, grid_points},
       {"mass_tol", {1e-6}, positive},
       {"semigroup_tol", {1e-6}, positive},
       {"spectral_tol", {1e-12}, positive},
       {"scaling_tol", {1e-8}, positive},
       {"poisson_tol", {1e-10}, positive},
       {"tail_alphas", {0.5, 1.0, 1.5}, open_alpha, true},
       {"tail_lo", {50.0, 20.0, 20.0}, positive, true},
       {"tail_hi", {200.0, 100.0, 200.0}, positive, true},
       {"plateau_tol", {0.05}, positive},
       {"tail_constant_tol", {0.02}, positive},
       {"operator_alphas", {0.5, 1.0, 1.5}, open_alpha, true},
       {"operator_half_width", {512.0}, positive},
       {"operator_points", {65536}, grid_points},
       {"operator_cutoff", {400.0}, positive},
       {"operator_panels", {800}, count},
       {"operator_tol", {1e-3}, positive}},
      [](const Params& p) -> std::string {
        const auto &a = p.at("tail_alphas"), &lo = p.at("tail_lo"), &hi = p.at("tail_hi");
        if (lo.size() != a.size() || hi.size() != a.size()) return "tail_lo and tail_hi need one entry per tail alpha";
        for (std::size_t k = 0; k < a.size(); ++k)
          if (lo[k] >= hi[k]) return "tail window must satisfy tail_lo < tail_hi";
        if (p.at("operator_cutoff").front() >= p.at("operator_half_width").front())
          return "operator_cutoff must be smaller than operator_half_width";
        return {};
      }};

  s["poisson"] = Schema{
      {{"riesz_alphas", {0.25, 0.5, 0.75}, unit_open, true},
       {"riesz_half_width", {400.0}, positive},
       {"riesz_points", {65536}, grid_points},
       {"bump_width", {1.0}, positive},
       {"riesz_tol", {1e-2}, positive},
       {"ball_alpha", {0.5}, unit_open},
       {"ball_half_width", {128.0}, positive},
       {"ball_points", {4096}, grid_points},
       {"ball_radii", {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}, positive, true},
       {"inner_radius", {1.0}, positive},
       {"monotone_slack", {1e-8}, positive},
       {"limit_tol", {0.1}, positive}},
      [](const Params& p) -> std::string {
        const auto& r = p.at("ball_radii");
        if (!increasing(r)) return "ball_radii must be strictly increasing";
        if (r.back() >= p.at("ball_half_width").front()) return "ball_radii must stay inside the box";
        return {};
      }};

  s["elliptic"] = Schema{
      {{"alpha", {0.5}, open_alpha},
       {"half_width", {16.0}, positive},
       {"points", {1024}, grid_points},
       {"radius", {4.0}, positive},
       {"sigmas", {0.3, 0.5, 0.7}, unit_open, true},
       {"order_slack", {1e-10}, positive},
       {"gap_tol", {1e-6}, positive},
       {"residual_tol", {1e-8}, positive},
       {"eigen_alphas", {0.5, 1.0, 1.5}, open_alpha, true},
       {"eigen_half_width", {32.0}, positive},
       {"eigen_points", {1024}, grid_points},
       {"eigen_radii", {2.0, 4.0, 8.0}, positive, true},
       {"halving_tol", {1e-12}, positive}},
      [](const Params& p) -> std::string {
        if (p.at("radius").front() >= p.at("half_width").front()) return "radius must stay inside the box";
        const auto& r = p.at("eigen_radii");
        if (!increasing(r)) return "eigen_radii must be strictly increasing";
        if (r.back() >= p.at("eigen_half_width").front()) return "eigen_radii must stay inside the box";
        return {};
      }};

  s["ladder"] = Schema{
      {{"p", {1.0}, positive},
       {"alpha", {0.5}, open_alpha},
       {"n", {2}, dimension},
       {"K", {8}, count},
       {"closed_form_tol", {1e-12}, positive},
       {"probe_iterations", {5}, count},
       {"probe_tol", {0.1}, positive}},
      [](const Params& p) -> std::string {
        if (p.at("alpha").front() >= p.at("n").front()) return "alpha must be smaller than n";
        return {};
      }};

  s["fujita"] = Schema{
      {{"alpha", {1.0}, order_alpha},
       {"n", {1}, one_d_only},
       {"ps", {1.2, 1.5, 2.0}, exponent, true},
       {"amplitudes", {0.1, 1.0, 10.0}, positive, true},
       {"survive_p", {3.0}, exponent},
       {"survive_amplitude", {0.01}, positive},
       {"weissler_cap", {1.05}, positive},
       {"half_width", {16.0}, positive},
       {"points", {2048}, grid_points},
       {"horizon", {50.0}, positive},
       {"max_horizon", {1e16}, positive},
       {"constant_p", {2.0, 2.0, 3.0}, exponent, true},
       {"constant_a", {1.0, 2.0, 1.0}, positive, true},
       {"constant_tol", {0.02}, positive},
       {"constant_horizon", {10.0}, positive},
       {"constant_points", {1024}, grid_points},
       {"schedule_p", {1.5}, exponent},
       {"schedule_amplitude", {0.1}, positive},
       {"schedule_taus", {10.0, 1e2, 1e3, 1e4}, positive, true},
       {"mass_s", {1.0, 2.0, 4.0, 8.0, 16.0}, [](double s) { return s > -1.0 ? "" : std::string("must exceed -1"); }, true},
       {"mass_tol", {0.01}, positive}},
      [](const Params& p) -> std::string {
        if (p.at("constant_p").size() != p.at("constant_a").size()) return "constant_p and constant_a must have equal length";
        if (!increasing(p.at("schedule_taus"))) return "schedule_taus must be strictly increasing";
        if (p.at("max_horizon").front() < p.at("horizon").front()) return "max_horizon must be at least horizon";
        return {};
      }};

  s["timefrac"] = Schema{
      {{"T", {1.0}, positive},
       {"M", {1000}, [](double m) { return count(m).empty() && m >= 16.0 ? "" : std::string("must be an integer >= 16"); }},
       {"mus", {0.5, 1.0, 2.0}, positive, true},
       {"taus", {0.3, 0.5, 0.7}, fractional_order, true},
       {"power_tol", {1e-3}, positive},
       {"compose_tol", {1e-5}, positive},
       {"self_similar_beta", {0.25}, [](double b) { return b > 0.0 && b < 0.5 ? "" : std::string("must lie in (0, 1/2)"); }},
       {"self_similar_lambda", {1.0}, positive},
       {"self_similar_tol", {1e-2}, positive},
       {"volterra_beta", {0.75}, [](double b) { return b > 0.5 && b < 1.0 ? "" : std::string("must lie in (1/2, 1)"); }},
       {"volterra_lambda", {1.0}, positive},
       {"volterra_b", {1.0}, positive},
       {"volterra_T", {0.3}, positive},
       {"volterra_M", {1000}, [](double m) { return count(m).empty() && m >= 16.0 ? "" : std::string("must be an integer >= 16"); }},
       {"agreement", {0.05}, positive}},
      {}};

  s["separable"] = Schema{
      {{"beta", {0.75}, [](double b) { return b > 0.5 && b < 1.0 ? "" : std::string("must lie in (1/2, 1)"); }},
       {"alpha", {0.5}, unit_open},
       {"lambda", {1.0}, positive},
       {"b", {1.0}, positive},
       {"half_width", {64.0}, positive},
       {"points", {2048}, grid_points},
       {"residual_tol", {0.05}, positive}},
      {}};
  return s;
}

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s = build_schemas();
  return s;
}

const std::vector<std::string> kTopLevel{"out", "threads", "strict"};

}  // namespace

Config parse_ini(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(source, number, "empty section name");
      cfg.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, number, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(source, number, "missing key");
    if (value.empty()) fail(source, number, "missing value for '" + key + "'");
    auto& sec = cfg.sections[section];
    if (sec.count(key)) fail(source, number, "duplicate key '" + key + "'");
    sec[key] = parse_value(value, number);
  }
  return cfg;
}

Config parse_json(const std::string& text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset to line
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    fail(source, line, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(source, 1, "top level must be an object");

  // line of the first occurrence of "key", for messages
  const auto line_of = [&](const std::string& key) {
    const auto at = text.find('"' + key + '"');
    if (at == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(at), '\n'));
  };
  const auto convert = [&](const nlohmann::json& j, const std::string& key) {
    ConfigValue v;
    v.line = line_of(key);
    if (j.is_string()) {
      v.is_text = true;
      v.text = j.get<std::string>();
    } else if (j.is_number()) {
      v.numbers.push_back(j.get<double>());
    } else if (j.is_boolean()) {
      v.numbers.push_back(j.get<bool>() ? 1.0 : 0.0);
    } else if (j.is_array() && !j.empty()) {
      for (const auto& e : j) {
        if (!e.is_number()) fail(source, v.line, "'" + key + "' must hold numbers only");
        v.numbers.push_back(e.get<double>());
      }
    } else {
      fail(source, v.line, "'" + key + "' must be a number, a list of numbers or a string");
    }
    return v;
  };

  Config cfg;
  cfg.source = source;
  for (const auto& [name, value] : doc.items()) {
    if (value.is_object()) {
      auto& sec = cfg.sections[name];
      for (const auto& [key, entry] : value.items()) sec[key] = convert(entry, key);
    } else {
      cfg.sections[""][name] = convert(value, name);
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  return json ? parse_json(text, path.string()) : parse_ini(text, path.string());
}

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> catalog = [] {
    std::vector<ExperimentInfo> c{
        {"elliptic", "ball Dirichlet problems: principal eigenpairs and monotone sub/super-solution iteration",
         "sublinear stationary problem on balls", {6, 7}},
        {"fujita", "constant-data blow-up, Fujita sweep with Weissler monitor, critical mass growth",
         "parabolic blow-up and global existence", {10, 11, 12}},
        {"kernel-check", "fractional heat kernel: mass, semigroup, scaling, Poisson closed form, tail law, operator cross-check",
         "fractional heat kernel", {1, 2, 3}},
        {"ladder", "exponent ladder recursion and the Liouville bootstrap probe",
         "Liouville decay bootstrap", {8, 9}},
        {"poisson", "Riesz potential inversion, ball-sequence minimal solutions, property (H)",
         "Riesz potentials and the linear problem", {4, 5}},
        {"separable", "separable blow-up ansatz phi(t) w(x) checked pointwise",
         "time-fractional separable solutions", {}},
        {"timefrac", "Riemann-Liouville integrals and derivatives, self-similar profile, Volterra blow-up",
         "Riemann-Liouville calculus", {13}},
    };
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.kind < b.kind; });
    return c;
  }();
  return catalog;
}

namespace detail {

const Schema& schema(const std::string& kind) {
  const auto it = schemas().find(kind);
  if (it == schemas().end()) throw ConfigParseError("unknown experiment kind '" + kind + "'");
  return it->second;
}

Params resolve(const std::string& kind, const Config& config) {
  const Schema& sc = schema(kind);
  Params out;
  for (const Param& p : sc.params) out[p.key] = p.defaults;
  const auto sec = config.sections.find(kind);
  int last_line = 0;
  if (sec != config.sections.end()) {
    for (const auto& [key, value] : sec->second) {
      const auto it = std::find_if(sc.params.begin(), sc.params.end(), [&](const Param& p) { return p.key == key; });
      if (it == sc.params.end()) fail(config.source, value.line, "unknown key '" + key + "' in [" + kind + "]");
      if (value.is_text) fail(config.source, value.line, "'" + key + "' must be numeric");
      if (!it->list && value.numbers.size() != 1) fail(config.source, value.line, "'" + key + "' takes one value");
      for (double x : value.numbers) {
        const std::string msg = it->check ? it->check(x) : std::string();
        if (!msg.empty()) {
          std::ostringstream os;
          os << key << " = " << x << ": " << msg;
          fail(config.source, value.line, os.str());
        }
      }
      out[key] = value.numbers;
      last_line = std::max(last_line, value.line);
    }
  }
  if (sc.consistent) {
    const std::string msg = sc.consistent(out);
    if (!msg.empty()) fail(config.source, last_line, "[" + kind + "] " + msg);
  }
  return out;
}

}  // namespace detail

void validate(const Config& config) {
  for (const auto& [section, entries] : config.sections) {
    if (section.empty()) {
      for (const auto& [key, value] : entries) {
        if (std::find(kTopLevel.begin(), kTopLevel.end(), key) == kTopLevel.end())
          fail(config.source, value.line, "unknown top-level key '" + key + "'");
        if (key == "out" && !value.is_text) fail(config.source, value.line, "'out' must be a path");
        if (key == "threads" && (value.is_text || value.numbers.size() != 1 || !count(value.numbers[0]).empty()))
          fail(config.source, value.line, "'threads' must be a positive integer");
        if (key == "strict" && (value.is_text || value.numbers.size() != 1 ||
                                (value.numbers[0] != 0.0 && value.numbers[0] != 1.0)))
          fail(config.source, value.line, "'strict' must be 0 or 1");
      }
      continue;
    }
    if (!schemas().count(section)) {
      const int line = entries.empty() ? 0 : entries.begin()->second.line;
      fail(config.source, line, "unknown section [" + section + "]");
    }
    detail::resolve(section, config);
  }
}

}  // namespace fraclab::harness
