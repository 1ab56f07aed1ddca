#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "harness_internal.hpp"

namespace fraclab::harness {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool compare(double measured, const std::string& relation, double tolerance) {
  if (std::isnan(measured)) return false;
  if (relation == "<") return measured < tolerance;
  if (relation == "<=") return measured <= tolerance;
  if (relation == ">") return measured > tolerance;
  if (relation == ">=") return measured >= tolerance;
  if (relation == "==") return measured == tolerance;
  throw std::invalid_argument("unknown relation " + relation);
}

// JSON numbers cannot carry inf or nan
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("csv row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

bool RunReport::passed(bool strict) const {
  for (const Check& c : checks) {
    if (c.skipped) {
      if (strict) return false;
      continue;
    }
    if (!c.pass) return false;
  }
  return !(strict && !warnings.empty());
}

namespace detail {

void add_check(RunReport& r, int criterion, std::string name, double measured, std::string relation, double tolerance,
               std::string note) {
  Check c;
  c.criterion = criterion;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance;
  c.pass = compare(measured, relation, tolerance);
  c.relation = std::move(relation);
  c.note = std::move(note);
  r.checks.push_back(std::move(c));
}

void add_flag(RunReport& r, int criterion, std::string name, bool ok, std::string note) {
  add_check(r, criterion, std::move(name), ok ? 1.0 : 0.0, "==", 1.0, std::move(note));
}

Stage::Stage(RunReport& r, std::string name, int criterion)
    : report_(r), name_(std::move(name)), criterion_(criterion), start_(now_seconds()) {}

Stage::~Stage() { report_.stages.push_back({name_, criterion_, now_seconds() - start_}); }

void emit_csv(RunReport& r, const std::filesystem::path& path, const CsvTable& table) {
  write_atomic(path, table.str());
  r.artifacts.push_back(path);
}

void emit_json_text(RunReport& r, const std::filesystem::path& path, const std::string& text) {
  write_atomic(path, text);
  r.artifacts.push_back(path);
}

}  // namespace detail

RunReport run_experiment(const std::string& kind, const Config& config, const std::filesystem::path& outdir) {
  validate(config);
  const detail::Params params = detail::resolve(kind, config);
  std::filesystem::create_directories(outdir);
  RunReport report;
  if (kind == "kernel-check") report = detail::run_kernel_check(params, outdir);
  else if (kind == "poisson") report = detail::run_poisson(params, outdir);
  else if (kind == "elliptic") report = detail::run_elliptic(params, outdir);
  else if (kind == "ladder") report = detail::run_ladder(params, outdir);
  else if (kind == "fujita") report = detail::run_fujita(params, outdir);
  else if (kind == "timefrac") report = detail::run_timefrac(params, outdir);
  else if (kind == "separable") report = detail::run_separable(params, outdir);
  report.kind = kind;
  report.parameters = params;
  return report;
}

std::filesystem::path write_report(const RunReport& report, const std::filesystem::path& outdir) {
  nlohmann::json j;
  j["kind"] = report.kind;
  for (const auto& [key, values] : report.parameters) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : values) arr.push_back(number(v));
    j["parameters"][key] = values.size() == 1 ? arr[0] : arr;
  }
  j["checks"] = nlohmann::json::array();
  for (const Check& c : report.checks) {
    j["checks"].push_back({{"criterion", c.criterion},
                           {"name", c.name},
                           {"measured", number(c.measured)},
                           {"relation", c.relation},
                           {"tolerance", number(c.tolerance)},
                           {"pass", c.pass},
                           {"skipped", c.skipped},
                           {"note", c.note}});
  }
  j["warnings"] = report.warnings;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : report.artifacts) j["artifacts"].push_back(a.filename().string());
  j["stages"] = nlohmann::json::array();
  for (const auto& s : report.stages) j["stages"].push_back({{"stage", s.stage}, {"criterion", s.criterion}, {"seconds", s.seconds}});
  j["passed"] = report.passed(false);
  const auto path = outdir / "report.json";
  write_atomic(path, j.dump(2) + "\n");
  return path;
}

}  // namespace fraclab::harness
