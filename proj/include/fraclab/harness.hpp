#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclab::harness {

// Experiment runner: configuration, orchestration, reports.

/// Unparseable or invalid configuration.  The message carries "source:line: ".
class ConfigParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ConfigValue {
  std::vector<double> numbers;
  std::string text;
  bool is_text = false;
  int line = 0;
};

/// Flat sections of key = value pairs.  Numeric values may be comma-separated
/// lists.  Keys outside any section live in "".
struct Config {
  std::string source = "<defaults>";
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

/// INI-style text: `[kind]` headers, `key = value`, `#` or `;` comments.
Config parse_ini(const std::string& text, const std::string& source = "<string>");
/// {"kind": {"key": number | [numbers] | string}, "out": "..."}.
Config parse_json(const std::string& text, const std::string& source = "<string>");
/// JSON when the file extension is .json or the first non-blank byte is '{'.
Config load_config(const std::filesystem::path& path);

struct ExperimentInfo {
  std::string kind;
  std::string description;
  std::string topic;
  std::vector<int> criteria;
};

/// The seven kinds, sorted by name.
const std::vector<ExperimentInfo>& list_experiments();

/// Checks every section and key against the schemas.  Throws ConfigParseError.
void validate(const Config& config);

struct Check {
  /// Acceptance criterion number, 0 for module-level checks.
  int criterion = 0;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  /// How measured relates to tolerance when passing: "<", "<=", ">", ">=", "==".
  std::string relation = "<";
  bool pass = false;
  bool skipped = false;
  std::string note;
};

struct StageTime {
  std::string stage;
  int criterion = 0;
  double seconds = 0.0;
};

struct RunReport {
  std::string kind;
  /// Resolved parameters, defaults included.
  std::map<std::string, std::vector<double>> parameters;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> artifacts;
  std::vector<StageTime> stages;

  [[nodiscard]] bool passed(bool strict) const;
};

/// Runs one kind, writing artifacts under `outdir` (created if missing).
/// ConfigParseError before any file is touched when the config is invalid.
RunReport run_experiment(const std::string& kind, const Config& config, const std::filesystem::path& outdir);

/// report.json next to the artifacts, written atomically.
std::filesystem::path write_report(const RunReport& report, const std::filesystem::path& outdir);

/// Writes `contents` to `path` through a sibling temporary and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// %.17g.
std::string format_number(double x);

/// Table with a header row; every number printed by format_number.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  [[nodiscard]] std::string str() const;
};

/// Process exit codes.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kBadConfig = 2, kInternal = 3 };

}  // namespace fraclab::harness
