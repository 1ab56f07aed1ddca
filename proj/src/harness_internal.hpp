#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fraclab/harness.hpp"

namespace fraclab::harness::detail {

using Params = std::map<std::string, std::vector<double>>;

struct Param {
  std::string key;
  std::vector<double> defaults;
  /// Returns an error message for a bad entry, empty when fine.
  std::function<std::string(double)> check;
  /// A list of any length >= 1; otherwise exactly one value.
  bool list = false;
};

struct Schema {
  std::vector<Param> params;
  /// Cross-key consistency; returns an error message or empty.
  std::function<std::string(const Params&)> consistent;
};

const Schema& schema(const std::string& kind);

/// Defaults overlaid with the config section, validated.
Params resolve(const std::string& kind, const Config& config);

inline double get(const Params& p, const std::string& key) { return p.at(key).front(); }
inline std::size_t get_size(const Params& p, const std::string& key) {
  return static_cast<std::size_t>(p.at(key).front());
}

RunReport run_kernel_check(const Params& p, const std::filesystem::path& out);
RunReport run_poisson(const Params& p, const std::filesystem::path& out);
RunReport run_elliptic(const Params& p, const std::filesystem::path& out);
RunReport run_ladder(const Params& p, const std::filesystem::path& out);
RunReport run_fujita(const Params& p, const std::filesystem::path& out);
RunReport run_timefrac(const Params& p, const std::filesystem::path& out);
RunReport run_separable(const Params& p, const std::filesystem::path& out);

/// Appends a check; pass is computed from measured, relation and tolerance.
void add_check(RunReport& r, int criterion, std::string name, double measured, std::string relation, double tolerance,
               std::string note = {});
/// Boolean check recorded as measured 1/0 against "== 1".
void add_flag(RunReport& r, int criterion, std::string name, bool ok, std::string note = {});

/// Wall-clock stage timer that appends to the report on destruction.
class Stage {
public:
  Stage(RunReport& r, std::string name, int criterion);
  ~Stage();
  Stage(const Stage&) = delete;
  Stage& operator=(const Stage&) = delete;

private:
  RunReport& report_;
  std::string name_;
  int criterion_;
  double start_;
};

void emit_csv(RunReport& r, const std::filesystem::path& path, const CsvTable& table);
void emit_json_text(RunReport& r, const std::filesystem::path& path, const std::string& text);

}  // namespace fraclab::harness::detail
