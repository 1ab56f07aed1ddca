#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

namespace fs = std::filesystem;
using namespace fraclab::harness;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  bool strict = false;
};

void print_report(const RunReport& r) {
  for (const Check& c : r.checks) {
    const char* status = c.skipped ? "SKIP" : (c.pass ? "pass" : "FAIL");
    std::printf("  [%s] (%d) %s: %.6g %s %.6g%s%s\n", status, c.criterion, c.name.c_str(), c.measured,
                c.relation.c_str(), c.tolerance, c.note.empty() ? "" : "  # ",
                c.note.c_str());
  }
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
  for (const auto& s : r.stages) std::printf("  stage %-24s %8.2f s\n", s.stage.c_str(), s.seconds);
}

int run(const std::vector<std::string>& kinds, const Flags& flags) {
  Config cfg;
  fs::path out = "fraclab-out";
  bool strict = flags.strict;
  try {
    if (!flags.config.empty()) cfg = load_config(flags.config);
    // every section is checked before anything is written
    validate(cfg);
    const auto top = cfg.sections.find("");
    if (top != cfg.sections.end()) {
      if (auto o = top->second.find("out"); o != top->second.end()) out = o->second.text;
      if (auto t = top->second.find("threads"); t != top->second.end() && flags.threads == 0)
        omp_set_num_threads(static_cast<int>(t->second.numbers.front()));
      if (auto s = top->second.find("strict"); s != top->second.end()) strict = strict || s->second.numbers.front() == 1.0;
    }
  } catch (const ConfigParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadConfig;
  }
  if (!flags.out.empty()) out = flags.out;
  if (flags.threads > 0) omp_set_num_threads(flags.threads);

  int status = kOk;
  for (const auto& kind : kinds) {
    std::printf("%s\n", kind.c_str());
    std::fflush(stdout);
    try {
      const fs::path dir = out / kind;
      const RunReport r = run_experiment(kind, cfg, dir);
      write_report(r, dir);
      print_report(r);
      const bool ok = r.passed(strict);
      std::printf("  => %s (%s)\n", ok ? "PASS" : "FAIL", dir.string().c_str());
      if (!ok && status == kOk) status = kCheckFailed;
    } catch (const ConfigParseError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kBadConfig;
    } catch (const fraclab::ConfigError& e) {
      std::fprintf(stderr, "%s: parameter rejected: %s\n", kind.c_str(), e.what());
      return kBadConfig;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: internal error: %s\n", kind.c_str(), e.what());
      status = kInternal;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional reaction-diffusion numerical lab"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "INI or JSON configuration")->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "output directory (default fraclab-out)");
  app.add_option("--threads", flags.threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict", flags.strict, "treat warnings and skipped checks as failures");

  std::optional<std::string> chosen;
  auto* list = app.add_subcommand("list", "print the experiment catalog");
  auto* all = app.add_subcommand("all", "run every experiment");
  for (const auto& e : list_experiments()) {
    auto* sub = app.add_subcommand(e.kind, e.description);
    sub->fallthrough();
    sub->callback([&chosen, k = e.kind] { chosen = k; });
  }
  all->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kBadConfig;
  }

  if (list->parsed()) {
    for (const auto& e : list_experiments()) {
      std::string crit;
      for (int c : e.criteria) crit += (crit.empty() ? "" : ",") + std::to_string(c);
      std::printf("%-13s %s [%s]%s%s\n", e.kind.c_str(), e.description.c_str(), e.topic.c_str(),
                  crit.empty() ? "" : " criteria ", crit.c_str());
    }
    return kOk;
  }
  std::vector<std::string> kinds;
  if (all->parsed()) {
    for (const auto& e : list_experiments()) kinds.push_back(e.kind);
  } else {
    kinds.push_back(*chosen);
  }
  return run(kinds, flags);
}
