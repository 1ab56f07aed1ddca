#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "doctest.h"
#include "fraclab/harness.hpp"

using namespace fraclab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fraclab_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// the message of the ConfigParseError thrown by f, empty if none
template <class F>
std::string parse_error(F&& f) {
  try {
    f();
  } catch (const ConfigParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("catalog: seven sorted kinds, stable") {
  const auto& a = list_experiments();
  REQUIRE(a.size() == 7);
  for (std::size_t k = 1; k < a.size(); ++k) CHECK(a[k - 1].kind < a[k].kind);
  for (const auto& e : a) {
    CHECK_FALSE(e.description.empty());
    CHECK_FALSE(e.topic.empty());
  }
  const auto& b = list_experiments();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].kind == b[k].kind);
  // every numbered criterion 1..13 is owned by exactly one kind
  std::vector<int> seen;
  for (const auto& e : a) seen.insert(seen.end(), e.criteria.begin(), e.criteria.end());
  std::sort(seen.begin(), seen.end());
  REQUIRE(seen.size() == 13);
  for (int c = 1; c <= 13; ++c) CHECK(seen[static_cast<std::size_t>(c - 1)] == c);
}

TEST_CASE("ini parsing: sections, lists, comments") {
  const Config c = parse_ini("out = results  # where\n\n[fujita]\nps = 1.2, 1.5 ; two\namplitudes=1e-1\n", "t.ini");
  REQUIRE(c.sections.count(""));
  CHECK(c.sections.at("").at("out").is_text);
  CHECK(c.sections.at("").at("out").text == "results");
  const auto& ps = c.sections.at("fujita").at("ps");
  CHECK(ps.numbers == std::vector<double>{1.2, 1.5});
  CHECK(ps.line == 4);
  CHECK(c.sections.at("fujita").at("amplitudes").numbers == std::vector<double>{0.1});
  CHECK_NOTHROW(validate(c));

  CHECK(parse_error([] { parse_ini("[ladder]\np = 1\np = 2\n", "d.ini"); }) == "d.ini:3: duplicate key 'p'");
  CHECK(parse_error([] { parse_ini("[ladder\n", "h.ini"); }).rfind("h.ini:1:", 0) == 0);
  CHECK(parse_error([] { parse_ini("\n\njust words\n", "w.ini"); }).rfind("w.ini:3:", 0) == 0);
}

TEST_CASE("validation is line-anchored and rejects unknown keys") {
  CHECK(parse_error([] { validate(parse_ini("[ladder]\nalpha = 0.5\nq = 1\n", "u.ini")); }) ==
        "u.ini:3: unknown key 'q' in [ladder]");
  CHECK(parse_error([] { validate(parse_ini("[ladder]\np = -1\n", "p.ini")); }) == "p.ini:2: p = -1: must be positive");
  CHECK(parse_error([] { validate(parse_ini("[nonsense]\nx = 1\n", "s.ini")); }).rfind("s.ini:2: unknown section", 0) == 0);
  CHECK(parse_error([] { validate(parse_ini("color = 3\n", "top.ini")); }).rfind("top.ini:1:", 0) == 0);
  CHECK(parse_error([] { validate(parse_ini("[ladder]\np = abc\n", "n.ini")); }) == "n.ini:2: 'p' must be numeric");
  CHECK(parse_error([] { validate(parse_ini("[ladder]\np = 1, 2\n", "l.ini")); }) == "l.ini:2: 'p' takes one value");
  CHECK(parse_error([] { validate(parse_ini("[kernel-check]\npoints = 1000\n", "g.ini")); }).find("power of two") !=
        std::string::npos);
  // cross-key consistency
  CHECK(parse_error([] { validate(parse_ini("[ladder]\nalpha = 1.5\nn = 1\n", "x.ini")); }).find("smaller than n") !=
        std::string::npos);
  CHECK(parse_error([] { validate(parse_ini("[poisson]\nball_radii = 4, 2\n", "r.ini")); }).find("increasing") !=
        std::string::npos);
  CHECK(parse_error([] { validate(parse_ini("[timefrac]\ntaus = 1\n", "t.ini")); }).find("not an integer") !=
        std::string::npos);
}

TEST_CASE("json is an equivalent encoding") {
  const Config j = parse_json(R"({"out": "r", "fujita": {"ps": [1.2, 1.5], "amplitudes": 0.1}})", "c.json");
  const Config i = parse_ini("out = r\n[fujita]\nps = 1.2, 1.5\namplitudes = 0.1\n", "c.ini");
  CHECK(j.sections.at("fujita").at("ps").numbers == i.sections.at("fujita").at("ps").numbers);
  CHECK(j.sections.at("").at("out").text == "r");
  CHECK_NOTHROW(validate(j));
  CHECK(parse_error([] { parse_json("{\n\"ladder\": {\n\"p\": ,\n}}", "bad.json"); }).rfind("bad.json:3:", 0) == 0);
  CHECK(parse_error([] { validate(parse_json("{\n\"ladder\": {\n  \"zzz\": 1}}", "k.json")); }) ==
        "k.json:3: unknown key 'zzz' in [ladder]");
  CHECK(parse_error([] { parse_json("[1, 2]", "a.json"); }).rfind("a.json:1:", 0) == 0);
}

TEST_CASE("numbers print with 17 significant digits and round-trip") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> expo(-300.0, 300.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::pow(10.0, expo(gen)) * (k % 2 ? 1.0 : -1.0);
    CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
  }
  CsvTable t{{"a", "b"}, {}};
  t.add({"1", "2"});
  CHECK(t.str() == "a,b\n1,2\n");
  CHECK_THROWS(t.add({"1"}));
}

TEST_CASE("atomic writes leave no temporary behind") {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  write_atomic(dir / "x.csv", "first\n");
  write_atomic(dir / "x.csv", "second\n");
  CHECK(slurp(dir / "x.csv") == "second\n");
  CHECK_FALSE(fs::exists(dir / "x.csv.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("report pass logic and strict mode") {
  RunReport r;
  Check ok;
  ok.pass = true;
  r.checks.push_back(ok);
  CHECK(r.passed(false));
  r.warnings.push_back("box");
  CHECK(r.passed(false));
  CHECK_FALSE(r.passed(true));
  r.warnings.clear();
  Check skip;
  skip.skipped = true;
  r.checks.push_back(skip);
  CHECK(r.passed(false));
  CHECK_FALSE(r.passed(true));
  Check bad;
  r.checks.push_back(bad);
  CHECK_FALSE(r.passed(false));
}

TEST_CASE("ladder experiment: artifacts, first_positive = 4, no artifacts on bad config") {
  const fs::path dir = scratch("ladder");
  const RunReport r = run_experiment("ladder", Config{}, dir);
  CHECK(r.passed(true));
  write_report(r, dir);
  CHECK(fs::exists(dir / "report.json"));
  const std::string summary = slurp(dir / "ladder_summary.csv");
  CHECK(summary.find("\n1,0.5,2,8,4,5,") != std::string::npos);
  CHECK(slurp(dir / "ladder.csv").rfind("k,p_k,exact\n1,-1.5,-3/2\n", 0) == 0);

  const fs::path never = scratch("ladder_bad");
  CHECK_THROWS_AS(run_experiment("ladder", parse_ini("[ladder]\np = -1\n"), never), ConfigParseError);
  CHECK_FALSE(fs::exists(never));
  CHECK_THROWS_AS(run_experiment("nonsense", Config{}, never), ConfigParseError);
  CHECK_FALSE(fs::exists(never));
  fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical CSV artifacts") {
  const Config cfg = parse_ini("[elliptic]\nsigmas = 0.5\neigen_alphas = 1\n");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const RunReport ra = run_experiment("elliptic", cfg, a);
  const RunReport rb = run_experiment("elliptic", cfg, b);
  REQUIRE(ra.artifacts.size() == rb.artifacts.size());
  for (std::size_t k = 0; k < ra.artifacts.size(); ++k) {
    CHECK(ra.artifacts[k].filename() == rb.artifacts[k].filename());
    CHECK(slurp(ra.artifacts[k]) == slurp(rb.artifacts[k]));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
