#include "catch_amalgamated.hpp"

#include "alexnorm/scenario.hpp"

#include <cstdlib>
#include <unistd.h>

using namespace alexnorm;
using spec::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("alexnorm_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

scenario::Manifest manifest_of(const std::string& text) { return scenario::parse_manifest(spec::parse_text(text, "test")); }

const char* small_manifest = R"({
  "seed": 7,
  "scenarios": [
    {"name": "norm", "kind": "norm", "function": "indicator_01", "params": {"expected": 1, "brute_pairs": 20000}},
    {"name": "iso", "kind": "norm", "function": "ramp", "params": {"isometry_trials": 12}, "thresholds": {"tol": 1e-12}},
    {"name": "sweep", "kind": "gap_sweep", "function": "ramp", "ladder": [0.5, 0.25, 0.125, 0.001]},
    {"name": "lemma", "kind": "lemma_check", "params": {"family": "constants", "count": 5, "E": [0, 1]}}
  ]
})";

}  // namespace

TEST_CASE("registry is sorted and complete") {
  const auto names = spec::registry_list();
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(names.size() == 11);
  for (const char* n : {"sinc_primitive", "indicator_01", "step_signal", "reciprocal_quadratic", "step_weight", "constant"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  CHECK(spec::describe("gaussian")->category == "function");
  CHECK_FALSE(spec::describe("wavelet"));
}

TEST_CASE("unknown builtin names the field") {
  const char* text = R"({"scenarios": [{"name": "a", "kind": "gap_sweep", "function": "wavelet", "ladder": [0.5]}]})";
  CHECK_THROWS_AS(manifest_of(text), SpecParseError);
  CHECK_THROWS_WITH(manifest_of(text), ContainsSubstring("scenarios[0].function") && ContainsSubstring("wavelet"));
  const char* nested = R"({"scenarios": [{"name": "a", "kind": "norm", "function": {"kind": "builtin", "name": "wavelet"}}]})";
  CHECK_THROWS_WITH(manifest_of(nested), ContainsSubstring("scenarios[0].function.name"));
}

TEST_CASE("parse diagnostics") {
  CHECK_THROWS_WITH(spec::parse_text("{\n  \"scenarios\": [\n  ,]\n}", "m.json"), ContainsSubstring("m.json:3"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "gap_sweep", "function": "ramp"}]})"),
                    ContainsSubstring("scenarios[0].ladder"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "fourier", "function": "ramp"}]})"),
                    ContainsSubstring("scenarios[0].kind"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "norm", "function": "ramp", "thresholds": {"tol": 0}}]})"),
                    ContainsSubstring("thresholds.tol"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "weighted_sweep", "function": "ramp", "ladder": [1]}]})"),
                    ContainsSubstring("scenarios[0].weight"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "norm", "function": "ramp"},
                                                  {"name": "a", "kind": "norm", "function": "ramp"}]})"),
                    ContainsSubstring("duplicate"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "norm", "function": "ramp", "output_path": "../x.csv"}]})"),
                    ContainsSubstring("output_path"));
  CHECK_THROWS_WITH(manifest_of(R"({"scenarios": [{"name": "a", "kind": "weight_audit", "weight": {"kind": "builtin", "name": "step_weight", "below": -1}, "ladder": [1]}]})"),
                    ContainsSubstring("scenarios[0].weight"));
}

TEST_CASE("function and weight specs") {
  const json j = json::parse(R"({"kind": "table", "breakpoints": [0, 1, 3], "values": [0, 2, 1], "limit_neg": 0, "limit_pos": 1})");
  const auto t = spec::parse_function(spec::Node(j, "f"));
  REQUIRE(t.integrand);
  CHECK_THAT(alexiewicz_norm(*t.integrand), WithinAbs(2.0, 1e-15));
  CHECK_THAT(t.integrand->pointwise(2.0), WithinAbs(-0.5, 1e-15));

  const json bad = json::parse(R"({"kind": "table", "breakpoints": [0, 1], "values": [0, 2], "limit_pos": 3})");
  CHECK_THROWS_WITH(spec::parse_function(spec::Node(bad, "f")), ContainsSubstring("f.limit_pos"));

  const json ind = json::parse(R"({"kind": "indicator", "a": -1, "b": 2, "height": 0.5})");
  CHECK_THAT(alexiewicz_norm(*spec::parse_function(spec::Node(ind, "f")).integrand), WithinAbs(1.5, 1e-15));

  const json one = json::parse(R"({"kind": "constant", "value": 1})");
  const auto c = spec::parse_function(spec::Node(one, "f"));
  CHECK_FALSE(c.integrand);
  CHECK(c.signal(-1e9) == 1.0);

  const json w1 = json::parse(R"({"kind": "closed_form", "name": "step", "below": 2, "above": 5, "threshold": 1})");
  const Weight w = spec::parse_weight(spec::Node(w1, "w"));
  CHECK(w(0.0) == 2.0);
  CHECK(w(1.0) == 5.0);
  const json w2 = json::parse(R"({"kind": "table", "breakpoints": [0, 1, 1, 2], "values": [1, 1, 3, 3]})");
  const Weight tw = spec::parse_weight(spec::Node(w2, "w"));
  CHECK(tw(1.0) == 3.0);
  CHECK(tw(0.5) == 1.0);
}

TEST_CASE("spec files resolve relative to the manifest") {
  const fs::path dir = scratch("files");
  fs::create_directories(dir / "specs");
  scenario::write_text(dir / "specs" / "box.json", R"({"kind": "indicator", "a": 0, "b": 2})");
  scenario::write_text(dir / "m.json", R"({"scenarios": [{"name": "n", "kind": "norm", "function": "specs/box.json", "params": {"expected": 2}}]})");
  const auto m = scenario::load_manifest(dir / "m.json");
  const auto rep = scenario::run(m, {dir / "out"});
  CHECK(rep.all_passed());
  CHECK(fs::exists(dir / "out" / "n.csv"));
  fs::remove_all(dir);
}

TEST_CASE("empty manifest writes nothing") {
  const fs::path dir = scratch("empty");
  const auto rep = scenario::run(manifest_of(R"({"scenarios": []})"), {dir});
  CHECK(rep.all_passed());
  CHECK(rep.outcomes.empty());
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("runs are byte-identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto m = manifest_of(small_manifest);
  const auto ra = scenario::run(m, {a, 1});
  const auto rb = scenario::run(m, {b, 3});
  CHECK(ra.all_passed());
  for (const char* f : {"norm.csv", "iso.csv", "sweep.csv", "lemma.csv", "summary.json"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string csv = slurp(a / "sweep.csv");
  CHECK(csv.starts_with("x,gap,bound_lower,bound_upper,passed\n"));

  auto reseeded = m;
  reseeded.seed = 8;
  const fs::path c = scratch("det_c");
  scenario::run(reseeded, {c});
  CHECK(slurp(a / "iso.csv") != slurp(c / "iso.csv"));
  CHECK(slurp(a / "norm.csv") == slurp(c / "norm.csv"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("csv numbers round-trip") {
  for (double v : {0.1, 1.0 / 3.0, std::sqrt(2.0), 1e-300, -7.25e17, 6.02214076e23}) CHECK(std::stod(scenario::fmt(v)) == v);
  CHECK(scenario::fmt(std::optional<double>{}).empty());
}

TEST_CASE("domain errors are reported apart from failures") {
  const auto m = manifest_of(R"({"scenarios": [
    {"name": "bad", "kind": "gap_sweep", "function": "step_signal", "ladder": [0.5]},
    {"name": "red", "kind": "gap_sweep", "function": "ramp", "ladder": [0.5], "thresholds": {"final_gap": 1e-6}}]})");
  const fs::path dir = scratch("errors");
  const auto rep = scenario::run(m, {dir});
  REQUIRE(rep.outcomes.size() == 2);
  CHECK(rep.outcomes[0].error);
  CHECK_THAT(*rep.outcomes[0].error, ContainsSubstring("ScenarioFailure"));
  CHECK_FALSE(rep.outcomes[1].error);
  CHECK_FALSE(rep.outcomes[1].passed);
  CHECK_FALSE(rep.all_passed());
  CHECK_FALSE(fs::exists(dir / "bad.csv"));
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["scenarios"][0]["status"] == "error");
  CHECK(summary["scenarios"][1]["status"] == "failed");
  fs::remove_all(dir);
}

TEST_CASE("tolerance override") {
  auto m = manifest_of(R"({"scenarios": [{"name": "n", "kind": "norm", "function": "ramp", "params": {"expected": 0.49}}]})");
  const fs::path dir = scratch("tol");
  CHECK_FALSE(scenario::run(m, {dir}).all_passed());
  CHECK(scenario::run(m, {dir, 1, 0.02}).all_passed());
  CHECK_THROWS_AS(scenario::run(m, {dir, 1, -1.0}), SpecParseError);
  fs::remove_all(dir);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("exe");
  fs::create_directories(dir);
  const std::string cli = ALEXNORM_CLI;
  CHECK(std::system((cli + " list-builtins > " + (dir / "list.txt").string()).c_str()) == 0);
  const std::string list = slurp(dir / "list.txt");
  CHECK(list.starts_with("bump\nconstant\ncosine\n"));
  CHECK(std::system((cli + " describe sinc_primitive > /dev/null").c_str()) == 0);
  CHECK(std::system((cli + " describe wavelet 2> /dev/null").c_str()) != 0);

  scenario::write_text(dir / "empty.json", R"({"scenarios": []})");
  CHECK(std::system((cli + " run " + (dir / "empty.json").string() + " --out " + (dir / "o").string() + " > /dev/null").c_str()) == 0);
  CHECK_FALSE(fs::exists(dir / "o"));

  scenario::write_text(dir / "bad.json", R"({"scenarios": [{"name": "a", "kind": "norm", "function": "wavelet"}]})");
  CHECK(WEXITSTATUS(std::system((cli + " run " + (dir / "bad.json").string() + " 2> /dev/null").c_str())) == 2);

  scenario::write_text(dir / "one.json", R"({"scenarios": [{"name": "n", "kind": "norm", "function": "ramp"}]})");
  const std::string env_run = "ALEXNORM_OUT_DIR=" + (dir / "env").string() + " " + cli + " run " + (dir / "one.json").string() + " > /dev/null";
  CHECK(std::system(env_run.c_str()) == 0);
  CHECK(fs::exists(dir / "env" / "n.csv"));
  const std::string red = R"({"scenarios": [{"name": "n", "kind": "norm", "function": "ramp", "params": {"expected": 3}}]})";
  scenario::write_text(dir / "red.json", red);
  CHECK(WEXITSTATUS(std::system((cli + " run " + (dir / "red.json").string() + " --out " + (dir / "r").string() + " > /dev/null").c_str())) == 1);
  fs::remove_all(dir);
}
