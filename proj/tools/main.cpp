#include "alexnorm/scenario.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

constexpr const char* kOutEnv = "ALEXNORM_OUT_DIR";

int run_command(const std::string& manifest_path, const std::string& out_flag, unsigned jobs, std::optional<double> tol) {
  using namespace alexnorm;
  scenario::Manifest m;
  try {
    m = scenario::load_manifest(manifest_path);
  } catch (const SpecParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  scenario::RunOptions opt;
  if (!out_flag.empty()) opt.out_dir = out_flag;
  else if (const char* env = std::getenv(kOutEnv); env && *env) opt.out_dir = env;
  opt.jobs = jobs;
  opt.tol = tol;

  scenario::RunReport rep;
  try {
    rep = scenario::run(std::move(m), opt);
  } catch (const SpecParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (const auto& o : rep.outcomes) {
    const char* status = o.error ? "ERROR" : (o.passed ? "PASS " : "FAIL ");
    std::cout << status << "  " << o.name;
    if (o.error) std::cout << "  " << *o.error;
    std::cout << "\n";
  }
  std::cout << rep.outcomes.size() << " scenarios, " << (rep.all_passed() ? "all passed" : "not all passed") << "\n";
  return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alexiewicz norms, translation gaps and Poisson boundary convergence"};
  app.require_subcommand(1);

  std::string manifest, out;
  unsigned jobs = 1;
  std::optional<double> tol;
  auto* run = app.add_subcommand("run", "run the scenarios of a manifest");
  run->add_option("manifest", manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, std::string("output directory (default: $") + kOutEnv + " or ./out)");
  run->add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::Range(1u, 256u));
  run->add_option("--tol", tol, "override every scenario tolerance")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-builtins", "print builtin functions and weights");
  std::string name;
  auto* desc = app.add_subcommand("describe", "describe a builtin");
  desc->add_option("name", name)->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) return run_command(manifest, out, jobs, tol);
  if (*list) {
    for (const auto& n : alexnorm::spec::registry_list()) std::cout << n << "\n";
    return 0;
  }
  if (*desc) {
    const auto b = alexnorm::spec::describe(name);
    if (!b) {
      std::cerr << "unknown builtin '" << name << "'\n";
      return 2;
    }
    std::cout << b->name << " (" << b->category << "): " << b->summary << "\n";
    return 0;
  }
  return 0;
}
