// conformax command line: run the continuation pipeline from a config file,
// or execute one of the named verification suites.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conformax/config.hpp"
#include "conformax/errors.hpp"
#include "conformax/pipeline.hpp"
#include "conformax/verify.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_override,
                std::uint64_t seed, bool seed_set, int threads, bool threads_set) {
  conformax::RunConfig config;
  try {
    config = conformax::load_run_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (seed_set) config.seed = seed;
    if (threads_set) config.threads = threads;
    config.validate();
  } catch (const conformax::ConfigurationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }

  try {
    const conformax::RunArtifacts artifacts = conformax::run_pipeline(config);
    std::cout << artifacts.message << "\nreport: " << artifacts.report_path << '\n';
    return artifacts.exit_code;
  } catch (const conformax::ConfigurationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const conformax::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

int verify_command(const std::string& suite, const std::string& out_dir) {
  std::vector<conformax::CheckResult> results;
  try {
    results = conformax::verify_suite(suite, out_dir);
  } catch (const conformax::ConfigurationError& err) {
    std::cerr << "error: " << err.what() << "\nknown suites:";
    for (const auto& name : conformax::verify_suite_names()) std::cerr << ' ' << name;
    std::cerr << '\n';
    return 2;
  }

  bool all_pass = true;
  for (const auto& result : results) {
    all_pass = all_pass && result.pass;
    std::cout << (result.pass ? "PASS" : "FAIL") << "  " << result.name << " — "
              << result.detail << '\n';
  }
  std::cout << (all_pass ? "suite passed" : "suite FAILED") << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformax — eigenvalue maximization over conformal densities"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 0;
  int threads = 1;

  auto* run = app.add_subcommand("run", "execute the pipeline from a config file");
  run->add_option("config", config_path, "path to a key = value config file")
      ->required();
  auto* run_out = run->add_option("--out", out_override, "output directory override");
  auto* run_seed = run->add_option("--seed", seed, "seed override");
  auto* run_threads = run->add_option("--threads", threads, "worker threads");

  std::string suite;
  std::string verify_out = "verify-out";
  auto* verify = app.add_subcommand("verify", "run a named verification suite");
  verify->add_option("suite", suite, "oracles | gradients | projection | endtoend-k1 | endtoend-k2")
      ->required();
  verify->add_option("--out", verify_out, "scratch directory for suite artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    return run_command(config_path, out_override, seed, !run_seed->empty(),
                       threads, !run_threads->empty());
  }
  return verify_command(suite, verify_out);
}
