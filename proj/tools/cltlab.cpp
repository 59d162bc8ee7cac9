// Command-line entry point: run <config>, list, verify.

#include "cltlab/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Joint CLT scenario runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output-dir", run_dir, "Artifact directory");

  auto* list = app.add_subcommand("list", "List built-in scenarios");

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Run every built-in scenario");
  verify->add_option("-o,--output-dir", verify_dir, "Root directory for artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cltlab::kExitConfig;
  }

  if (*list) {
    for (const auto& s : cltlab::builtin_scenarios()) {
      std::cout << s.name << "\t" << s.description << "\n";
    }
    return cltlab::kExitOk;
  }

  if (*run) {
    cltlab::ExperimentConfig config;
    try {
      if (const auto* builtin = cltlab::find_builtin(config_path)) {
        config = builtin->config();
      } else {
        config = cltlab::load_config(config_path);
      }
    } catch (const cltlab::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return cltlab::kExitConfig;
    }
    const auto dir = cltlab::resolve_output_dir(config, run_dir);
    cltlab::ScenarioResult result;
    const int rc = cltlab::run_scenario(config, dir, &result);
    std::cout << config.scenario << ": expected "
              << (config.expectation == cltlab::Expectation::pass ? "pass" : "fail")
              << ", observed " << (result.observed_pass ? "pass" : "fail") << " -> "
              << (rc == cltlab::kExitOk ? "OK" : rc == cltlab::kExitAborted ? "ABORTED" : "MISMATCH")
              << " (" << dir.string() << ")\n";
    if (!result.completed) std::cerr << "runtime error: " << result.error << "\n";
    return rc;
  }

  std::filesystem::path root = verify_dir;
  if (root.empty()) {
    const char* env = std::getenv(cltlab::kOutputDirEnv);
    root = env != nullptr && *env != '\0' ? env : "verify_out";
  }
  return cltlab::verify_all(root, std::cout);
}
