// apqsim: run, validate, and list numerical experiments on stiff open
// quantum systems and kinetic relaxation models.
//
// Exit codes:
//   0  success
//   2  configuration error (malformed JSON, unknown fields, bad ranges)
//   3  numerical failure flagged by the computation (e.g. SDP non-convergence)
//   4  a threshold check failed and --check was requested

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "apq/experiment.hpp"
#include "apq/report.hpp"
#include "apq/version.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return false;
  out = ss.str();
  return true;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads,
            bool check) {
  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return apq::kExitConfigError;
  }

  apq::ExperimentConfig cfg;
  try {
    cfg = apq::parse_experiment_config(text);
  } catch (const apq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return apq::kExitConfigError;
  }

  apq::ExperimentResult res;
  try {
    res = apq::run_experiment(cfg, threads);
  } catch (const apq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return apq::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return apq::kExitNumericalError;
  }

  const std::string stem = out_dir + "/" + cfg.name;
  try {
    if (!res.csv.empty()) apq::atomic_write(stem + ".csv", res.csv);
    apq::atomic_write(stem + ".summary.json", res.summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write artifacts: " << e.what() << "\n";
    return apq::kExitNumericalError;
  }

  std::cout << cfg.name << ": wrote " << stem << ".summary.json";
  if (!res.csv.empty()) std::cout << " and " << stem << ".csv";
  std::cout << "\n";
  for (const apq::CheckResult& c : res.checks) {
    std::printf("  [%s] %-32s value=%.6g band=[%.6g, %.6g]\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.lo, c.hi);
  }
  if (!res.checks.empty())
    std::cout << (res.checks_pass ? "all checks passed" : "some checks FAILED") << "\n";

  if (check && !res.checks_pass) return apq::kExitCheckFailed;
  return apq::kExitOk;
}

int cmd_validate(const std::string& config_path) {
  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return apq::kExitConfigError;
  }
  try {
    const apq::ExperimentConfig cfg = apq::parse_experiment_config(text);
    std::cout << "valid: kind=" << apq::to_string(cfg.kind) << " name=" << cfg.name
              << "\n";
    return apq::kExitOk;
  } catch (const apq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return apq::kExitConfigError;
  }
}

int cmd_presets(const std::string& emit) {
  if (!emit.empty()) {
    try {
      std::cout << apq::preset_config_text(emit);
      return apq::kExitOk;
    } catch (const apq::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return apq::kExitConfigError;
    }
  }
  for (const std::string& name : apq::preset_names())
    std::cout << name << " — " << apq::preset_description(name) << "\n";
  return apq::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for stiff open quantum systems"};
  app.set_version_flag("--version", std::string(apq::version_string));
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", emit;
  int threads = 1;
  bool check = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_flag("--check", check, "exit 4 if any threshold check fails");
  run->add_option("--out", out_dir, "artifact directory (default: .)");
  run->add_option("--threads", threads, "worker threads for sweeps")
      ->check(CLI::Range(1, 256));

  CLI::App* validate = app.add_subcommand("validate", "validate a config without running");
  validate->add_option("config", config_path, "JSON config file")->required();

  CLI::App* presets = app.add_subcommand("presets", "list built-in experiment presets");
  presets->add_option("--emit", emit, "print the named preset's config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? apq::kExitOk : apq::kExitConfigError;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, threads, check);
  if (validate->parsed()) return cmd_validate(config_path);
  return cmd_presets(emit);
}
