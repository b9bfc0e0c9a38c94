#pragma once

// Experiment runner: JSON configs in, deterministic CSV/JSON artifacts out.
// A config selects one experiment kind, is schema-validated field by field
// (unknown fields are rejected), and dispatches to the corresponding module.
// Identical config + seed yields byte-identical artifacts for any thread
// count: cells are assembled in grid order and every random draw comes from
// the counter-based generator.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace apq {

// Schema or semantic violation in a config; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  spectrum,   // eigenstructure of a named generator
  eliminate,  // adiabatic-elimination order study on the seeded bipartite model
  diamond,    // diamond-norm property battery on seeded random channels
  simulate,   // full evolution or Trotter step-count scaling
  sweep,      // layered-protocol (eps, dt) verification sweep
  cavity,     // lossy-cavity model: Purcell reduction or its AP sweep
  kinetic,    // discrete-velocity BGK epsilon/dt sweep
  resources,  // gate-cost model table
};

std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectrum;
  std::string name;          // artifact stem; defaults to the kind name
  std::uint64_t seed = 1;    // feeds every randomized construction
  nlohmann::json params;     // validated per-kind parameter object
  std::string raw_text;      // exact bytes parsed, hashed into the summary
};

// Parses and schema-validates a config. Throws ConfigError on: malformed
// JSON, unknown fields (top level or params), wrong types, out-of-range
// values, or grids too short to fit (fewer than the module's minimum).
ExperimentConfig parse_experiment_config(const std::string& json_text);

// One acceptance-style threshold check: pass iff lo <= value <= hi.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  std::string csv;          // grid artifact; empty when the kind emits none
  nlohmann::json summary;   // full JSON summary (version, hash, results, checks)
  std::vector<CheckResult> checks;
  bool checks_pass = true;  // conjunction over checks
};

// Runs the experiment. Module-level numerical failures (non-convergence,
// CP-violation aborts) propagate as std::runtime_error; they map to exit
// code 3. Threshold misses do not throw: they are recorded in `checks`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

// Built-in preset configs, one per reproduction target.
std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);  // throws ConfigError
std::string preset_config_text(const std::string& name);  // throws ConfigError

// Exit-code policy shared by the CLI and the tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitCheckFailed = 4;

}  // namespace apq
