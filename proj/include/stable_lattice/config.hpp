#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "stable_lattice/experiments.hpp"
#include "stable_lattice/kernel_estimates.hpp"

// JSON configuration ingestion and run orchestration for the CLI. Parsing is
// strict: unknown keys are errors, the seed is mandatory, and the model must
// pass validate_assumptions before anything runs.
//
// Exit statuses: 0 pass, 1 experiment-verdict fail, 2 runtime/config error.

namespace slat {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentRequest {
  std::string name;
  std::size_t replicas = 100;
  nlohmann::json params = nlohmann::json::object();
};

struct SampleRequest {
  std::size_t sites = 1;
  std::size_t steps = 16;
};

struct SimulateRequest {
  nlohmann::json x0_profile;  // profile object; zero profile when empty
};

struct VerifyBoundRequest {
  int n_max = 3;
  std::vector<double> c_values{0.0, 1.0};
};

struct RunConfig {
  nlohmann::json raw;  // effective config document (manifest round-trips it)
  ModelSpec spec;
  StableParams noise;
  std::uint64_t seed = 0;
  SchemeConfig scheme;
  std::optional<ExperimentRequest> experiment;
  std::optional<SampleRequest> sample;
  std::optional<SimulateRequest> simulate;
  std::optional<VerifyBoundRequest> verify;
  std::optional<std::string> output;
};

// Throws ConfigError on malformed JSON, unknown keys, bad ranges, and on
// assumption-validation failure (the validation report is embedded in the
// message, witness included).
RunConfig parse_config(const std::string& text);
RunConfig parse_config_json(const nlohmann::json& doc);

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  int threads = 1;
  bool quiet = false;
};

// resolved output directory: --out, then config.output, then $STABLE_LATTICE_OUT, then "."
std::string resolve_output_dir(const RunConfig& config, const RunOptions& options);

// profile objects: {"kind":"zero"} | {"kind":"constant","value":v}
//                | {"kind":"growth","R":r,"rho":p} | {"kind":"neg_growth","R":r,"rho":p}
LatticeState state_from_profile(const Cube& cube, const nlohmann::json& profile);

// runs the configured experiment in memory (no files written)
ExperimentReport dispatch_experiment(const RunConfig& config, const RunOptions& options);

int run_validate(const RunConfig& config, const RunOptions& options);
int run_sample(const RunConfig& config, const RunOptions& options);
int run_simulate(const RunConfig& config, const RunOptions& options);
int run_verify_kernel_bound(const RunConfig& config, const RunOptions& options);
int run_experiment(const RunConfig& config, const RunOptions& options);

}  // namespace slat
