#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "stable_lattice/config.hpp"
#include "stable_lattice/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw slat::ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--threads", args.threads, "worker thread cap (does not affect results)");
  cmd->add_flag("--quiet", args.quiet, "suppress console output");
}

slat::RunOptions make_options(const CommonArgs& args) {
  slat::RunOptions opts;
  if (args.seed_set) opts.seed_override = args.seed;
  if (!args.out_dir.empty()) opts.out_override = args.out_dir;
  opts.threads = args.threads;
  opts.quiet = args.quiet;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice systems driven by white symmetric alpha-stable noise"};
  app.set_version_flag("--version", slat::kVersion);
  app.require_subcommand(1);

  CommonArgs sample_args, simulate_args, verify_args, validate_args, experiment_args;
  std::string experiment_name;

  CLI::App* sample = app.add_subcommand("sample", "dump a white-noise path as CSV");
  add_common(sample, sample_args);
  CLI::App* simulate = app.add_subcommand("simulate", "run one trajectory and dump it as CSV");
  add_common(simulate, simulate_args);
  CLI::App* verify =
      app.add_subcommand("verify-kernel-bound", "check the matrix-power bound exhaustively");
  add_common(verify, verify_args);
  CLI::App* validate = app.add_subcommand("validate", "run assumption validation and report");
  add_common(validate, validate_args);
  CLI::App* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", experiment_name,
                         "ou-uniform-bound | contraction | propagation | galerkin | "
                         "moment-growth | mixing | min-b");
  add_common(experiment, experiment_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      const auto config = slat::parse_config(read_file(sample_args.config_path));
      return slat::run_sample(config, make_options(sample_args));
    }
    if (simulate->parsed()) {
      const auto config = slat::parse_config(read_file(simulate_args.config_path));
      return slat::run_simulate(config, make_options(simulate_args));
    }
    if (verify->parsed()) {
      const auto config = slat::parse_config(read_file(verify_args.config_path));
      return slat::run_verify_kernel_bound(config, make_options(verify_args));
    }
    if (validate->parsed()) {
      const auto config = slat::parse_config(read_file(validate_args.config_path));
      return slat::run_validate(config, make_options(validate_args));
    }
    if (experiment->parsed()) {
      auto config = slat::parse_config(read_file(experiment_args.config_path));
      if (!experiment_name.empty()) {
        if (!config.experiment) config.experiment = slat::ExperimentRequest{};
        config.experiment->name = experiment_name;
      }
      return slat::run_experiment(config, make_options(experiment_args));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
