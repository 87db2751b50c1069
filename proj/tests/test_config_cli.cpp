#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stable_lattice/config.hpp"
#include "stable_lattice/report.hpp"

#include <filesystem>

using namespace slat;

namespace {

std::string minimal_config(const std::string& extra = "") {
  return std::string(R"({
    "model": {"d": 1, "N": 4,
              "kernel": {"kind": "exp_decay", "beta": 0.5},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 1.5, "seed": 42},
    "scheme": {"kind": "exponential", "dt": 0.001, "T": 1.0})") +
         extra + "\n}";
}

}  // namespace

TEST_CASE("parse_config: minimal document round-trips with computed constants") {
  const auto config = parse_config(minimal_config());
  CHECK(config.spec.eta == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));
  CHECK(config.spec.c == doctest::Approx(1.5));
  CHECK(config.spec.delta == doctest::Approx(1.5 - 1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));
  CHECK(config.seed == 42);
  CHECK(config.scheme.dt == doctest::Approx(0.001));

  // the raw document re-parses to the same configuration
  const auto again = parse_config_json(config.raw);
  CHECK(again.spec.eta == config.spec.eta);
  CHECK(again.seed == config.seed);
}

TEST_CASE("parse_config: alpha outside (1,2] is rejected with the range in the message") {
  const std::string text = R"({
    "model": {"d": 1, "N": 2,
              "kernel": {"kind": "exp_decay", "beta": 0.5},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 0.9, "seed": 1},
    "scheme": {"dt": 0.001, "T": 1.0}
  })";
  try {
    (void)parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(1, 2]") != std::string::npos);
  }
}

TEST_CASE("parse_config: unknown keys are errors at every level") {
  CHECK_THROWS_AS((void)parse_config(minimal_config(R"(, "extra": 1)")), ConfigError);
  const std::string bad_model = R"({
    "model": {"d": 1, "N": 2, "typo_key": true,
              "kernel": {"kind": "exp_decay", "beta": 0.5},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 1.5, "seed": 1},
    "scheme": {"dt": 0.001, "T": 1.0}
  })";
  try {
    (void)parse_config(bad_model);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }
}

TEST_CASE("parse_config: kernel violating the decay bound embeds the witness") {
  const std::string text = R"({
    "model": {"d": 1, "N": 2,
              "kernel": {"kind": "custom_table",
                         "entries": [{"i": [0], "j": [1], "w": 0.9}]},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 1.5, "seed": 1},
    "scheme": {"dt": 0.001, "T": 1.0}
  })";
  try {
    (void)parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("kernel_decay_bound") != std::string::npos);
    CHECK(msg.find("0.9") != std::string::npos);
    CHECK(msg.find("(0)") != std::string::npos);
    CHECK(msg.find("(1)") != std::string::npos);
  }
}

TEST_CASE("parse_config: seed is mandatory, malformed JSON reported") {
  const std::string no_seed = R"({
    "model": {"d": 1, "N": 2,
              "kernel": {"kind": "exp_decay", "beta": 0.5},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 1.5},
    "scheme": {"dt": 0.001, "T": 1.0}
  })";
  CHECK_THROWS_AS((void)parse_config(no_seed), ConfigError);
  CHECK_THROWS_AS((void)parse_config("{ not json"), ConfigError);
}

TEST_CASE("state_from_profile covers the profile kinds") {
  const Cube cube(1, 2);
  const auto zero = state_from_profile(cube, nlohmann::json{});
  for (double v : zero.values) CHECK(v == 0.0);
  const auto c = state_from_profile(cube, nlohmann::json{{"kind", "constant"}, {"value", 2.5}});
  for (double v : c.values) CHECK(v == 2.5);
  const auto g = state_from_profile(
      cube, nlohmann::json{{"kind", "growth"}, {"R", 2.0}, {"rho", 1.0}});
  CHECK(g.values[cube.index_of(LatticePoint{{2}})] == doctest::Approx(6.0));
  const auto ng = state_from_profile(cube, nlohmann::json{{"kind", "neg_growth"}});
  CHECK(ng.values[cube.index_of(LatticePoint{{0}})] == doctest::Approx(-1.0));
  CHECK_THROWS_AS((void)state_from_profile(cube, nlohmann::json{{"kind", "wavy"}}), ConfigError);
}

TEST_CASE("run_sample / run_simulate / run_verify_kernel_bound emit their files") {
  auto config = parse_config(minimal_config(R"(, "sample": {"sites": 2, "steps": 4},
    "verify_bound": {"n_max": 1, "c_values": [0.0]})"));
  RunOptions opts;
  opts.quiet = true;
  opts.out_override = "/tmp/slat_test_files";
  std::filesystem::remove_all("/tmp/slat_test_files");

  CHECK(run_sample(config, opts) == 0);
  CHECK(std::filesystem::exists("/tmp/slat_test_files/noise_path.csv"));
  {
    std::ifstream in("/tmp/slat_test_files/noise_path.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("site_index,step,increment") == 0);
  }

  CHECK(run_simulate(config, opts) == 0);
  CHECK(std::filesystem::exists("/tmp/slat_test_files/trajectory.csv"));
  CHECK(std::filesystem::exists("/tmp/slat_test_files/trajectory_manifest.json"));

  CHECK(run_verify_kernel_bound(config, opts) == 0);
  CHECK(std::filesystem::exists("/tmp/slat_test_files/kernel_bound.csv"));
  {
    std::ifstream in("/tmp/slat_test_files/kernel_bound.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("i,j,n,c,exact,bound,ratio") == 0);
  }
}

TEST_CASE("run_experiment: verdict failure maps to exit status 1") {
  // an unreachable galerkin threshold forces a failing verdict
  auto config = parse_config(minimal_config(
      R"(, "experiment": {"name": "galerkin", "replicas": 3,
           "params": {"N_list": [2, 3], "t": 0.25, "threshold": 0.0}})"));
  RunOptions opts;
  opts.quiet = true;
  opts.out_override = "/tmp/slat_test_files";
  // dt must divide t
  config.scheme.dt = 0.01;
  CHECK(run_experiment(config, opts) == 1);
  CHECK(std::filesystem::exists("/tmp/slat_test_files/galerkin_series.csv"));
}

TEST_CASE("run_simulate persists the last finite state on blow-up") {
  const std::string text = R"({
    "model": {"d": 1, "N": 1,
              "kernel": {"kind": "exp_decay", "beta": 0.0},
              "drift": {"kind": "poly", "eps": 0.5, "c0": 1.0, "n": 3},
              "interaction": "linear"},
    "noise": {"alpha": 2.0, "seed": 1},
    "scheme": {"kind": "euler", "dt": 1.0, "T": 10.0},
    "simulate": {"x0": {"kind": "constant", "value": 5.0}}
  })";
  auto config = parse_config(text);
  RunOptions opts;
  opts.quiet = true;
  opts.out_override = "/tmp/slat_test_blowup";
  std::filesystem::remove_all("/tmp/slat_test_blowup");
  CHECK_THROWS_AS((void)run_simulate(config, opts), BlowupError);
  CHECK(std::filesystem::exists("/tmp/slat_test_blowup/blowup_state.csv"));
}

TEST_CASE("csv fields are RFC-4180 quoted only when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("with,comma") == "\"with,comma\"");
  CHECK(csv_field("with\"quote") == "\"with\"\"quote\"");
}

TEST_CASE("dispatch_experiment runs min-b in memory") {
  auto config = parse_config(minimal_config());
  config.experiment = ExperimentRequest{"min-b", 1, nlohmann::json{{"A", 0.25}, {"eta", 0.5}}};
  RunOptions opts;
  opts.quiet = true;
  const auto report = dispatch_experiment(config, opts);
  CHECK(report.passed());
  CHECK(report.parameters.at("B").get<double>() == doctest::Approx(13.1454).epsilon(1e-4));
}

#ifdef SLAT_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const int rc = std::system((std::string(SLAT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string write_temp_config(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/slat_test_" + name + ".json";
  std::ofstream out(path);
  out << text;
  return path;
}
}  // namespace

TEST_CASE("cli: validate exits 0 on a valid model") {
  const auto path = write_temp_config("ok", minimal_config());
  CHECK(run_cli("validate --config " + path) == 0);
}

TEST_CASE("cli: experiment with unmet hypothesis exits 2") {
  // beta = 1 and eps = 0 gives delta = 1 - 1.1640 < 0
  const std::string text = R"({
    "model": {"d": 1, "N": 3,
              "kernel": {"kind": "exp_decay", "beta": 1.0},
              "drift": {"kind": "poly", "eps": 0.0, "c0": 0.0, "n": 0},
              "interaction": "linear"},
    "noise": {"alpha": 1.5, "seed": 7},
    "scheme": {"dt": 0.01, "T": 0.1},
    "experiment": {"name": "contraction", "replicas": 2}
  })";
  const auto path = write_temp_config("delta_neg", text);
  CHECK(run_cli("experiment contraction --config " + path + " --out /tmp/slat_test_out") == 2);
}

TEST_CASE("cli: malformed config exits 2, missing subcommand usage errors") {
  const auto path = write_temp_config("broken", "{ nope");
  CHECK(run_cli("validate --config " + path) == 2);
  CHECK(run_cli("validate --config /tmp/definitely_missing_config.json") == 2);
}
#endif
