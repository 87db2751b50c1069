#include "stable_lattice/config.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "stable_lattice/report.hpp"
#include "stable_lattice/version.hpp"

namespace slat {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

template <class T>
T require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing required key \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T optional_or(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

LatticePoint point_from_json(const json& j, const std::string& where, int d) {
  if (!j.is_array()) throw ConfigError(where + ": site must be an integer array");
  LatticePoint p;
  for (const auto& c : j) p.coords.push_back(c.get<int>());
  if (p.dim() != d)
    throw ConfigError(where + ": site dimension " + std::to_string(p.dim()) +
                      " does not match model dimension " + std::to_string(d));
  return p;
}

InteractionKernel kernel_from_json(const json& j, int d) {
  expect_object(j, "model.kernel");
  const std::string kind = require<std::string>(j, "model.kernel", "kind");
  if (kind == "exp_decay") {
    expect_keys(j, "model.kernel", {"kind", "beta", "normalized", "support_radius"});
    return InteractionKernel::exp_decay(
        optional_or<double>(j, "model.kernel", "beta", 1.0),
        optional_or<bool>(j, "model.kernel", "normalized", false),
        optional_or<int>(j, "model.kernel", "support_radius", 37));
  }
  if (kind == "finite_range") {
    expect_keys(j, "model.kernel", {"kind", "range", "weight"});
    return InteractionKernel::finite_range(require<int>(j, "model.kernel", "range"),
                                           require<double>(j, "model.kernel", "weight"));
  }
  if (kind == "custom_table") {
    expect_keys(j, "model.kernel", {"kind", "entries"});
    if (!j.contains("entries") || !j.at("entries").is_array())
      throw ConfigError("model.kernel.entries: expected an array");
    std::vector<InteractionKernel::TableEntry> entries;
    for (const auto& e : j.at("entries")) {
      expect_object(e, "model.kernel.entries[]");
      expect_keys(e, "model.kernel.entries[]", {"i", "j", "w"});
      entries.push_back({point_from_json(e.at("i"), "model.kernel.entries[].i", d),
                         point_from_json(e.at("j"), "model.kernel.entries[].j", d),
                         require<double>(e, "model.kernel.entries[]", "w")});
    }
    return InteractionKernel::custom_table(std::move(entries));
  }
  throw ConfigError("model.kernel.kind: unknown kind \"" + kind + "\"");
}

SiteDrift drift_from_json(const json& j) {
  expect_object(j, "model.drift");
  const std::string kind = require<std::string>(j, "model.drift", "kind");
  if (kind == "poly") {
    expect_keys(j, "model.drift", {"kind", "eps", "c0", "n"});
    return SiteDrift::poly(require<double>(j, "model.drift", "eps"),
                           optional_or<double>(j, "model.drift", "c0", 0.0),
                           optional_or<int>(j, "model.drift", "n", 0));
  }
  if (kind == "linear") {
    expect_keys(j, "model.drift", {"kind", "rate"});
    return SiteDrift::linear(require<double>(j, "model.drift", "rate"));
  }
  throw ConfigError("model.drift.kind: unknown kind \"" + kind + "\"");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(doc);
}

RunConfig parse_config_json(const nlohmann::json& doc) {
  expect_object(doc, "config");
  expect_keys(doc, "config",
              {"model", "noise", "scheme", "experiment", "sample", "simulate", "verify_bound",
               "output"});

  if (!doc.contains("model")) throw ConfigError("config: missing required key \"model\"");
  const json& model = doc.at("model");
  expect_object(model, "model");
  expect_keys(model, "model", {"d", "N", "kernel", "drift", "interaction"});
  const int d = require<int>(model, "model", "d");
  const int N = require<int>(model, "model", "N");
  if (d < 1) throw ConfigError("model.d: must be >= 1");
  if (N < 0) throw ConfigError("model.N: must be >= 0");

  InteractionKernel kernel = kernel_from_json(
      model.contains("kernel") ? model.at("kernel")
                               : throw ConfigError("model: missing required key \"kernel\""),
      d);
  SiteDrift drift = drift_from_json(
      model.contains("drift") ? model.at("drift")
                              : throw ConfigError("model: missing required key \"drift\""));
  const std::string ikind = require<std::string>(model, "model", "interaction");
  InteractionKind interaction;
  if (ikind == "linear")
    interaction = InteractionKind::linear;
  else if (ikind == "log_exp")
    interaction = InteractionKind::log_exp;
  else
    throw ConfigError("model.interaction: must be \"linear\" or \"log_exp\"");

  RunConfig config;
  try {
    config.spec = make_model(d, N, std::move(kernel), std::move(drift), interaction);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  if (!doc.contains("noise")) throw ConfigError("config: missing required key \"noise\"");
  const json& noise = doc.at("noise");
  expect_object(noise, "noise");
  expect_keys(noise, "noise", {"alpha", "seed"});
  config.noise.alpha = require<double>(noise, "noise", "alpha");
  try {
    validate(config.noise);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("noise.alpha: ") + e.what());
  }
  config.seed = require<std::uint64_t>(noise, "noise", "seed");

  if (!doc.contains("scheme")) throw ConfigError("config: missing required key \"scheme\"");
  const json& scheme = doc.at("scheme");
  expect_object(scheme, "scheme");
  expect_keys(scheme, "scheme", {"kind", "dt", "T", "zero_threshold"});
  const std::string skind = optional_or<std::string>(scheme, "scheme", "kind", "exponential");
  if (skind == "euler")
    config.scheme.scheme = Scheme::euler;
  else if (skind == "exponential")
    config.scheme.scheme = Scheme::exponential;
  else
    throw ConfigError("scheme.kind: must be \"euler\" or \"exponential\"");
  config.scheme.dt = require<double>(scheme, "scheme", "dt");
  config.scheme.T = require<double>(scheme, "scheme", "T");
  config.scheme.zero_threshold = optional_or<double>(scheme, "scheme", "zero_threshold", 1e-12);
  try {
    (void)config.scheme.step_count();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }

  if (doc.contains("experiment")) {
    const json& exp = doc.at("experiment");
    expect_object(exp, "experiment");
    expect_keys(exp, "experiment", {"name", "replicas", "params"});
    ExperimentRequest req;
    req.name = require<std::string>(exp, "experiment", "name");
    req.replicas = optional_or<std::size_t>(exp, "experiment", "replicas", 100);
    req.params = exp.contains("params") ? exp.at("params") : json::object();
    if (!req.params.is_object()) throw ConfigError("experiment.params: expected a JSON object");
    config.experiment = std::move(req);
  }
  if (doc.contains("sample")) {
    const json& s = doc.at("sample");
    expect_object(s, "sample");
    expect_keys(s, "sample", {"sites", "steps"});
    config.sample = SampleRequest{optional_or<std::size_t>(s, "sample", "sites", 1),
                                  optional_or<std::size_t>(s, "sample", "steps", 16)};
  }
  if (doc.contains("simulate")) {
    const json& s = doc.at("simulate");
    expect_object(s, "simulate");
    expect_keys(s, "simulate", {"x0"});
    SimulateRequest req;
    if (s.contains("x0")) req.x0_profile = s.at("x0");
    config.simulate = std::move(req);
  }
  if (doc.contains("verify_bound")) {
    const json& v = doc.at("verify_bound");
    expect_object(v, "verify_bound");
    expect_keys(v, "verify_bound", {"n_max", "c_values"});
    VerifyBoundRequest req;
    req.n_max = optional_or<int>(v, "verify_bound", "n_max", 3);
    req.c_values = optional_or<std::vector<double>>(v, "verify_bound", "c_values", {0.0, 1.0});
    config.verify = std::move(req);
  }
  if (doc.contains("output")) config.output = require<std::string>(doc, "config", "output");

  // assumption validation gates every run
  const auto report = validate_assumptions(config.spec);
  if (!report.all_pass())
    throw ConfigError("model fails Assumption validation:\n" + report.to_string());

  config.raw = doc;
  return config;
}

std::string resolve_output_dir(const RunConfig& config, const RunOptions& options) {
  if (options.out_override) return *options.out_override;
  if (config.output) return *config.output;
  if (const char* env = std::getenv("STABLE_LATTICE_OUT")) return env;
  return ".";
}

LatticeState state_from_profile(const Cube& cube, const nlohmann::json& profile) {
  if (profile.is_null() || profile.empty()) return zero_state(cube);
  expect_object(profile, "profile");
  expect_keys(profile, "profile", {"kind", "value", "R", "rho"});
  const std::string kind = require<std::string>(profile, "profile", "kind");
  if (kind == "zero") return zero_state(cube);
  if (kind == "constant")
    return constant_state(cube, require<double>(profile, "profile", "value"));
  if (kind == "growth")
    return profile_state(cube, optional_or<double>(profile, "profile", "R", 1.0),
                         optional_or<double>(profile, "profile", "rho", 1.0));
  if (kind == "neg_growth")
    return profile_state(cube, -optional_or<double>(profile, "profile", "R", 1.0),
                         optional_or<double>(profile, "profile", "rho", 1.0));
  throw ConfigError("profile.kind: unknown kind \"" + kind + "\"");
}

namespace {

std::uint64_t effective_seed(const RunConfig& config, const RunOptions& options) {
  return options.seed_override.value_or(config.seed);
}

json effective_config(const RunConfig& config, const RunOptions& options) {
  json doc = config.raw;
  doc["noise"]["seed"] = effective_seed(config, options);
  return doc;
}

void emit(const RunConfig& config, const RunOptions& options, const ExperimentReport& report,
          double wall_seconds) {
  const std::string dir = resolve_output_dir(config, options);
  json manifest;
  manifest["config"] = effective_config(config, options);
  manifest["software_version"] = kVersion;
  manifest["wall_time_seconds"] = wall_seconds;
  manifest["report"] = report.to_json();
  write_file_atomic(std::filesystem::path(dir) / (report.name + "_series.csv"),
                    report.series_csv());
  write_file_atomic(std::filesystem::path(dir) / (report.name + "_manifest.json"),
                    manifest.dump(2) + "\n");
  write_file_atomic(std::filesystem::path(dir) / (report.name + "_summary.txt"),
                    report.summary());
  if (!options.quiet) std::cout << report.summary();
}

Observable observable_from_json(const json& params, int d, const char* key = "observable") {
  if (!params.contains(key)) {
    LatticePoint origin;
    origin.coords.assign(static_cast<std::size_t>(d), 0);
    return Observable::coordinate_tanh(origin);
  }
  const json& obs = params.at(key);
  expect_object(obs, "observable");
  expect_keys(obs, "observable", {"kind", "site", "sites", "value"});
  const std::string kind = require<std::string>(obs, "observable", "kind");
  if (kind == "coordinate_tanh")
    return Observable::coordinate_tanh(point_from_json(obs.at("site"), "observable.site", d));
  if (kind == "product_window") {
    std::vector<LatticePoint> sites;
    for (const auto& s : obs.at("sites")) sites.push_back(point_from_json(s, "observable.sites", d));
    return Observable::product_window(std::move(sites));
  }
  if (kind == "constant") return Observable::constant(require<double>(obs, "observable", "value"));
  throw ConfigError("observable.kind: unknown kind \"" + kind + "\"");
}

}  // namespace

ExperimentReport dispatch_experiment(const RunConfig& config, const RunOptions& options) {
  if (!config.experiment) throw ConfigError("config: missing \"experiment\" block");
  const auto& req = *config.experiment;
  const json& p = req.params;
  const std::uint64_t seed = effective_seed(config, options);
  const int threads = options.threads;
  const int d = config.spec.d;

  if (req.name == "ou-uniform-bound") {
    expect_keys(p, "experiment.params", {"eps", "T", "x_init", "y_init"});
    return exp_ou_uniform_bound(config.noise.alpha, require<double>(p, "params", "eps"),
                                optional_or<double>(p, "params", "T", config.scheme.T),
                                config.scheme, req.replicas, seed, threads,
                                optional_or<double>(p, "params", "x_init", 3.0),
                                optional_or<double>(p, "params", "y_init", -2.0));
  }
  if (req.name == "contraction") {
    expect_keys(p, "experiment.params", {"x0", "y0"});
    const auto x0 = state_from_profile(config.spec.cube,
                                       p.contains("x0") ? p.at("x0") : json{{"kind", "growth"}});
    const auto y0 =
        state_from_profile(config.spec.cube, p.contains("y0") ? p.at("y0") : json{{"kind", "zero"}});
    return exp_contraction(config.spec, config.noise, x0, y0, config.scheme, seed, req.replicas,
                           threads);
  }
  if (req.name == "propagation") {
    expect_keys(p, "experiment.params", {"t_list", "k_dists", "k_sites", "h", "observable"});
    std::vector<double> t_list =
        optional_or<std::vector<double>>(p, "params", "t_list", {config.scheme.T});
    std::vector<LatticePoint> k_list;
    if (p.contains("k_sites")) {
      for (const auto& s : p.at("k_sites"))
        k_list.push_back(point_from_json(s, "params.k_sites", d));
    } else {
      for (int dist : optional_or<std::vector<int>>(p, "params", "k_dists", {1, 2, 4, 6, 9})) {
        LatticePoint site;
        site.coords.assign(static_cast<std::size_t>(d), 0);
        site.coords[0] = dist;
        k_list.push_back(std::move(site));
      }
    }
    return exp_propagation(config.spec, config.noise, observable_from_json(p, d), t_list, k_list,
                           optional_or<double>(p, "params", "h", 1e-3), config.scheme,
                           req.replicas, seed, threads);
  }
  if (req.name == "galerkin") {
    expect_keys(p, "experiment.params", {"N_list", "t", "threshold", "observable", "x0_R", "x0_rho"});
    const auto N_list = optional_or<std::vector<int>>(p, "params", "N_list", {4, 8, 16});
    ModelFamily family{config.spec.d, config.spec.kernel, config.spec.drift,
                       config.spec.interaction};
    return exp_galerkin(family, config.noise, N_list, observable_from_json(p, d),
                        optional_or<double>(p, "params", "t", config.scheme.T), config.scheme,
                        req.replicas, seed, optional_or<double>(p, "params", "threshold", 0.02),
                        threads, optional_or<double>(p, "params", "x0_R", 1.0),
                        optional_or<double>(p, "params", "x0_rho", 1.0));
  }
  if (req.name == "moment-growth") {
    expect_keys(p, "experiment.params", {"sites", "R", "rho"});
    std::vector<LatticePoint> sites;
    if (p.contains("sites")) {
      for (const auto& s : p.at("sites")) sites.push_back(point_from_json(s, "params.sites", d));
    } else {
      for (int n : {0, 5, 10}) {
        LatticePoint site;
        site.coords.assign(static_cast<std::size_t>(d), 0);
        site.coords[0] = std::min(n, config.spec.cube.half_width());
        sites.push_back(std::move(site));
      }
    }
    return exp_moment_growth(config.spec, config.noise, sites,
                             optional_or<double>(p, "params", "rho", 1.0),
                             optional_or<double>(p, "params", "R", 1.0), config.scheme,
                             req.replicas, seed, threads);
  }
  if (req.name == "mixing") {
    expect_keys(p, "experiment.params", {"profiles", "observable"});
    std::vector<LatticeState> x_list;
    if (p.contains("profiles")) {
      for (const auto& prof : p.at("profiles"))
        x_list.push_back(state_from_profile(config.spec.cube, prof));
    } else {
      x_list.push_back(profile_state(config.spec.cube, 1.0, 1.0));
      x_list.push_back(zero_state(config.spec.cube));
      x_list.push_back(profile_state(config.spec.cube, -1.0, 1.0));
    }
    return exp_mixing(config.spec, config.noise, observable_from_json(p, d), x_list,
                      config.scheme, req.replicas, seed, threads);
  }
  if (req.name == "min-b") {
    expect_keys(p, "experiment.params", {"A", "eta"});
    const double A = require<double>(p, "params", "A");
    const double eta = optional_or<double>(p, "params", "eta", config.spec.eta);
    const double B = min_B_for_A(A, eta);
    ExperimentReport report;
    report.name = "min-b";
    report.parameters = {{"A", A}, {"eta", eta}, {"B", B}};
    report.series.push_back({"min_B", {{A, B, 0.0}}});
    report.criteria.push_back({"inequality_satisfied",
                               2.0 - std::log(B) + std::log(2.0 * eta) + 2.0 * eta / B <= -2.0 * A,
                               "B = " + std::to_string(B)});
    return report;
  }
  throw ConfigError("experiment.name: unknown experiment \"" + req.name + "\"");
}

int run_validate(const RunConfig& config, const RunOptions& options) {
  // parse_config already requires a valid model; report what it checked
  const auto report = validate_assumptions(config.spec);
  if (!options.quiet) {
    std::cout << report.to_string();
    std::cout << "eta = " << config.spec.eta << ", c = " << config.spec.c
              << ", delta = " << config.spec.delta << '\n';
  }
  return report.all_pass() ? 0 : 1;
}

int run_sample(const RunConfig& config, const RunOptions& options) {
  const SampleRequest req = config.sample.value_or(SampleRequest{});
  std::vector<double> grid(req.steps + 1);
  for (std::size_t k = 0; k <= req.steps; ++k)
    grid[k] = static_cast<double>(k) * config.scheme.dt;
  const auto path =
      white_noise_path(config.noise, req.sites, grid, effective_seed(config, options));
  std::ostringstream os;
  os.precision(17);
  os << "site_index,step,increment\r\n";
  for (std::size_t s = 0; s < path.sites(); ++s)
    for (std::size_t k = 0; k < path.steps(); ++k)
      os << s << ',' << k << ',' << path.increment(s, k) << "\r\n";
  const std::string dir = resolve_output_dir(config, options);
  write_file_atomic(std::filesystem::path(dir) / "noise_path.csv", os.str());
  if (!options.quiet)
    std::cout << "wrote " << path.sites() << " x " << path.steps() << " increments\n";
  return 0;
}

int run_simulate(const RunConfig& config, const RunOptions& options) {
  const auto x0 = state_from_profile(
      config.spec.cube, config.simulate ? config.simulate->x0_profile : nlohmann::json{});
  const auto start = std::chrono::steady_clock::now();
  Trajectory traj;
  try {
    traj = simulate(config.spec, config.noise, x0, config.scheme, effective_seed(config, options));
  } catch (const BlowupError& e) {
    // persist the last finite state next to the outputs before failing
    std::ostringstream os;
    os.precision(17);
    os << "site,value\r\n";
    for (std::size_t i = 0; i < e.last_state.size(); ++i)
      os << i << ',' << e.last_state[i] << "\r\n";
    const std::string dir = resolve_output_dir(config, options);
    write_file_atomic(std::filesystem::path(dir) / "blowup_state.csv", os.str());
    throw;
  }
  std::ostringstream os;
  os.precision(17);
  os << "time";
  for (std::size_t i = 0; i < traj.sites; ++i) os << ",site_" << i;
  os << "\r\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    const auto state = traj.state_at(k);
    for (double v : state) os << ',' << v;
    os << "\r\n";
  }
  const std::string dir = resolve_output_dir(config, options);
  write_file_atomic(std::filesystem::path(dir) / "trajectory.csv", os.str());
  json manifest;
  manifest["config"] = effective_config(config, options);
  manifest["software_version"] = kVersion;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file_atomic(std::filesystem::path(dir) / "trajectory_manifest.json",
                    manifest.dump(2) + "\n");
  if (!options.quiet)
    std::cout << "wrote trajectory: " << traj.times.size() << " states x " << traj.sites
              << " sites\n";
  return 0;
}

int run_verify_kernel_bound(const RunConfig& config, const RunOptions& options) {
  const VerifyBoundRequest req = config.verify.value_or(VerifyBoundRequest{});
  const auto start = std::chrono::steady_clock::now();
  const auto report = verify_bound(config.spec.kernel, req.c_values, req.n_max, config.spec.cube,
                                   options.threads);
  std::ostringstream os;
  os.precision(17);
  os << "i,j,n,c,exact,bound,ratio\r\n";
  for (const auto& row : report.rows)
    os << row.i_index << ',' << row.j_index << ',' << row.n << ',' << row.c << ',' << row.exact
       << ',' << row.bound << ',' << row.ratio << "\r\n";
  const std::string dir = resolve_output_dir(config, options);
  write_file_atomic(std::filesystem::path(dir) / "kernel_bound.csv", os.str());
  json manifest;
  manifest["config"] = effective_config(config, options);
  manifest["software_version"] = kVersion;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["max_ratio"] = report.max_ratio;
  manifest["checks"] = report.rows.size();
  manifest["pass"] = report.pass;
  write_file_atomic(std::filesystem::path(dir) / "kernel_bound_manifest.json",
                    manifest.dump(2) + "\n");
  if (!options.quiet)
    std::cout << "kernel bound: " << report.rows.size() << " checks, max ratio "
              << report.max_ratio << (report.pass ? " PASS" : " FAIL") << '\n';
  return report.pass ? 0 : 1;
}

int run_experiment(const RunConfig& config, const RunOptions& options) {
  if (!config.experiment) throw ConfigError("config: missing \"experiment\" block");
  const auto start = std::chrono::steady_clock::now();
  const auto report = dispatch_experiment(config, options);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(config, options, report, wall);
  return report.passed() ? 0 : 1;
}

}  // namespace slat
