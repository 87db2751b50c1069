#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stable_lattice/config.hpp"
#include "stable_lattice/stats.hpp"
#include "stable_lattice/version.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

slat::LatticePoint point_from_list(const std::vector<int>& coords) {
  slat::LatticePoint p;
  p.coords = coords;
  return p;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::span<const double> as_span(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::dict trajectory_to_py(const slat::Trajectory& traj) {
  py::dict d;
  d["times"] = to_array(traj.times);
  py::array_t<double> values({traj.times.size(), traj.sites});
  std::copy(traj.values.begin(), traj.values.end(), values.mutable_data());
  d["values"] = values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lattice systems driven by white symmetric alpha-stable noise";
  m.attr("__version__") = slat::kVersion;

  m.def(
      "sample_increments",
      [](double alpha, double dt, std::size_t count, std::uint64_t seed) {
        slat::StableParams params{alpha};
        slat::validate(params);
        auto stream = slat::rng::Stream::keyed(seed, 0);
        std::vector<double> out(count);
        for (auto& x : out) x = slat::sample_increment(params, dt, stream);
        return to_array(out);
      },
      "alpha"_a, "dt"_a, "count"_a, "seed"_a,
      "increments of a symmetric alpha-stable process over windows of length dt");

  m.def(
      "empirical_char_fn",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> samples, double xi) {
        return slat::empirical_char_fn(as_span(samples), xi);
      },
      "samples"_a, "xi"_a);

  m.def(
      "white_noise_path",
      [](double alpha, std::size_t sites, double dt, std::size_t steps, std::uint64_t seed) {
        slat::StableParams params{alpha};
        std::vector<double> grid(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) * dt;
        const auto path = slat::white_noise_path(params, sites, grid, seed);
        py::array_t<double> incs({sites, steps});
        std::copy(path.increments.begin(), path.increments.end(), incs.mutable_data());
        return incs;
      },
      "alpha"_a, "sites"_a, "dt"_a, "steps"_a, "seed"_a);

  m.def(
      "ks_statistic",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
         py::array_t<double, py::array::c_style | py::array::forcecast> b) {
        return slat::ks_statistic(as_span(a), as_span(b));
      },
      "a"_a, "b"_a);

  m.def(
      "matrix_power_bound",
      [](double c, int n, int d, int dist, double eta) {
        return slat::matrix_power_bound({c, n, d, dist, eta});
      },
      "c"_a, "n"_a, "d"_a, "dist"_a, "eta"_a);

  m.def("min_B_for_A", &slat::min_B_for_A, "A"_a, "eta"_a);
  m.def("exp_decay_total_mass", &slat::exp_decay_total_mass, "d"_a);

  // a parsed and validated model plus scheme/noise settings; accepts the same
  // JSON document as the CLI
  py::class_<slat::RunConfig>(m, "Model")
      .def(py::init([](const std::string& text) { return slat::parse_config(text); }),
           "config_json"_a)
      .def_property_readonly("eta", [](const slat::RunConfig& c) { return c.spec.eta; })
      .def_property_readonly("c", [](const slat::RunConfig& c) { return c.spec.c; })
      .def_property_readonly("delta", [](const slat::RunConfig& c) { return c.spec.delta; })
      .def_property_readonly("sites", [](const slat::RunConfig& c) { return c.spec.sites(); })
      .def("validate_report",
           [](const slat::RunConfig& c) { return slat::validate_assumptions(c.spec).to_string(); })
      .def(
          "interaction",
          [](const slat::RunConfig& c,
             py::array_t<double, py::array::c_style | py::array::forcecast> state) {
            return to_array(slat::interaction_eval(c.spec, as_span(state)));
          },
          "state"_a)
      .def(
          "simulate",
          [](const slat::RunConfig& c, std::uint64_t seed) {
            const auto x0 = slat::state_from_profile(
                c.spec.cube, c.simulate ? c.simulate->x0_profile : nlohmann::json{});
            return trajectory_to_py(slat::simulate(c.spec, c.noise, x0, c.scheme, seed));
          },
          "seed"_a)
      .def(
          "coupled_distance",
          [](const slat::RunConfig& c, std::uint64_t seed) {
            const auto x0 = slat::profile_state(c.spec.cube, 1.0, 1.0);
            const auto y0 = slat::zero_state(c.spec.cube);
            const auto [tx, ty] = slat::coupled_simulate(c.spec, c.noise, x0, y0, c.scheme, seed);
            std::vector<double> dist(tx.times.size());
            for (std::size_t k = 0; k < tx.times.size(); ++k) {
              double s = 0.0;
              const auto a = tx.state_at(k), b = ty.state_at(k);
              for (std::size_t i = 0; i < tx.sites; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
              dist[k] = std::sqrt(s);
            }
            py::dict out;
            out["times"] = to_array(tx.times);
            out["distance"] = to_array(dist);
            return out;
          },
          "seed"_a, "synchronous coupling of the growth-boundary and zero profiles")
      .def(
          "picard_solve",
          [](const slat::RunConfig& c, std::uint64_t seed, std::size_t max_iter, double tol) {
            const auto noise = slat::lattice_noise_path(c.spec, c.noise, c.scheme, seed);
            const auto x0 = slat::state_from_profile(
                c.spec.cube, c.simulate ? c.simulate->x0_profile : nlohmann::json{});
            const auto res = slat::picard_solve(c.spec, x0, noise, max_iter, tol);
            py::dict out;
            out["trajectory"] = trajectory_to_py(res.trajectory);
            out["sup_distances"] = to_array(res.sup_distances);
            out["converged"] = res.converged;
            out["iterations"] = res.iterations;
            return out;
          },
          "seed"_a, "max_iter"_a = 50, "tol"_a = 1e-10)
      .def(
          "matrix_power_entry",
          [](const slat::RunConfig& c, double cc, int n, const std::vector<int>& i,
             const std::vector<int>& j) {
            const auto e = slat::matrix_power_entry(c.spec.kernel, cc, n, point_from_list(i),
                                                    point_from_list(j), c.spec.cube);
            py::dict out;
            out["value"] = e.value;
            out["tail_estimate"] = e.tail_estimate;
            out["padding"] = e.padding;
            return out;
          },
          "c"_a, "n"_a, "i"_a, "j"_a)
      .def(
          "verify_kernel_bound",
          [](const slat::RunConfig& c, int n_max, const std::vector<double>& c_values,
             int threads) {
            const auto rep =
                slat::verify_bound(c.spec.kernel, c_values, n_max, c.spec.cube, threads);
            py::dict out;
            out["max_ratio"] = rep.max_ratio;
            out["pass"] = rep.pass;
            out["checks"] = rep.rows.size();
            out["eta"] = rep.eta;
            return out;
          },
          "n_max"_a = 3, "c_values"_a = std::vector<double>{0.0, 1.0}, "threads"_a = 1)
      .def(
          "run_experiment",
          [](const slat::RunConfig& c, const std::string& name, std::size_t replicas,
             std::uint64_t seed, int threads) {
            slat::RunConfig local = c;
            if (!local.experiment) local.experiment = slat::ExperimentRequest{};
            local.experiment->name = name;
            if (replicas > 0) local.experiment->replicas = replicas;
            slat::RunOptions opts;
            opts.seed_override = seed;
            opts.threads = threads;
            opts.quiet = true;
            return json_to_py(slat::dispatch_experiment(local, opts).to_json());
          },
          "name"_a, "replicas"_a = 0, "seed"_a = 1, "threads"_a = 1);

  m.def(
      "exp_ou_uniform_bound",
      [](double alpha, double eps, double T, double dt, std::size_t replicas, std::uint64_t seed,
         int threads) {
        slat::SchemeConfig cfg;
        cfg.dt = dt;
        cfg.T = T;
        return json_to_py(
            slat::exp_ou_uniform_bound(alpha, eps, T, cfg, replicas, seed, threads).to_json());
      },
      "alpha"_a, "eps"_a, "T"_a, "dt"_a = 1e-3, "replicas"_a = 1000, "seed"_a = 1,
      "threads"_a = 1);
}
