#include "stable_lattice/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace slat {

namespace {

// phi_1(z) = (e^z - 1)/z, phi_1(0) = 1
double phi1(double z) {
  if (std::abs(z) < 1e-8) return 1.0 + 0.5 * z;
  return std::expm1(z) / z;
}

void check_state(const ModelSpec& spec, const LatticeState& state) {
  if (state.values.size() != spec.sites())
    throw std::invalid_argument("integrator: state/cube size mismatch");
}

}  // namespace

LatticeState zero_state(const Cube& cube) { return {std::vector<double>(cube.size(), 0.0), 0.0}; }

LatticeState profile_state(const Cube& cube, double R, double rho) {
  LatticeState s{std::vector<double>(cube.size()), 0.0};
  for (std::size_t i = 0; i < cube.size(); ++i)
    s.values[i] = R * std::pow(static_cast<double>(l1_norm(cube.site_at(i))) + 1.0, rho);
  return s;
}

LatticeState constant_state(const Cube& cube, double value) {
  return {std::vector<double>(cube.size(), value), 0.0};
}

std::size_t SchemeConfig::step_count() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SchemeConfig: dt must be > 0");
  if (T < 0.0) throw std::invalid_argument("SchemeConfig: T must be >= 0");
  if (T > 0.0 && dt > T) throw std::invalid_argument("SchemeConfig: dt must be <= T");
  const double ratio = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * (1.0 + ratio))
    throw std::invalid_argument("SchemeConfig: T/dt must round to an integer step count");
  return steps;
}

std::vector<double> SchemeConfig::grid() const { return uniform_grid(T, dt); }

BlowupError::BlowupError(std::size_t site_, std::size_t step_, double time_,
                         std::vector<double> last_state_)
    : std::runtime_error("non-finite state at site " + std::to_string(site_) + ", step " +
                         std::to_string(step_) + ", t = " + std::to_string(time_)),
      site(site_),
      step(step_),
      time(time_),
      last_state(std::move(last_state_)) {}

void advance_in_place(const ModelSpec& spec, Scheme scheme, double dt, double zero_threshold,
                      std::span<double> values, std::span<const double> increments,
                      std::span<double> interaction, std::size_t step_index, double time) {
  interaction_eval_into(spec, values, interaction);
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    double next;
    if (scheme == Scheme::euler) {
      next = values[i] + (spec.drift.eval(values[i]) + interaction[i]) * dt + increments[i];
    } else {
      const double L = spec.drift.ratio(values[i], zero_threshold);
      const double z = L * dt;
      next = std::exp(z) * values[i] + phi1(z) * dt * interaction[i] + increments[i];
    }
    if (!std::isfinite(next)) {
      std::vector<double> last(values.begin(), values.end());
      throw BlowupError(i, step_index, time, std::move(last));
    }
    values[i] = next;
  }
}

LatticeState step_euler(const ModelSpec& spec, const LatticeState& state,
                        std::span<const double> increments, double dt) {
  check_state(spec, state);
  if (increments.size() != spec.sites())
    throw std::invalid_argument("step_euler: increments/cube size mismatch");
  LatticeState out = state;
  std::vector<double> scratch(spec.sites());
  advance_in_place(spec, Scheme::euler, dt, 1e-12, out.values, increments, scratch, 0, state.time);
  out.time = state.time + dt;
  return out;
}

LatticeState step_exponential(const ModelSpec& spec, const LatticeState& state,
                              std::span<const double> increments, double dt,
                              double zero_threshold) {
  check_state(spec, state);
  if (increments.size() != spec.sites())
    throw std::invalid_argument("step_exponential: increments/cube size mismatch");
  LatticeState out = state;
  std::vector<double> scratch(spec.sites());
  advance_in_place(spec, Scheme::exponential, dt, zero_threshold, out.values, increments, scratch,
                   0, state.time);
  out.time = state.time + dt;
  return out;
}

NoiseBuffer::NoiseBuffer(const ModelSpec& spec, const StableParams& params, std::uint64_t seed)
    : spec_(&spec), params_(params), seed_(seed), inv_alpha_(1.0 / params.alpha) {
  validate(params);
}

void NoiseBuffer::fill(std::size_t step, double dt, std::span<double> out) const {
  const double scale = std::pow(dt, inv_alpha_);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = scale * standard_draw(params_, seed_, spec_->site_keys[i], step);
}

namespace {

template <class IncrementsFn>
Trajectory run_trajectory(const ModelSpec& spec, const LatticeState& x0, const SchemeConfig& cfg,
                          IncrementsFn&& increments_for) {
  check_state(spec, x0);
  const std::size_t steps = cfg.step_count();
  const std::size_t sites = spec.sites();
  Trajectory traj;
  traj.sites = sites;
  traj.times = cfg.grid();
  traj.values.resize((steps + 1) * sites);
  std::copy(x0.values.begin(), x0.values.end(), traj.values.begin());

  std::vector<double> state(x0.values);
  std::vector<double> dz(sites), scratch(sites);
  for (std::size_t k = 0; k < steps; ++k) {
    increments_for(k, std::span<double>(dz));
    advance_in_place(spec, cfg.scheme, cfg.dt, cfg.zero_threshold, state, dz, scratch, k,
                     traj.times[k]);
    std::copy(state.begin(), state.end(), traj.values.begin() + (k + 1) * sites);
  }
  return traj;
}

}  // namespace

namespace {

void stamp_provenance(Trajectory& traj, const ModelSpec& spec, const StableParams& params,
                      std::uint64_t seed) {
  traj.noise_seed = seed;
  traj.noise_params = params;
  traj.model_eta = spec.eta;
  traj.model_c = spec.c;
}

}  // namespace

Trajectory simulate(const ModelSpec& spec, const StableParams& params, const LatticeState& x0,
                    const SchemeConfig& cfg, std::uint64_t seed) {
  NoiseBuffer noise(spec, params, seed);
  Trajectory traj = run_trajectory(
      spec, x0, cfg, [&](std::size_t k, std::span<double> dz) { noise.fill(k, cfg.dt, dz); });
  stamp_provenance(traj, spec, params, seed);
  return traj;
}

Trajectory simulate_with_path(const ModelSpec& spec, const LatticeState& x0,
                              const SchemeConfig& cfg, const NoisePath& noise) {
  if (noise.sites() != spec.sites())
    throw std::invalid_argument("simulate_with_path: noise path site count mismatch");
  const auto grid = cfg.grid();
  if (noise.grid.size() != grid.size())
    throw std::invalid_argument("simulate_with_path: noise grid does not match scheme grid");
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(noise.grid[k] - grid[k]) > 1e-12 * (1.0 + std::abs(grid[k])))
      throw std::invalid_argument("simulate_with_path: noise grid does not match scheme grid");
  Trajectory traj = run_trajectory(spec, x0, cfg, [&](std::size_t k, std::span<double> dz) {
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = noise.increment(i, k);
  });
  stamp_provenance(traj, spec, noise.params, noise.seed);
  return traj;
}

std::pair<Trajectory, Trajectory> coupled_simulate(const ModelSpec& spec,
                                                   const StableParams& params,
                                                   const LatticeState& x0, const LatticeState& y0,
                                                   const SchemeConfig& cfg, std::uint64_t seed) {
  if (x0.values.size() != y0.values.size())
    throw std::invalid_argument("coupled_simulate: cube mismatch between initial states");
  // increments are a pure function of (seed, site, step), so two buffers with
  // the same seed drive both trajectories with identical noise
  NoiseBuffer noise(spec, params, seed);
  Trajectory tx = run_trajectory(spec, x0, cfg, [&](std::size_t k, std::span<double> out) {
    noise.fill(k, cfg.dt, out);
  });
  Trajectory ty = run_trajectory(spec, y0, cfg, [&](std::size_t k, std::span<double> out) {
    noise.fill(k, cfg.dt, out);
  });
  stamp_provenance(tx, spec, params, seed);
  stamp_provenance(ty, spec, params, seed);
  return {std::move(tx), std::move(ty)};
}

NoisePath lattice_noise_path(const ModelSpec& spec, const StableParams& params,
                             const SchemeConfig& cfg, std::uint64_t seed) {
  const auto grid = cfg.grid();
  return white_noise_path(params, spec.site_keys, grid, seed);
}

PicardResult picard_solve(const ModelSpec& spec, const LatticeState& x0, const NoisePath& noise,
                          std::size_t max_iter, double tol) {
  check_state(spec, x0);
  if (noise.sites() != spec.sites())
    throw std::invalid_argument("picard_solve: noise path site count mismatch");
  const std::size_t steps = noise.steps();
  const std::size_t sites = spec.sites();
  const auto& grid = noise.grid;

  // iterate[k * sites + i]
  const auto at = [sites](std::vector<double>& v, std::size_t k) {
    return std::span<double>(v.data() + k * sites, sites);
  };
  const auto cat = [sites](const std::vector<double>& v, std::size_t k) {
    return std::span<const double>(v.data() + k * sites, sites);
  };

  std::vector<double> current((steps + 1) * sites);
  for (std::size_t k = 0; k <= steps; ++k)
    std::copy(x0.values.begin(), x0.values.end(), current.begin() + k * sites);

  PicardResult result;
  std::vector<double> next((steps + 1) * sites);
  std::vector<double> ratio(steps * sites);  // L along the current iterate
  std::vector<double> interaction(sites);
  std::vector<double> candidate((steps + 1) * sites);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t k = 0; k < steps; ++k) {
      const auto xk = cat(current, k);
      for (std::size_t i = 0; i < sites; ++i)
        ratio[k * sites + i] = spec.drift.ratio(xk[i], 1e-12);
    }

    // inner fixed point on the interaction term; with left-endpoint weights a
    // forward Gauss-Seidel sweep is exact, the next sweep certifies it
    std::copy(current.begin(), current.end(), next.begin());
    for (int sweep = 0; sweep < 50; ++sweep) {
      std::copy(x0.values.begin(), x0.values.end(), candidate.begin());
      for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid[k + 1] - grid[k];
        interaction_eval_into(spec, cat(candidate, k), interaction);
        auto out = at(candidate, k + 1);
        const auto prev = cat(candidate, k);
        for (std::size_t i = 0; i < sites; ++i) {
          const double e = std::exp(ratio[k * sites + i] * dt);
          out[i] = e * (prev[i] + interaction[i] * dt) + noise.increment(i, k);
          if (!std::isfinite(out[i]))
            throw BlowupError(i, k, grid[k], std::vector<double>(prev.begin(), prev.end()));
        }
      }
      double sweep_diff = 0.0;
      for (std::size_t t = 0; t < candidate.size(); ++t)
        sweep_diff = std::max(sweep_diff, std::abs(candidate[t] - next[t]));
      next.swap(candidate);
      if (sweep_diff < tol * 1e-2) break;
    }

    double dist = 0.0;
    for (std::size_t t = 0; t < next.size(); ++t)
      dist = std::max(dist, std::abs(next[t] - current[t]));
    result.sup_distances.push_back(dist);
    current.swap(next);
    result.iterations = iter + 1;
    if (dist < tol) {
      result.converged = true;
      break;
    }
  }

  result.trajectory.sites = sites;
  result.trajectory.times.assign(grid.begin(), grid.end());
  result.trajectory.values = std::move(current);
  stamp_provenance(result.trajectory, spec, noise.params, noise.seed);
  return result;
}

}  // namespace slat
