#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stable_lattice/model.hpp"
#include "stable_lattice/stable_noise.hpp"

// Time stepping for the truncated system
//   dX_i = [J_i(X_i) + I^N_i(X)] dt + dZ_i
// with an explicit Euler scheme, an exponential scheme based on the mild form
// (drift ratio L_i = J_i(X_i)/X_i frozen at step start), and the Picard
// fixed-point construction of the mild solution on a fixed noise path.
//
// Noise substreams are keyed by absolute lattice coordinates, so runs on
// nested cubes with the same seed share the interior noise.

namespace slat {

struct LatticeState {
  std::vector<double> values;
  double time = 0.0;
};

LatticeState zero_state(const Cube& cube);
// x_i = R (|i|+1)^rho, the boundary profile of B_{R,rho}
LatticeState profile_state(const Cube& cube, double R, double rho);
LatticeState constant_state(const Cube& cube, double value);

enum class Scheme { euler, exponential };

struct SchemeConfig {
  Scheme scheme = Scheme::exponential;
  double dt = 1e-3;
  double T = 1.0;
  double zero_threshold = 1e-12;  // |x| below this uses J'(0) for J(x)/x

  std::size_t step_count() const;     // validates that T/dt is integral
  std::vector<double> grid() const;   // 0, dt, ..., T
};

class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::size_t site, std::size_t step, double time, std::vector<double> last_state);
  std::size_t site = 0;
  std::size_t step = 0;
  double time = 0.0;
  std::vector<double> last_state;  // last fully finite state
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;  // (steps+1) x sites, row-major
  std::size_t sites = 0;
  // provenance: the driving noise (seed + law) and the model's constants
  std::uint64_t noise_seed = 0;
  StableParams noise_params;
  double model_eta = 0.0, model_c = 0.0;

  std::span<const double> state_at(std::size_t k) const {
    return {values.data() + k * sites, sites};
  }
  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
};

// Single steps (convenience form mirroring the scheme definitions; the
// increments span carries this step's noise, one entry per site).
LatticeState step_euler(const ModelSpec& spec, const LatticeState& state,
                        std::span<const double> increments, double dt);
LatticeState step_exponential(const ModelSpec& spec, const LatticeState& state,
                              std::span<const double> increments, double dt,
                              double zero_threshold = 1e-12);

// In-place advance; `interaction` is scratch of the same size as `values`.
// Throws BlowupError if any site leaves the finite range.
void advance_in_place(const ModelSpec& spec, Scheme scheme, double dt, double zero_threshold,
                      std::span<double> values, std::span<const double> increments,
                      std::span<double> interaction, std::size_t step_index, double time);

// Streams this step's increments for the coordinate-keyed noise of the cube.
class NoiseBuffer {
 public:
  NoiseBuffer(const ModelSpec& spec, const StableParams& params, std::uint64_t seed);
  void fill(std::size_t step, double dt, std::span<double> out) const;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  const ModelSpec* spec_;
  StableParams params_;
  std::uint64_t seed_;
  double inv_alpha_;
};

Trajectory simulate(const ModelSpec& spec, const StableParams& params, const LatticeState& x0,
                    const SchemeConfig& cfg, std::uint64_t seed);

// Same dynamics driven by an externally fixed noise path (grid must match cfg).
Trajectory simulate_with_path(const ModelSpec& spec, const LatticeState& x0,
                              const SchemeConfig& cfg, const NoisePath& noise);

// Two trajectories driven by the identical noise path (synchronous coupling).
std::pair<Trajectory, Trajectory> coupled_simulate(const ModelSpec& spec,
                                                   const StableParams& params,
                                                   const LatticeState& x0, const LatticeState& y0,
                                                   const SchemeConfig& cfg, std::uint64_t seed);

// Coordinate-keyed noise path over the cfg grid, as used by simulate().
NoisePath lattice_noise_path(const ModelSpec& spec, const StableParams& params,
                             const SchemeConfig& cfg, std::uint64_t seed);

struct PicardResult {
  Trajectory trajectory;
  std::vector<double> sup_distances;  // sup over grid and sites per iteration
  bool converged = false;
  std::size_t iterations = 0;
};

// Fixed-point construction of the mild solution on the noise-path grid:
// given iterate n, the exponential factors come from the drift ratio along
// iterate n, and iterate n+1 solves the mild quadrature (left-endpoint
// interaction weights, per-interval weight on the noise increments) by inner
// fixed-point sweeps. Stops when the sup distance between iterates is < tol.
PicardResult picard_solve(const ModelSpec& spec, const LatticeState& x0, const NoisePath& noise,
                          std::size_t max_iter, double tol);

}  // namespace slat
