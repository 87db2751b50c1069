#include "stable_lattice/stable_noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slat {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

void validate(const StableParams& params) {
  if (!(params.alpha > 1.0) || !(params.alpha <= 2.0))
    throw std::invalid_argument("StableParams: alpha must lie in (1, 2], got " +
                                std::to_string(params.alpha));
}

double sample_standard(const StableParams& params, rng::Stream& stream) {
  validate(params);
  const double alpha = params.alpha;
  if (is_gaussian(params)) return stream.next_gaussian();
  // Chambers-Mallows-Stuck, symmetric case:
  //   V ~ U(-pi/2, pi/2), W ~ Exp(1)
  //   S = sin(alpha V) / cos(V)^{1/alpha} * [cos((1-alpha) V) / W]^{(1-alpha)/alpha}
  const double v = kPi * (stream.next_uniform() - 0.5);
  const double w = stream.next_exponential();
  const double a = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
  const double b = std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
  return a * b;
}

double sample_increment(const StableParams& params, double dt, rng::Stream& stream) {
  validate(params);
  if (dt < 0.0) throw std::invalid_argument("sample_increment: dt must be >= 0");
  if (dt == 0.0) return 0.0;
  return std::pow(dt, 1.0 / params.alpha) * sample_standard(params, stream);
}

double empirical_char_fn(std::span<const double> samples, double xi) {
  if (samples.empty()) throw std::invalid_argument("empirical_char_fn: empty sample");
  double acc = 0.0;
  for (double x : samples) acc += std::cos(xi * x);
  return acc / static_cast<double>(samples.size());
}

double standard_draw(const StableParams& params, std::uint64_t seed, std::uint64_t site_key,
                     std::uint64_t step) {
  auto stream = rng::Stream(rng::substream(rng::substream(seed, site_key), step));
  return sample_standard(params, stream);
}

NoisePath white_noise_path(const StableParams& params, std::span<const std::uint64_t> site_keys,
                           std::span<const double> grid, std::uint64_t seed) {
  validate(params);
  if (grid.empty() || grid.front() != 0.0)
    throw std::invalid_argument("white_noise_path: grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      throw std::invalid_argument("white_noise_path: grid must be strictly increasing");

  NoisePath path;
  path.params = params;
  path.seed = seed;
  path.grid.assign(grid.begin(), grid.end());
  path.site_keys.assign(site_keys.begin(), site_keys.end());
  const std::size_t steps = path.steps();
  path.increments.resize(path.sites() * steps);
  const double inv_alpha = 1.0 / params.alpha;
  for (std::size_t s = 0; s < path.sites(); ++s) {
    for (std::size_t k = 0; k < steps; ++k) {
      const double dt = grid[k + 1] - grid[k];
      path.increments[s * steps + k] =
          std::pow(dt, inv_alpha) * standard_draw(params, seed, site_keys[s], k);
    }
  }
  return path;
}

NoisePath white_noise_path(const StableParams& params, std::size_t site_count,
                           std::span<const double> grid, std::uint64_t seed) {
  std::vector<std::uint64_t> keys(site_count);
  for (std::size_t s = 0; s < site_count; ++s) keys[s] = s;
  return white_noise_path(params, keys, grid, seed);
}

std::vector<double> uniform_grid(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("uniform_grid: dt must be > 0");
  if (T < 0.0) throw std::invalid_argument("uniform_grid: T must be >= 0");
  const double ratio = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * (1.0 + ratio))
    throw std::invalid_argument("uniform_grid: T/dt must round to an integer step count");
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) * dt;
  grid.back() = T;
  return grid;
}

}  // namespace slat
