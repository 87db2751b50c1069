#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stable_lattice/rng.hpp"

// Exact sampling of symmetric alpha-stable increments, 1 < alpha <= 2.
//
// Convention: for alpha < 2 a unit increment Z(1) has characteristic function
// exp(-|xi|^alpha), and Z(t) equals t^{1/alpha} Z(1) in law. At alpha = 2 the
// generator is Laplacian/2, i.e. Z(t) ~ N(0, t). The two branches do not meet
// continuously at alpha -> 2 (the alpha < 2 convention would give variance 2t);
// we follow each branch as stated.

namespace slat {

struct StableParams {
  double alpha = 2.0;
};

// throws std::invalid_argument unless 1 < alpha <= 2
void validate(const StableParams& params);

inline bool is_gaussian(const StableParams& params) noexcept { return params.alpha == 2.0; }

// One draw with the law of Z(1). Chambers-Mallows-Stuck transform for
// alpha < 2, standard normal for alpha = 2.
double sample_standard(const StableParams& params, rng::Stream& stream);

// Increment over a time window of length dt: dt^{1/alpha} * sample_standard.
// dt = 0 returns 0 exactly without consuming the stream; dt < 0 throws.
double sample_increment(const StableParams& params, double dt, rng::Stream& stream);

// Real part of the empirical characteristic function, (1/n) sum cos(xi * x_k).
// Throws on an empty sample.
double empirical_char_fn(std::span<const double> samples, double xi);

struct NoisePath {
  StableParams params;
  std::uint64_t seed = 0;
  std::vector<double> grid;                 // 0 = t_0 < t_1 < ... < t_M
  std::vector<std::uint64_t> site_keys;     // one substream key per site
  std::vector<double> increments;           // site-major: [site * steps + k]

  std::size_t sites() const noexcept { return site_keys.size(); }
  std::size_t steps() const noexcept { return grid.empty() ? 0 : grid.size() - 1; }
  double increment(std::size_t site, std::size_t step) const {
    return increments[site * steps() + step];
  }
};

// The unit-law draw backing increment (site, step); pure in (seed, key, step).
double standard_draw(const StableParams& params, std::uint64_t seed, std::uint64_t site_key,
                     std::uint64_t step);

// Fill a NoisePath over the given grid. The increment for (site i, step k) is
// grid-spacing^{1/alpha} * standard_draw(seed, key_i, k), independent of
// evaluation order. The grid must start at 0 and be strictly increasing.
NoisePath white_noise_path(const StableParams& params, std::span<const std::uint64_t> site_keys,
                           std::span<const double> grid, std::uint64_t seed);

// Convenience overload with keys 0..site_count-1.
NoisePath white_noise_path(const StableParams& params, std::size_t site_count,
                           std::span<const double> grid, std::uint64_t seed);

// 0, dt, 2 dt, ..., T. Throws unless T/dt rounds to an integer step count.
std::vector<double> uniform_grid(double T, double dt);

}  // namespace slat
