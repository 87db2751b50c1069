#pragma once

// Independent oracles used by the tests. These deliberately avoid the library
// code paths they are checking: the OU sampler uses the exact conditional law
// of the linear SDE, the kernel-power oracle enumerates paths with a plain
// double loop, and min_B is found by brute-force grid scan.

#include <cmath>
#include <cstdint>
#include <vector>

#include "stable_lattice/rng.hpp"
#include "stable_lattice/stable_noise.hpp"

namespace oracles {

// Exact discretization of dX = -eps X dt + dZ with symmetric alpha-stable Z:
// X_{k+1} = e^{-eps dt} X_k + xi_k, xi_k stable with scale
// ((1 - e^{-alpha eps dt}) / (alpha eps))^{1/alpha}.
inline std::vector<double> exact_ou_terminal(double alpha, double eps, double x0, double T,
                                             double dt, std::size_t replicas,
                                             std::uint64_t seed) {
  const slat::StableParams params{alpha};
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double decay = std::exp(-eps * dt);
  const double scale =
      std::pow((1.0 - std::exp(-alpha * eps * dt)) / (alpha * eps), 1.0 / alpha);
  std::vector<double> out(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    auto stream = slat::rng::Stream::keyed(seed, r);
    double x = x0;
    for (std::size_t k = 0; k < steps; ++k)
      x = decay * x + scale * slat::sample_standard(params, stream);
    out[r] = x;
  }
  return out;
}

// E|X(t)| of the exact OU discretization, averaged over replicas.
inline double exact_ou_abs_mean(double alpha, double eps, double x0, double t, double dt,
                                std::size_t replicas, std::uint64_t seed) {
  const auto xs = exact_ou_terminal(alpha, eps, x0, t, dt, replicas, seed);
  double acc = 0.0;
  for (double x : xs) acc += std::abs(x);
  return acc / static_cast<double>(xs.size());
}

// [(c delta + a)^2]_{00} for the d=1 kernel a_{ij} = beta e^{-|i-j|} (i != j)
// by direct path enumeration over intermediate sites |k| <= cutoff.
inline double d1_exp_kernel_power2_00(double beta, double c, int cutoff) {
  auto w = [&](int i, int j) {
    return i == j ? c : beta * std::exp(-std::abs(i - j));
  };
  double sum = 0.0;
  for (int k = -cutoff; k <= cutoff; ++k) sum += w(0, k) * w(k, 0);
  return sum;
}

// dense matrix power entry on sites -half..half of Z^1 for the exp kernel
inline double d1_dense_power_entry(double beta, double c, int n, int i, int j, int half) {
  const int size = 2 * half + 1;
  auto idx = [&](int s) { return s + half; };
  std::vector<double> a(static_cast<std::size_t>(size) * size);
  for (int p = -half; p <= half; ++p)
    for (int q = -half; q <= half; ++q)
      a[static_cast<std::size_t>(idx(p)) * size + idx(q)] =
          (p == q) ? c : beta * std::exp(-std::abs(p - q));
  std::vector<double> v(static_cast<std::size_t>(size), 0.0);
  v[static_cast<std::size_t>(idx(i))] = 1.0;
  std::vector<double> next(v.size());
  for (int m = 0; m < n; ++m) {
    for (int q = 0; q < size; ++q) {
      double acc = 0.0;
      for (int p = 0; p < size; ++p)
        acc += v[static_cast<std::size_t>(p)] * a[static_cast<std::size_t>(p) * size + q];
      next[static_cast<std::size_t>(q)] = acc;
    }
    v.swap(next);
  }
  return v[static_cast<std::size_t>(idx(j))];
}

// [(c delta + a)^2]_{ij} for the d=2 kernel a = beta e^{-l1 distance} (0 on
// the diagonal) by direct summation over intermediate sites
inline double d2_exp_kernel_power2(double beta, double c, int ix, int iy, int jx, int jy,
                                   int cutoff) {
  auto w = [&](int ax, int ay, int bx, int by) {
    const int dist = std::abs(ax - bx) + std::abs(ay - by);
    return dist == 0 ? c : beta * std::exp(-dist);
  };
  double sum = 0.0;
  for (int kx = -cutoff; kx <= cutoff; ++kx)
    for (int ky = -cutoff; ky <= cutoff; ++ky)
      sum += w(ix, iy, kx, ky) * w(kx, ky, jx, jy);
  return sum;
}

// least B >= 8 with 2 - log B + log(2 eta) + 2 eta / B <= -2A, on a grid
inline double min_B_grid_scan(double A, double eta, double step = 1e-3) {
  auto g = [&](double B) {
    return 2.0 - std::log(B) + std::log(2.0 * eta) + 2.0 * eta / B + 2.0 * A;
  };
  double B = 8.0;
  while (g(B) > 0.0) B += step;
  return B;
}

// partial sum of 2 sum_{k=1}^{terms} beta e^{-k} (row mass of the d=1 kernel)
inline double d1_exp_kernel_row_sum(double beta, int terms) {
  double s = 0.0;
  for (int k = 1; k <= terms; ++k) s += 2.0 * beta * std::exp(-k);
  return s;
}

}  // namespace oracles
