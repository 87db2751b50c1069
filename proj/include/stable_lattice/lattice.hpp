#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stable_lattice/rng.hpp"

// Geometry of Z^d: l1 norms and distances, the truncation cubes
// Gamma_N = [-N, N]^d with a fixed lexicographic enumeration, and the
// polynomial-growth balls B_{R,rho} = { x : |x_i| <= R (|i|+1)^rho }.

namespace slat {

struct LatticePoint {
  std::vector<int> coords;

  int dim() const noexcept { return static_cast<int>(coords.size()); }
  bool operator==(const LatticePoint&) const = default;
};

int l1_norm(const LatticePoint& p) noexcept;

// throws std::invalid_argument on dimension mismatch
int l1_distance(const LatticePoint& a, const LatticePoint& b);

// Stable coordinate hash used to key noise substreams. Keyed by the absolute
// coordinates (not by any cube-local index), so nested cubes share noise.
std::uint64_t site_key(const LatticePoint& p) noexcept;

class Cube {
 public:
  Cube() : Cube(1, 0) {}
  Cube(int d, int half_width);

  int dim() const noexcept { return d_; }
  int half_width() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }

  // lexicographic: coordinate 0 most significant, each running -N..N
  LatticePoint site_at(std::size_t index) const;
  std::size_t index_of(const LatticePoint& p) const;  // throws if outside
  bool contains(const LatticePoint& p) const;

  std::vector<LatticePoint> enumerate() const;
  std::vector<std::uint64_t> site_keys() const;

  bool operator==(const Cube& o) const noexcept { return d_ == o.d_ && n_ == o.n_; }

 private:
  int d_;
  int n_;
  std::size_t size_;
};

struct GrowthBall {
  double R = 1.0;
  double rho = 1.0;
};

// true iff |values[i]| <= R (|i|+1)^rho for every site of the cube
bool ball_contains(const GrowthBall& ball, const Cube& cube, std::span<const double> values);

// Embed a state on `from` into `to` (same dimension, to.half_width >= from.half_width),
// filling exterior sites with zero. Matches the I^N zero-extension convention.
std::vector<double> embed_zero_extend(const Cube& from, std::span<const double> values,
                                      const Cube& to);

}  // namespace slat
