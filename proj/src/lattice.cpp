#include "stable_lattice/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace slat {

int l1_norm(const LatticePoint& p) noexcept {
  int n = 0;
  for (int c : p.coords) n += std::abs(c);
  return n;
}

int l1_distance(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("l1_distance: dimension mismatch (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
  int n = 0;
  for (int k = 0; k < a.dim(); ++k) n += std::abs(a.coords[k] - b.coords[k]);
  return n;
}

std::uint64_t site_key(const LatticePoint& p) noexcept {
  std::uint64_t h = rng::mix64(static_cast<std::uint64_t>(p.dim()) + rng::kGolden);
  for (int c : p.coords) {
    const auto u = static_cast<std::uint64_t>(static_cast<std::int64_t>(c));
    h = rng::mix64(h ^ rng::mix64(u + rng::kGolden));
  }
  return h;
}

Cube::Cube(int d, int half_width) : d_(d), n_(half_width) {
  if (d < 1) throw std::invalid_argument("Cube: dimension must be >= 1");
  if (half_width < 0) throw std::invalid_argument("Cube: half width must be >= 0");
  size_ = 1;
  const auto side = static_cast<std::size_t>(2 * half_width + 1);
  for (int k = 0; k < d; ++k) size_ *= side;
}

LatticePoint Cube::site_at(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("Cube::site_at: index out of range");
  const auto side = static_cast<std::size_t>(2 * n_ + 1);
  LatticePoint p;
  p.coords.resize(d_);
  for (int k = d_ - 1; k >= 0; --k) {
    p.coords[k] = static_cast<int>(index % side) - n_;
    index /= side;
  }
  return p;
}

std::size_t Cube::index_of(const LatticePoint& p) const {
  if (!contains(p)) throw std::out_of_range("Cube::index_of: point outside cube");
  const auto side = static_cast<std::size_t>(2 * n_ + 1);
  std::size_t idx = 0;
  for (int k = 0; k < d_; ++k) idx = idx * side + static_cast<std::size_t>(p.coords[k] + n_);
  return idx;
}

bool Cube::contains(const LatticePoint& p) const {
  if (p.dim() != d_) return false;
  for (int c : p.coords)
    if (c < -n_ || c > n_) return false;
  return true;
}

std::vector<LatticePoint> Cube::enumerate() const {
  std::vector<LatticePoint> pts;
  pts.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) pts.push_back(site_at(i));
  return pts;
}

std::vector<std::uint64_t> Cube::site_keys() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) keys.push_back(site_key(site_at(i)));
  return keys;
}

bool ball_contains(const GrowthBall& ball, const Cube& cube, std::span<const double> values) {
  if (values.size() != cube.size())
    throw std::invalid_argument("ball_contains: state/cube size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bound =
        ball.R * std::pow(static_cast<double>(l1_norm(cube.site_at(i))) + 1.0, ball.rho);
    if (std::abs(values[i]) > bound) return false;
  }
  return true;
}

std::vector<double> embed_zero_extend(const Cube& from, std::span<const double> values,
                                      const Cube& to) {
  if (from.dim() != to.dim())
    throw std::invalid_argument("embed_zero_extend: dimension mismatch");
  if (to.half_width() < from.half_width())
    throw std::invalid_argument("embed_zero_extend: target cube smaller than source");
  if (values.size() != from.size())
    throw std::invalid_argument("embed_zero_extend: state/cube size mismatch");
  std::vector<double> out(to.size(), 0.0);
  for (std::size_t i = 0; i < from.size(); ++i) out[to.index_of(from.site_at(i))] = values[i];
  return out;
}

}  // namespace slat
