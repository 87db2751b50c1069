#pragma once

#include <span>
#include <string>
#include <vector>

#include "stable_lattice/lattice.hpp"

// Local observables f with localization set Lambda(f) and the seminorm
// |||f||| = sum_i sup |d_i f| used by the propagation and mixing estimates.

namespace slat {

struct Observable {
  enum class Kind { coordinate_tanh, product_window, constant };

  Kind kind = Kind::constant;
  std::vector<LatticePoint> support;  // Lambda(f)
  double constant_value = 0.0;
  double grad_seminorm = 0.0;  // |||f|||

  // f(x) = tanh(x_i); |f| <= 1, |||f||| = 1
  static Observable coordinate_tanh(LatticePoint site);
  // f(x) = prod_{i in Lambda} 1/(1+x_i^2); |f| <= 1, sup|d_i f| = 3*sqrt(3)/8
  static Observable product_window(std::vector<LatticePoint> sites);
  static Observable constant(double value);

  // evaluates on a cube state; throws if Lambda(f) is not inside the cube
  double eval(const Cube& cube, std::span<const double> state) const;

  std::string kind_name() const;
};

}  // namespace slat
