#include "stable_lattice/observable.hpp"

#include <cmath>

namespace slat {

Observable Observable::coordinate_tanh(LatticePoint site) {
  Observable f;
  f.kind = Kind::coordinate_tanh;
  f.support = {std::move(site)};
  f.grad_seminorm = 1.0;
  return f;
}

Observable Observable::product_window(std::vector<LatticePoint> sites) {
  Observable f;
  f.kind = Kind::product_window;
  f.support = std::move(sites);
  f.grad_seminorm = static_cast<double>(f.support.size()) * 3.0 * std::sqrt(3.0) / 8.0;
  return f;
}

Observable Observable::constant(double value) {
  Observable f;
  f.kind = Kind::constant;
  f.constant_value = value;
  f.grad_seminorm = 0.0;
  return f;
}

double Observable::eval(const Cube& cube, std::span<const double> state) const {
  switch (kind) {
    case Kind::constant:
      return constant_value;
    case Kind::coordinate_tanh:
      return std::tanh(state[cube.index_of(support.front())]);
    case Kind::product_window: {
      double p = 1.0;
      for (const auto& s : support) {
        const double x = state[cube.index_of(s)];
        p *= 1.0 / (1.0 + x * x);
      }
      return p;
    }
  }
  return 0.0;
}

std::string Observable::kind_name() const {
  switch (kind) {
    case Kind::coordinate_tanh:
      return "coordinate_tanh";
    case Kind::product_window:
      return "product_window";
    case Kind::constant:
      return "constant";
  }
  return "unknown";
}

}  // namespace slat
