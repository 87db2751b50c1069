#pragma once

#include <span>
#include <vector>

#include "stable_lattice/model.hpp"

// Exact computation of [(c delta + a)^n]_{ij} by truncated matrix powers on a
// padded region, and the closed-form upper bound
//   (c + eta)^n sum_{k >= |j-i|} (2k)^{nd} e^{-k}.
// All kernel entries are nonnegative, so the truncated value is a certified
// lower bound of the full-lattice value; the padding is grown until the entry
// stabilizes.

namespace slat {

struct BoundQuery {
  double c = 0.0;   // Kronecker weight
  int n = 0;        // power
  int d = 1;        // lattice dimension
  int dist = 0;     // l1 separation |j - i|
  double eta = 0.0; // interaction strength
};

// The k-sum is truncated once the next term falls below 1e-16 of the partial
// sum. At k = 0 the term (2k)^{nd} is read as 1 for n = 0 and 0 for n >= 1.
double matrix_power_bound(const BoundQuery& query);

struct MatrixPowerOptions {
  int pad_width = 15;     // padding added per power, and per convergence round
  double tol = 1e-12;     // padding-stability acceptance threshold
  int max_rounds = 6;
};

struct MatrixPowerEntry {
  double value = 0.0;
  double tail_estimate = 0.0;  // coarse bound on mass lost to the support cutoff
  int padding = 0;             // padding at which the value stabilized
};

// [(c delta + a)^n]_{ij} with i, j inside `region`; intermediate path mass
// lives on region padded by n * pad_width (grown until stable).
MatrixPowerEntry matrix_power_entry(const InteractionKernel& kernel, double c, int n,
                                    const LatticePoint& i, const LatticePoint& j,
                                    const Cube& region, const MatrixPowerOptions& opts = {});

struct BoundCheckRow {
  std::size_t i_index = 0;
  std::size_t j_index = 0;
  int n = 0;
  double c = 0.0;
  double exact = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

struct BoundReport {
  Cube region;
  double eta = 0.0;
  int n_max = 0;
  std::vector<double> c_values;
  std::vector<BoundCheckRow> rows;
  double max_ratio = 0.0;
  bool pass = false;

  const BoundCheckRow& worst_row() const;
};

// Checks exact <= bound for every pair (i, j) in `region`, every n <= n_max
// and every c in c_values. Throws std::invalid_argument if the kernel violates
// the decay hypothesis a_ij <= e^{-|i-j|}.
BoundReport verify_bound(const InteractionKernel& kernel, std::span<const double> c_values,
                         int n_max, const Cube& region, int threads = 1,
                         const MatrixPowerOptions& opts = {});

}  // namespace slat
