#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stable_lattice/lattice.hpp"

// Interaction kernels a_ij, single-site drifts J_i, and the truncated model
// on Gamma_N with its constants eta (interaction strength), c (drift
// dissipativity inf(-J')) and delta = c - eta.
//
// Every built-in kernel is required to satisfy the normalized decay
// a_ij <= exp(-|i-j|); validate_assumptions checks this together with the
// drift conditions J(0)=0, J' <= 0 and polynomial growth.

namespace slat {

// sum over k in Z^d, k != 0, of exp(-|k|) = (1 + 2/(e-1))^d - 1
double exp_decay_total_mass(int d);

// number of lattice points of Z^d at l1 distance exactly l
double count_at_l1_distance(int d, int l);

class InteractionKernel {
 public:
  enum class Kind { exp_decay, finite_range, custom_table };

  // w(i,j) = beta * exp(-|i-j|) for i != j (0 on the diagonal); if
  // `normalized`, divided by exp_decay_total_mass(d) evaluated lazily per
  // dimension, which makes every row and column sum exactly beta.
  static InteractionKernel exp_decay(double beta, bool normalized = false,
                                     int support_radius = 37);

  // w(i,j) = weight for 1 <= |i-j| <= range, 0 otherwise
  static InteractionKernel finite_range(int range, double weight);

  struct TableEntry {
    LatticePoint i;
    LatticePoint j;
    double weight = 0.0;
  };
  static InteractionKernel custom_table(std::vector<TableEntry> entries);

  Kind kind() const noexcept { return kind_; }
  int support_radius() const noexcept { return support_radius_; }
  bool translation_invariant() const noexcept { return kind_ != Kind::custom_table; }
  double beta() const noexcept { return beta_; }
  bool normalized() const noexcept { return normalized_; }
  int range() const noexcept { return range_; }
  const std::vector<TableEntry>& table() const noexcept { return table_; }

  double weight(const LatticePoint& i, const LatticePoint& j) const;

  // translation-invariant kinds only: weight as a function of l1 distance
  double weight_at_distance(int dist, int d) const;

  // analytic bound on the row/column mass ignored beyond the support radius
  double tail_mass(int d) const;

  // full-lattice row (= column) sum for translation-invariant kinds
  double full_row_sum(int d) const;

 private:
  Kind kind_ = Kind::exp_decay;
  double beta_ = 1.0;
  bool normalized_ = false;
  int support_radius_ = 37;
  int range_ = 1;
  double fr_weight_ = 0.0;
  std::vector<TableEntry> table_;
};

class SiteDrift {
 public:
  enum class Kind { poly, custom };

  // J(x) = -(1+eps) x - c0 x^{2n+1}; requires eps >= 0, c0 >= 0, n >= 0
  static SiteDrift poly(double eps, double c0, int n);

  // J(x) = -rate x with rate > 0 (generalized OU drift)
  static SiteDrift linear(double rate);

  static SiteDrift custom(std::function<double(double)> j,
                          std::function<double(double)> j_prime, double kappa,
                          double kappa_prime,
                          std::optional<double> dissipativity = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  double eval(double x) const;
  double derivative(double x) const;  // analytic for poly/linear; else user fn
  // J(x)/x for |x| > zero_threshold, J'(0) otherwise
  double ratio(double x, double zero_threshold = 1e-12) const;

  double kappa() const noexcept { return kappa_; }
  double kappa_prime() const noexcept { return kappa_prime_; }
  // inf over x of -J'(x) when known analytically
  std::optional<double> dissipativity() const noexcept { return dissipativity_; }
  // true iff J(x) = -r x exactly (poly with c0 = 0, or the linear builder)
  bool is_linear() const noexcept { return linear_; }

  double poly_eps() const noexcept { return eps_; }
  double poly_c0() const noexcept { return c0_; }
  int poly_n() const noexcept { return n_; }

 private:
  Kind kind_ = Kind::poly;
  double eps_ = 0.0, c0_ = 0.0;
  int n_ = 0;
  bool linear_ = false;
  std::function<double(double)> j_, j_prime_;
  double kappa_ = 1.0, kappa_prime_ = 1.0;
  std::optional<double> dissipativity_;
};

double drift_eval(const SiteDrift& drift, double x);
double drift_ratio(const SiteDrift& drift, double x, double zero_threshold = 1e-12);

enum class InteractionKind { linear, log_exp };

// eta = (sup_j sum_i a_ij) v (sup_i sum_j a_ji) with the row/column sums taken
// over the full lattice: in-support mass enumerated exactly, plus the analytic
// tail bound. The result is an upper bound on the true eta.
double compute_eta(const InteractionKernel& kernel, const Cube& region);

struct ModelSpec {
  int d = 1;
  Cube cube;
  InteractionKernel kernel;
  SiteDrift drift;
  InteractionKind interaction = InteractionKind::linear;

  double eta = 0.0;    // computed by make_model
  double c = 0.0;      // inf(-J'), analytic when available
  double delta = 0.0;  // c - eta

  // per-cube sparse structure for interaction evaluation
  struct Pair {
    std::uint32_t j = 0;
    double w_ij = 0.0;  // a_{ij}
    double w_ji = 0.0;  // a_{ji}
  };
  std::vector<std::uint32_t> row_begin;  // size cube.size()+1
  std::vector<Pair> pairs;
  std::vector<double> outside_mass;  // log-exp: full column mass minus in-cube mass
  std::vector<std::uint64_t> site_keys;

  std::size_t sites() const noexcept { return cube.size(); }
};

// Builds the spec and precomputes the neighbour structure. For log-exp
// interactions the kernel must be column-stochastic on the full lattice
// (column sums 1), otherwise I_i(0) != 0 and construction throws.
ModelSpec make_model(int d, int half_width, InteractionKernel kernel, SiteDrift drift,
                     InteractionKind interaction);

// I^N_i(x) for every i in Gamma_N, exterior sites frozen at zero.
void interaction_eval_into(const ModelSpec& spec, std::span<const double> state,
                           std::span<double> out);
std::vector<double> interaction_eval(const ModelSpec& spec, std::span<const double> state);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string witness;  // empty when passing
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  std::string to_string() const;
};

struct ValidationGrid {
  double lo = -100.0;
  double hi = 100.0;
  int points = 10000;
};

ValidationReport validate_assumptions(const ModelSpec& spec, const ValidationGrid& grid = {});

}  // namespace slat
