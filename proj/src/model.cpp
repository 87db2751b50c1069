#include "stable_lattice/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace slat {

namespace {
constexpr double kDropBelow = 1e-16;  // sparse entries below this are dropped

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}
}  // namespace

double exp_decay_total_mass(int d) {
  if (d < 1) throw std::invalid_argument("exp_decay_total_mass: d must be >= 1");
  const double one_dim = 1.0 + 2.0 / (std::exp(1.0) - 1.0);  // sum over Z of e^{-|k|}
  return ipow(one_dim, d) - 1.0;
}

double count_at_l1_distance(int d, int l) {
  if (d < 1 || l < 0) throw std::invalid_argument("count_at_l1_distance: bad arguments");
  if (l == 0) return 1.0;
  // convolve the one-dimensional counts (1 at 0, 2 at each l >= 1) d times
  std::vector<double> counts(static_cast<std::size_t>(l) + 1, 0.0);
  counts[0] = 1.0;
  for (int dim = 0; dim < d; ++dim) {
    std::vector<double> next(counts.size(), 0.0);
    for (int a = 0; a <= l; ++a) {
      if (counts[a] == 0.0) continue;
      next[a] += counts[a];
      for (int step = 1; a + step <= l; ++step) next[a + step] += 2.0 * counts[a];
    }
    counts.swap(next);
  }
  return counts[static_cast<std::size_t>(l)];
}

InteractionKernel InteractionKernel::exp_decay(double beta, bool normalized, int support_radius) {
  if (!(beta >= 0.0)) throw std::invalid_argument("exp_decay: beta must be >= 0");
  if (support_radius < 1) throw std::invalid_argument("exp_decay: support radius must be >= 1");
  InteractionKernel k;
  k.kind_ = Kind::exp_decay;
  k.beta_ = beta;
  k.normalized_ = normalized;
  k.support_radius_ = support_radius;
  return k;
}

InteractionKernel InteractionKernel::finite_range(int range, double weight) {
  if (range < 1) throw std::invalid_argument("finite_range: range must be >= 1");
  if (!(weight >= 0.0)) throw std::invalid_argument("finite_range: weight must be >= 0");
  InteractionKernel k;
  k.kind_ = Kind::finite_range;
  k.range_ = range;
  k.fr_weight_ = weight;
  k.support_radius_ = range;
  return k;
}

InteractionKernel InteractionKernel::custom_table(std::vector<TableEntry> entries) {
  InteractionKernel k;
  k.kind_ = Kind::custom_table;
  k.table_ = std::move(entries);
  int radius = 1;
  for (const auto& e : k.table_) radius = std::max(radius, l1_distance(e.i, e.j));
  k.support_radius_ = radius;
  return k;
}

double InteractionKernel::weight(const LatticePoint& i, const LatticePoint& j) const {
  if (kind_ == Kind::custom_table) {
    for (const auto& e : table_)
      if (e.i == i && e.j == j) return e.weight;
    return 0.0;
  }
  return weight_at_distance(l1_distance(i, j), i.dim());
}

double InteractionKernel::weight_at_distance(int dist, int d) const {
  switch (kind_) {
    case Kind::exp_decay: {
      if (dist == 0 || dist > support_radius_) return 0.0;
      const double z = normalized_ ? exp_decay_total_mass(d) : 1.0;
      const double w = beta_ * std::exp(-static_cast<double>(dist)) / z;
      return w < kDropBelow ? 0.0 : w;
    }
    case Kind::finite_range:
      return (dist >= 1 && dist <= range_) ? fr_weight_ : 0.0;
    case Kind::custom_table:
      throw std::logic_error("weight_at_distance: custom-table kernel is not translation invariant");
  }
  return 0.0;
}

double InteractionKernel::tail_mass(int d) const {
  if (kind_ == Kind::custom_table) return 0.0;
  double represented = 0.0;
  for (int l = 1; l <= support_radius_; ++l)
    represented += count_at_l1_distance(d, l) * weight_at_distance(l, d);
  return std::max(0.0, full_row_sum(d) - represented);
}

double InteractionKernel::full_row_sum(int d) const {
  switch (kind_) {
    case Kind::exp_decay:
      return normalized_ ? beta_ : beta_ * exp_decay_total_mass(d);
    case Kind::finite_range: {
      double s = 0.0;
      for (int l = 1; l <= range_; ++l) s += count_at_l1_distance(d, l) * fr_weight_;
      return s;
    }
    case Kind::custom_table:
      throw std::logic_error("full_row_sum: not defined for custom-table kernels");
  }
  return 0.0;
}

SiteDrift SiteDrift::poly(double eps, double c0, int n) {
  if (!(eps >= 0.0)) throw std::invalid_argument("SiteDrift::poly: eps must be >= 0");
  if (!(c0 >= 0.0)) throw std::invalid_argument("SiteDrift::poly: c0 must be >= 0");
  if (n < 0) throw std::invalid_argument("SiteDrift::poly: n must be >= 0");
  SiteDrift d;
  d.kind_ = Kind::poly;
  d.eps_ = eps;
  d.c0_ = c0;
  d.n_ = n;
  d.kappa_ = static_cast<double>(2 * n + 1);
  d.kappa_prime_ = 1.0 + eps + c0;
  d.dissipativity_ = (n == 0) ? 1.0 + eps + c0 : 1.0 + eps;
  d.linear_ = (c0 == 0.0 || n == 0);
  return d;
}

SiteDrift SiteDrift::linear(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("SiteDrift::linear: rate must be > 0");
  SiteDrift d;
  d.kind_ = Kind::custom;
  d.j_ = [rate](double x) { return -rate * x; };
  d.j_prime_ = [rate](double) { return -rate; };
  d.kappa_ = 1.0;
  d.kappa_prime_ = rate;
  d.dissipativity_ = rate;
  d.linear_ = true;
  return d;
}

SiteDrift SiteDrift::custom(std::function<double(double)> j, std::function<double(double)> j_prime,
                            double kappa, double kappa_prime,
                            std::optional<double> dissipativity) {
  if (!j) throw std::invalid_argument("SiteDrift::custom: drift function required");
  SiteDrift d;
  d.kind_ = Kind::custom;
  d.j_ = std::move(j);
  d.j_prime_ = std::move(j_prime);
  d.kappa_ = kappa;
  d.kappa_prime_ = kappa_prime;
  d.dissipativity_ = dissipativity;
  return d;
}

double SiteDrift::eval(double x) const {
  if (kind_ == Kind::poly) return -(1.0 + eps_) * x - c0_ * ipow(x, 2 * n_ + 1);
  return j_(x);
}

double SiteDrift::derivative(double x) const {
  if (kind_ == Kind::poly)
    return -(1.0 + eps_) - c0_ * static_cast<double>(2 * n_ + 1) * ipow(x, 2 * n_);
  if (j_prime_) return j_prime_(x);
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (j_(x + h) - j_(x - h)) / (2.0 * h);
}

double SiteDrift::ratio(double x, double zero_threshold) const {
  if (std::abs(x) <= zero_threshold) return derivative(0.0);
  if (kind_ == Kind::poly) return -(1.0 + eps_) - c0_ * ipow(x, 2 * n_);
  return j_(x) / x;
}

double drift_eval(const SiteDrift& drift, double x) { return drift.eval(x); }

double drift_ratio(const SiteDrift& drift, double x, double zero_threshold) {
  return drift.ratio(x, zero_threshold);
}

double compute_eta(const InteractionKernel& kernel, const Cube& region) {
  const int d = region.dim();
  if (kernel.translation_invariant()) {
    double in_support = 0.0;
    for (int l = 1; l <= kernel.support_radius(); ++l)
      in_support += count_at_l1_distance(d, l) * kernel.weight_at_distance(l, d);
    return in_support + kernel.tail_mass(d);
  }
  // custom table: per-site row and column sums over the stored entries
  double best = 0.0;
  for (std::size_t idx = 0; idx < region.size(); ++idx) {
    const LatticePoint p = region.site_at(idx);
    double row = 0.0, col = 0.0;
    for (const auto& e : kernel.table()) {
      if (e.i == p) row += e.weight;
      if (e.j == p) col += e.weight;
    }
    best = std::max({best, row, col});
  }
  return best;
}

ModelSpec make_model(int d, int half_width, InteractionKernel kernel, SiteDrift drift,
                     InteractionKind interaction) {
  ModelSpec spec{.d = d,
                 .cube = Cube(d, half_width),
                 .kernel = std::move(kernel),
                 .drift = std::move(drift),
                 .interaction = interaction};

  spec.eta = compute_eta(spec.kernel, spec.cube);
  if (spec.drift.dissipativity()) {
    spec.c = *spec.drift.dissipativity();
  } else {
    // fall back to a scan of -J' over a wide grid
    double c = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double x = -100.0 + 0.02 * static_cast<double>(k);
      c = std::min(c, -spec.drift.derivative(x));
    }
    spec.c = c;
  }
  spec.delta = spec.c - spec.eta;
  spec.site_keys = spec.cube.site_keys();

  const std::size_t n = spec.cube.size();
  const auto points = spec.cube.enumerate();
  spec.row_begin.assign(n + 1, 0);
  double full_col = 0.0;
  if (spec.interaction == InteractionKind::log_exp) {
    if (!spec.kernel.translation_invariant())
      throw std::invalid_argument("make_model: log-exp interaction needs a translation-invariant kernel");
    full_col = spec.kernel.full_row_sum(d);
    if (std::abs(full_col - 1.0) > 1e-9)
      throw std::invalid_argument(
          "make_model: log-exp interaction requires column sums = 1 (use a normalized kernel "
          "with beta = 1); got column sum " +
          std::to_string(full_col));
    spec.outside_mass.assign(n, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double in_col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (l1_distance(points[i], points[j]) > spec.kernel.support_radius()) continue;
      const double w_ij = spec.kernel.weight(points[i], points[j]);
      const double w_ji = spec.kernel.weight(points[j], points[i]);
      if (w_ij < kDropBelow && w_ji < kDropBelow) continue;
      spec.pairs.push_back({static_cast<std::uint32_t>(j), w_ij, w_ji});
      in_col += w_ji;
    }
    spec.row_begin[i + 1] = static_cast<std::uint32_t>(spec.pairs.size());
    if (spec.interaction == InteractionKind::log_exp)
      spec.outside_mass[i] = std::max(0.0, full_col - in_col);
  }
  return spec;
}

void interaction_eval_into(const ModelSpec& spec, std::span<const double> state,
                           std::span<double> out) {
  const std::size_t n = spec.sites();
  if (state.size() != n || out.size() != n)
    throw std::invalid_argument("interaction_eval: state/cube size mismatch");
  if (spec.interaction == InteractionKind::linear) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::uint32_t p = spec.row_begin[i]; p < spec.row_begin[i + 1]; ++p)
        acc += spec.pairs[p].w_ij * state[spec.pairs[p].j];
      out[i] = acc;
    }
    return;
  }
  // log-exp: I_i(x) = log( sum_{j in cube} a_ji e^{x_j} + outside mass * e^0 ),
  // evaluated in log-sum-exp form for overflow safety
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;  // the exterior contribution has exponent 0
    for (std::uint32_t p = spec.row_begin[i]; p < spec.row_begin[i + 1]; ++p)
      if (spec.pairs[p].w_ji > 0.0) m = std::max(m, state[spec.pairs[p].j]);
    double acc = spec.outside_mass[i] * std::exp(-m);
    for (std::uint32_t p = spec.row_begin[i]; p < spec.row_begin[i + 1]; ++p)
      acc += spec.pairs[p].w_ji * std::exp(state[spec.pairs[p].j] - m);
    out[i] = m + std::log(acc);
  }
}

std::vector<double> interaction_eval(const ModelSpec& spec, std::span<const double> state) {
  std::vector<double> out(spec.sites());
  interaction_eval_into(spec, state, out);
  return out;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
    if (!c.pass && !c.witness.empty()) os << " -- " << c.witness;
    os << '\n';
  }
  return os.str();
}

namespace {

std::string point_str(const LatticePoint& p) {
  std::ostringstream os;
  os << '(';
  for (int k = 0; k < p.dim(); ++k) os << (k ? "," : "") << p.coords[k];
  os << ')';
  return os.str();
}

void check_kernel_decay(const ModelSpec& spec, ValidationReport& report) {
  ValidationCheck nonneg{"kernel_nonnegative", true, ""};
  ValidationCheck decay{"kernel_decay_bound", true, ""};
  const int d = spec.d;
  if (spec.kernel.translation_invariant()) {
    for (int l = 1; l <= spec.kernel.support_radius(); ++l) {
      const double w = spec.kernel.weight_at_distance(l, d);
      if (w < 0.0 && nonneg.pass) {
        nonneg.pass = false;
        nonneg.witness = "weight at distance " + std::to_string(l) + " is negative";
      }
      if (w > std::exp(-static_cast<double>(l)) * (1.0 + 1e-12) && decay.pass) {
        decay.pass = false;
        std::ostringstream os;
        os << "weight " << w << " at distance " << l << " exceeds e^-" << l << " = "
           << std::exp(-static_cast<double>(l));
        decay.witness = os.str();
      }
    }
  } else {
    for (const auto& e : spec.kernel.table()) {
      if (e.weight < 0.0 && nonneg.pass) {
        nonneg.pass = false;
        nonneg.witness = "weight(" + point_str(e.i) + "," + point_str(e.j) + ") is negative";
      }
      const int l = l1_distance(e.i, e.j);
      const double bound = std::exp(-static_cast<double>(l));
      if (e.weight > bound * (1.0 + 1e-12) && decay.pass) {
        decay.pass = false;
        std::ostringstream os;
        os << "weight(" << point_str(e.i) << "," << point_str(e.j) << ") = " << e.weight
           << " exceeds e^-" << l << " = " << bound;
        decay.witness = os.str();
      }
    }
  }
  report.checks.push_back(nonneg);
  report.checks.push_back(decay);
}

}  // namespace

ValidationReport validate_assumptions(const ModelSpec& spec, const ValidationGrid& grid) {
  ValidationReport report;
  check_kernel_decay(spec, report);

  // J(0) = 0
  {
    const double j0 = spec.drift.eval(0.0);
    report.checks.push_back(
        {"drift_zero_at_origin", std::abs(j0) <= 1e-15,
         std::abs(j0) <= 1e-15 ? "" : "J(0) = " + std::to_string(j0)});
  }

  // J' <= 0 and |J| <= kappa'(|x|^kappa + 1) on the evaluation grid
  {
    ValidationCheck mono{"drift_monotone", true, ""};
    ValidationCheck growth{"drift_polynomial_growth", true, ""};
    const int pts = std::max(grid.points, 2);
    for (int k = 0; k < pts; ++k) {
      const double x =
          grid.lo + (grid.hi - grid.lo) * static_cast<double>(k) / static_cast<double>(pts - 1);
      if (mono.pass && spec.drift.derivative(x) > 1e-12) {
        mono.pass = false;
        mono.witness = "J'(" + std::to_string(x) + ") = " + std::to_string(spec.drift.derivative(x));
      }
      const double bound =
          spec.drift.kappa_prime() * (std::pow(std::abs(x), spec.drift.kappa()) + 1.0);
      if (growth.pass && std::abs(spec.drift.eval(x)) > bound * (1.0 + 1e-12)) {
        growth.pass = false;
        growth.witness = "|J(" + std::to_string(x) + ")| = " +
                         std::to_string(std::abs(spec.drift.eval(x))) + " exceeds " +
                         std::to_string(bound);
      }
    }
    report.checks.push_back(mono);
    report.checks.push_back(growth);
  }

  report.checks.push_back({"eta_finite", std::isfinite(spec.eta),
                           std::isfinite(spec.eta) ? "" : "eta = " + std::to_string(spec.eta)});

  // I_i(0) = 0 on the cube
  {
    std::vector<double> zeros(spec.sites(), 0.0);
    const auto iv = interaction_eval(spec, zeros);
    ValidationCheck check{"interaction_zero_at_zero", true, ""};
    for (std::size_t i = 0; i < iv.size(); ++i) {
      if (std::abs(iv[i]) > 1e-12) {
        check.pass = false;
        check.witness = "I_" + point_str(spec.cube.site_at(i)) + "(0) = " + std::to_string(iv[i]);
        break;
      }
    }
    report.checks.push_back(check);
  }

  if (spec.interaction == InteractionKind::log_exp) {
    const double col = spec.kernel.full_row_sum(spec.d);
    report.checks.push_back({"kernel_column_stochastic", std::abs(col - 1.0) <= 1e-9,
                             std::abs(col - 1.0) <= 1e-9
                                 ? ""
                                 : "full column sum = " + std::to_string(col)});
  }
  return report;
}

}  // namespace slat
