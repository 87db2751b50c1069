#include "stable_lattice/kernel_estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace slat {

double matrix_power_bound(const BoundQuery& q) {
  if (q.n < 0 || q.dist < 0 || q.d < 1 || q.c < 0.0 || q.eta < 0.0)
    throw std::invalid_argument("matrix_power_bound: invalid query");
  const double nd = static_cast<double>(q.n) * static_cast<double>(q.d);
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = q.dist; k < 200000; ++k) {
    double term;
    if (k == 0)
      term = (q.n == 0) ? 1.0 : 0.0;  // (2k)^{nd} at k=0: 0^0 := 1, else 0
    else
      term = std::exp(nd * std::log(2.0 * static_cast<double>(k)) - static_cast<double>(k));
    sum += term;
    if (k > q.dist && term < prev && term <= 1e-16 * sum) break;
    if (term > 0.0) prev = term;
  }
  return std::pow(q.c + q.eta, q.n) * sum;
}

namespace {

struct Stencil {
  std::vector<std::vector<int>> offsets;
  std::vector<double> weights;
};

void enumerate_offsets(int d, int radius, std::vector<int>& current,
                       std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == d) {
    out.push_back(current);
    return;
  }
  int used = 0;
  for (int c : current) used += std::abs(c);
  for (int c = -(radius - used); c <= radius - used; ++c) {
    current.push_back(c);
    enumerate_offsets(d, radius, current, out);
    current.pop_back();
  }
}

Stencil build_stencil(const InteractionKernel& kernel, int d) {
  Stencil s;
  std::vector<int> current;
  std::vector<std::vector<int>> all;
  enumerate_offsets(d, kernel.support_radius(), current, all);
  for (auto& o : all) {
    int dist = 0;
    for (int c : o) dist += std::abs(c);
    if (dist == 0) continue;
    const double w = kernel.weight_at_distance(dist, d);
    if (w > 0.0) {
      s.offsets.push_back(std::move(o));
      s.weights.push_back(w);
    }
  }
  return s;
}

// one application of (c delta + a) restricted to `padded`, batched over
// `batch` source columns; values outside the cube are zero by construction
void apply_step_stencil(const Stencil& stencil, double c, const Cube& padded, std::size_t batch,
                        const std::vector<double>& in, std::vector<double>& out) {
  const int d = padded.dim();
  const int P = padded.half_width();
  const std::size_t side = static_cast<std::size_t>(2 * P + 1);
  out.assign(in.size(), 0.0);
  if (c != 0.0)
    for (std::size_t t = 0; t < in.size(); ++t) out[t] = c * in[t];

  std::vector<long> stride(static_cast<std::size_t>(d));
  stride[static_cast<std::size_t>(d) - 1] = 1;
  for (int k = d - 2; k >= 0; --k)
    stride[static_cast<std::size_t>(k)] =
        stride[static_cast<std::size_t>(k) + 1] * static_cast<long>(side);

  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  std::vector<int> t(static_cast<std::size_t>(d));
  for (std::size_t oi = 0; oi < stencil.offsets.size(); ++oi) {
    const auto& off = stencil.offsets[oi];
    const double w = stencil.weights[oi];
    long delta = 0;
    bool empty = false;
    for (int k = 0; k < d; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      lo[ks] = -P + std::max(0, off[ks]);
      hi[ks] = P + std::min(0, off[ks]);
      if (lo[ks] > hi[ks]) empty = true;
      delta += static_cast<long>(off[ks]) * stride[ks];
    }
    if (empty) continue;

    // odometer over the leading d-1 dimensions, contiguous run in the last
    for (int k = 0; k < d; ++k) t[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)];
    while (true) {
      long base = 0;
      for (int k = 0; k < d - 1; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        base += static_cast<long>(t[ks] + P) * stride[ks];
      }
      const int last_lo = lo[static_cast<std::size_t>(d) - 1];
      const int last_hi = hi[static_cast<std::size_t>(d) - 1];
      const long tgt0 = base + static_cast<long>(last_lo + P);
      const std::size_t run = static_cast<std::size_t>(last_hi - last_lo) + 1;
      const double* src = in.data() + (tgt0 - delta) * static_cast<long>(batch);
      double* dst = out.data() + tgt0 * static_cast<long>(batch);
      for (std::size_t r = 0; r < run * batch; ++r) dst[r] += w * src[r];

      int k = d - 2;
      while (k >= 0) {
        const auto ks = static_cast<std::size_t>(k);
        if (++t[ks] <= hi[ks]) break;
        t[ks] = lo[ks];
        --k;
      }
      if (k < 0) break;
    }
  }
}

// pairwise application for custom-table kernels: v'(j) = c v(j) + sum_i v(i) a_ij
void apply_step_table(const InteractionKernel& kernel, double c, const Cube& padded,
                      std::size_t batch, const std::vector<double>& in, std::vector<double>& out) {
  out.assign(in.size(), 0.0);
  if (c != 0.0)
    for (std::size_t t = 0; t < in.size(); ++t) out[t] = c * in[t];
  for (const auto& e : kernel.table()) {
    if (!padded.contains(e.i) || !padded.contains(e.j) || e.weight == 0.0) continue;
    const std::size_t from = padded.index_of(e.i);
    const std::size_t to = padded.index_of(e.j);
    for (std::size_t b = 0; b < batch; ++b) out[to * batch + b] += e.weight * in[from * batch + b];
  }
}

// Visit (c delta + a)^n e_s for n = 0..n_max without retaining all levels.
// visit(n, values) sees the level-n batch matrix, padded-site-major.
template <class Visit>
void walk_powers(const InteractionKernel& kernel, double c, int n_max, const Cube& padded,
                 std::span<const LatticePoint> sources, Visit&& visit) {
  const std::size_t batch = sources.size();
  std::vector<double> v(padded.size() * batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b) v[padded.index_of(sources[b]) * batch + b] = 1.0;
  visit(0, v);
  const bool invariant = kernel.translation_invariant();
  Stencil stencil;
  if (invariant) stencil = build_stencil(kernel, padded.dim());
  std::vector<double> next;
  for (int n = 1; n <= n_max; ++n) {
    if (invariant)
      apply_step_stencil(stencil, c, padded, batch, v, next);
    else
      apply_step_table(kernel, c, padded, batch, v, next);
    v.swap(next);
    visit(n, v);
  }
}

// entries[n][b * targets.size() + j] for the requested target sites
std::vector<std::vector<double>> power_entries(const InteractionKernel& kernel, double c,
                                               int n_max, const Cube& padded,
                                               std::span<const LatticePoint> sources,
                                               std::span<const LatticePoint> targets) {
  std::vector<std::size_t> target_index(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) target_index[j] = padded.index_of(targets[j]);
  std::vector<std::vector<double>> entries(static_cast<std::size_t>(n_max) + 1);
  walk_powers(kernel, c, n_max, padded, sources, [&](int n, const std::vector<double>& v) {
    auto& slab = entries[static_cast<std::size_t>(n)];
    slab.resize(sources.size() * targets.size());
    for (std::size_t j = 0; j < targets.size(); ++j)
      for (std::size_t b = 0; b < sources.size(); ++b)
        slab[b * targets.size() + j] = v[target_index[j] * sources.size() + b];
  });
  return entries;
}

double tail_estimate(const InteractionKernel& kernel, double c, int n, double eta, int d) {
  if (n == 0) return 0.0;
  return static_cast<double>(n) * std::pow(c + eta, n - 1) * kernel.tail_mass(d);
}

void check_aij_hypothesis(const InteractionKernel& kernel, int d) {
  if (kernel.translation_invariant()) {
    for (int l = 1; l <= kernel.support_radius(); ++l) {
      const double w = kernel.weight_at_distance(l, d);
      if (w > std::exp(-static_cast<double>(l)) * (1.0 + 1e-12))
        throw std::invalid_argument(
            "verify_bound: kernel violates a_ij <= e^{-|i-j|} at distance " + std::to_string(l));
    }
  } else {
    for (const auto& e : kernel.table()) {
      const int l = l1_distance(e.i, e.j);
      if (e.weight > std::exp(-static_cast<double>(l)) * (1.0 + 1e-12))
        throw std::invalid_argument(
            "verify_bound: kernel violates a_ij <= e^{-|i-j|} on a table entry");
    }
  }
}

double safe_ratio(double exact, double bound) {
  if (bound > 0.0) return exact / bound;
  return exact == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

MatrixPowerEntry matrix_power_entry(const InteractionKernel& kernel, double c, int n,
                                    const LatticePoint& i, const LatticePoint& j,
                                    const Cube& region, const MatrixPowerOptions& opts) {
  if (n < 0) throw std::invalid_argument("matrix_power_entry: n must be >= 0");
  if (c < 0.0) throw std::invalid_argument("matrix_power_entry: c must be >= 0");
  if (!region.contains(i) || !region.contains(j))
    throw std::invalid_argument("matrix_power_entry: region too small to contain i, j");
  const int d = region.dim();
  const double eta = compute_eta(kernel, region);

  MatrixPowerEntry result;
  result.tail_estimate = tail_estimate(kernel, c, n, eta, d);
  if (n == 0) {
    result.value = (i == j) ? 1.0 : 0.0;
    result.padding = 0;
    return result;
  }

  double prev = std::numeric_limits<double>::quiet_NaN();
  int pad = n * opts.pad_width;
  for (int round = 0; round < opts.max_rounds; ++round, pad += opts.pad_width) {
    const Cube padded(d, region.half_width() + pad);
    const auto entries = power_entries(kernel, c, n, padded, std::span(&i, 1), std::span(&j, 1));
    const double value = entries[static_cast<std::size_t>(n)][0];
    if (round > 0 && std::abs(value - prev) < opts.tol) {
      result.value = value;
      result.padding = pad;
      return result;
    }
    prev = value;
  }
  result.value = prev;
  result.padding = pad - opts.pad_width;
  return result;
}

const BoundCheckRow& BoundReport::worst_row() const {
  if (rows.empty()) throw std::logic_error("BoundReport: no rows");
  const BoundCheckRow* worst = &rows.front();
  for (const auto& r : rows)
    if (r.ratio > worst->ratio) worst = &r;
  return *worst;
}

BoundReport verify_bound(const InteractionKernel& kernel, std::span<const double> c_values,
                         int n_max, const Cube& region, int threads,
                         const MatrixPowerOptions& opts) {
  if (n_max < 0) throw std::invalid_argument("verify_bound: n_max must be >= 0");
  const int d = region.dim();
  check_aij_hypothesis(kernel, d);

  BoundReport report;
  report.region = region;
  report.n_max = n_max;
  report.c_values.assign(c_values.begin(), c_values.end());
  report.eta = compute_eta(kernel, region);

  const std::size_t sites = region.size();
  const auto points = region.enumerate();

  // the bound depends only on (c, n, |j-i|)
  const int max_dist = 2 * d * region.half_width();
  std::vector<std::vector<std::vector<double>>> bounds(c_values.size());
  for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
    bounds[ci].resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
      auto& per_dist = bounds[ci][static_cast<std::size_t>(n)];
      per_dist.resize(static_cast<std::size_t>(max_dist) + 1);
      for (int dist = 0; dist <= max_dist; ++dist)
        per_dist[static_cast<std::size_t>(dist)] =
            matrix_power_bound({c_values[ci], n, d, dist, report.eta});
    }
  }

  // exact[ci][n][i * sites + j]
  std::vector<std::vector<std::vector<double>>> exact(
      c_values.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(n_max) + 1,
                                                        std::vector<double>(sites * sites, 0.0)));

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return;
    const std::span<const LatticePoint> sources(points.data() + begin, end - begin);
    for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
      int pad = n_max * opts.pad_width;
      std::vector<std::vector<double>> prev;
      for (int round = 0; round < opts.max_rounds; ++round, pad += opts.pad_width) {
        const Cube padded(d, region.half_width() + pad);
        auto entries = power_entries(kernel, c_values[ci], n_max, padded, sources, points);
        bool stable = !prev.empty();
        for (int n = 0; n <= n_max && stable; ++n) {
          const auto& cur = entries[static_cast<std::size_t>(n)];
          const auto& old = prev[static_cast<std::size_t>(n)];
          for (std::size_t t = 0; t < cur.size(); ++t)
            if (std::abs(cur[t] - old[t]) >= opts.tol) {
              stable = false;
              break;
            }
        }
        prev = std::move(entries);
        if (stable) break;
      }
      for (int n = 0; n <= n_max; ++n)
        for (std::size_t b = 0; b < sources.size(); ++b)
          for (std::size_t j = 0; j < sites; ++j)
            exact[ci][static_cast<std::size_t>(n)][(begin + b) * sites + j] =
                prev[static_cast<std::size_t>(n)][b * sites + j];
    }
  };

  const int worker_count = std::max(1, threads);
  if (worker_count == 1) {
    run_chunk(0, sites);
  } else {
    const std::size_t chunk =
        (sites + static_cast<std::size_t>(worker_count) - 1) / static_cast<std::size_t>(worker_count);
    std::vector<std::thread> pool;
    for (int w = 0; w < worker_count; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(sites, begin + chunk);
      pool.emplace_back(run_chunk, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  report.rows.reserve(c_values.size() * (static_cast<std::size_t>(n_max) + 1) * sites * sites);
  report.max_ratio = 0.0;
  for (std::size_t ci = 0; ci < c_values.size(); ++ci)
    for (int n = 0; n <= n_max; ++n)
      for (std::size_t i = 0; i < sites; ++i)
        for (std::size_t j = 0; j < sites; ++j) {
          const int dist = l1_distance(points[i], points[j]);
          const double ex = exact[ci][static_cast<std::size_t>(n)][i * sites + j];
          const double bd = bounds[ci][static_cast<std::size_t>(n)][static_cast<std::size_t>(dist)];
          const double ratio = safe_ratio(ex, bd);
          report.rows.push_back({i, j, n, c_values[ci], ex, bd, ratio});
          report.max_ratio = std::max(report.max_ratio, ratio);
        }
  report.pass = report.max_ratio <= 1.0;
  return report;
}

}  // namespace slat
