#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "oracles.hpp"
#include "stable_lattice/kernel_estimates.hpp"

using namespace slat;

namespace {
LatticePoint pt(std::vector<int> c) { return LatticePoint{std::move(c)}; }
}  // namespace

TEST_CASE("matrix_power_bound closed forms") {
  const double e1 = std::exp(-1.0);
  // n = 0: geometric series e^{-dist} / (1 - e^{-1})
  CHECK(matrix_power_bound({0.0, 0, 1, 0, 0.5}) == doctest::Approx(1.0 / (1.0 - e1)).epsilon(1e-12));
  CHECK(matrix_power_bound({0.0, 0, 1, 3, 0.5}) ==
        doctest::Approx(std::exp(-3.0) / (1.0 - e1)).epsilon(1e-12));

  // n = 1, d = 1: (c+eta) sum_{k>=1} 2k e^{-k} = (c+eta) 2e^{-1}/(1-e^{-1})^2
  const double sum_2k = 2.0 * e1 / ((1.0 - e1) * (1.0 - e1));  // 1.8413471884...
  CHECK(matrix_power_bound({0.0, 1, 1, 1, 1.0}) == doctest::Approx(sum_2k).epsilon(1e-10));
  CHECK(matrix_power_bound({0.25, 1, 1, 1, 0.75}) == doctest::Approx(sum_2k).epsilon(1e-10));

  // k = 0 convention: for n >= 1 the k=0 term vanishes, so dist 0 and dist 1
  // sums differ exactly by the k>=1 tail starting point
  const double b0 = matrix_power_bound({0.0, 2, 1, 0, 1.0});
  const double b1 = matrix_power_bound({0.0, 2, 1, 1, 1.0});
  CHECK(b0 == doctest::Approx(b1).epsilon(1e-12));

  CHECK_THROWS_AS((void)matrix_power_bound({-1.0, 0, 1, 0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS((void)matrix_power_bound({0.0, -1, 1, 0, 0.5}), std::invalid_argument);
}

TEST_CASE("matrix_power_entry: identity and Kronecker cases") {
  const auto kernel = InteractionKernel::exp_decay(1.0);
  const Cube region(1, 5);
  // n = 0 is the Kronecker delta
  CHECK(matrix_power_entry(kernel, 0.7, 0, pt({2}), pt({2}), region).value == 1.0);
  CHECK(matrix_power_entry(kernel, 0.7, 0, pt({2}), pt({-1}), region).value == 0.0);

  // zero kernel, c = 1: (1 delta)^3 = delta
  const auto zero = InteractionKernel::exp_decay(0.0);
  CHECK(matrix_power_entry(zero, 1.0, 3, pt({0}), pt({0}), region).value ==
        doctest::Approx(1.0));
  CHECK(matrix_power_entry(zero, 1.0, 3, pt({0}), pt({1}), region).value ==
        doctest::Approx(0.0));

  CHECK_THROWS_AS(
      (void)matrix_power_entry(kernel, 0.0, 1, pt({9}), pt({0}), region),
      std::invalid_argument);
}

TEST_CASE("matrix_power_entry: n = 2 diagonal against the brute-force oracle") {
  const auto kernel = InteractionKernel::exp_decay(1.0);
  const Cube region(1, 3);
  const auto entry = matrix_power_entry(kernel, 0.0, 2, pt({0}), pt({0}), region);
  const double oracle = oracles::d1_exp_kernel_power2_00(1.0, 0.0, 60);
  CHECK(entry.value == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(entry.value == doctest::Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-6));
}

TEST_CASE("matrix_power_entry agrees with a dense matrix power on a wide region") {
  const auto kernel = InteractionKernel::exp_decay(0.8);
  const Cube region(1, 4);
  for (int n : {1, 2, 3}) {
    const auto entry = matrix_power_entry(kernel, 0.5, n, pt({-2}), pt({3}), region);
    const double oracle = oracles::d1_dense_power_entry(0.8, 0.5, n, -2, 3, 80);
    CHECK(entry.value == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("truncated powers are nondecreasing in the padding width") {
  const auto kernel = InteractionKernel::exp_decay(1.0);
  const Cube region(1, 2);
  double prev = -1.0;
  for (int pad : {2, 5, 10, 20}) {
    MatrixPowerOptions opts;
    opts.pad_width = pad;
    opts.max_rounds = 1;  // no convergence iteration: observe the raw truncation
    const double v = matrix_power_entry(kernel, 0.0, 3, pt({0}), pt({1}), region, opts).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("semigroup consistency of truncated powers") {
  const auto kernel = InteractionKernel::exp_decay(0.9);
  const Cube region(1, 3);
  // [(c d + a)^{3}]_{ij} = sum_k [(c d + a)^{2}]_{ik} [(c d + a)^{1}]_{kj},
  // checked against the dense oracle on a wide region
  const double direct = oracles::d1_dense_power_entry(0.9, 0.3, 3, 0, 1, 80);
  double composed = 0.0;
  for (int k = -80; k <= 80; ++k)
    composed += oracles::d1_dense_power_entry(0.9, 0.3, 2, 0, k, 80) *
                oracles::d1_dense_power_entry(0.9, 0.3, 1, k, 1, 80);
  CHECK(composed == doctest::Approx(direct).epsilon(1e-8));
  const auto entry = matrix_power_entry(kernel, 0.3, 3, pt({0}), pt({1}), region);
  CHECK(entry.value == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("verify_bound: zero kernel and small exp-decay regions pass") {
  const std::vector<double> cs{0.0, 1.0};
  const auto zero_report = verify_bound(InteractionKernel::exp_decay(0.0), cs, 3, Cube(1, 3));
  CHECK(zero_report.pass);
  CHECK(zero_report.max_ratio < 1.0);

  const auto report = verify_bound(InteractionKernel::exp_decay(1.0), cs, 3, Cube(1, 6));
  CHECK(report.pass);
  CHECK(report.max_ratio <= 1.0);
  CHECK(report.rows.size() == 2 * 4 * 13 * 13);

  // threads must not change the result
  const auto threaded = verify_bound(InteractionKernel::exp_decay(1.0), cs, 3, Cube(1, 6), 2);
  CHECK(threaded.max_ratio == report.max_ratio);
}

TEST_CASE("verify_bound rejects kernels violating the decay hypothesis") {
  const auto bad = InteractionKernel::custom_table({{pt({0}), pt({1}), 0.9}});
  const std::vector<double> cs{0.0};
  CHECK_THROWS_AS((void)verify_bound(bad, cs, 2, Cube(1, 2)), std::invalid_argument);
}

TEST_CASE("matrix_power_entry in d = 2 against direct summation") {
  const auto kernel = InteractionKernel::exp_decay(1.0);
  const Cube region(2, 2);
  for (const auto& [jx, jy] : {std::pair{0, 0}, std::pair{1, 1}, std::pair{-2, 1}}) {
    const auto entry =
        matrix_power_entry(kernel, 0.4, 2, pt({0, 0}), pt({jx, jy}), region);
    const double oracle = oracles::d2_exp_kernel_power2(1.0, 0.4, 0, 0, jx, jy, 45);
    CHECK(entry.value == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("custom-table kernels go through the pairwise power path") {
  // two-entry chain 0 -> 1 -> 2 with admissible weights
  const double w01 = 0.3, w12 = 0.2;
  const auto table = InteractionKernel::custom_table(
      {{pt({0}), pt({1}), w01}, {pt({1}), pt({2}), w12}});
  const Cube region(1, 2);
  CHECK(matrix_power_entry(table, 0.0, 2, pt({0}), pt({2}), region).value ==
        doctest::Approx(w01 * w12).epsilon(1e-12));
  CHECK(matrix_power_entry(table, 0.0, 2, pt({2}), pt({0}), region).value == 0.0);
}
