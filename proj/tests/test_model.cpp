#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "oracles.hpp"
#include "stable_lattice/model.hpp"

using namespace slat;

namespace {
LatticePoint pt(std::vector<int> c) { return LatticePoint{std::move(c)}; }
}  // namespace

TEST_CASE("lattice sphere counts match the closed forms") {
  for (int l = 1; l <= 10; ++l) {
    CHECK(count_at_l1_distance(1, l) == 2.0);
    CHECK(count_at_l1_distance(2, l) == 4.0 * l);
    CHECK(count_at_l1_distance(3, l) == 4.0 * l * l + 2.0);
  }
  CHECK(count_at_l1_distance(2, 0) == 1.0);
}

TEST_CASE("compute_eta: exp-decay kernel against the partial-sum oracle") {
  const Cube region(1, 10);
  const double eta1 = compute_eta(InteractionKernel::exp_decay(1.0), region);
  CHECK(eta1 == doctest::Approx(oracles::d1_exp_kernel_row_sum(1.0, 200)).epsilon(1e-12));
  CHECK(eta1 == doctest::Approx(2.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));  // 1.1639534...

  const double eta_half = compute_eta(InteractionKernel::exp_decay(0.5), region);
  CHECK(eta_half == doctest::Approx(0.5 * eta1).epsilon(1e-12));

  CHECK(compute_eta(InteractionKernel::exp_decay(0.0), region) == 0.0);

  // d = 2 closed form: (1 + 2/(e-1))^2 - 1
  const Cube region2(2, 4);
  const double one_dim = 1.0 + 2.0 / (std::exp(1.0) - 1.0);
  CHECK(compute_eta(InteractionKernel::exp_decay(1.0), region2) ==
        doctest::Approx(one_dim * one_dim - 1.0).epsilon(1e-10));

  // normalized kernel: row sums collapse to beta
  CHECK(compute_eta(InteractionKernel::exp_decay(1.0, true), region) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compute_eta upper-bounds finite partial row sums") {
  const auto kernel = InteractionKernel::exp_decay(0.8);
  const Cube region(1, 8);
  const double eta = compute_eta(kernel, region);
  for (std::size_t i = 0; i < region.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < region.size(); ++j)
      row += kernel.weight(region.site_at(i), region.site_at(j));
    CHECK(row <= eta * (1.0 + 1e-12));
  }
}

TEST_CASE("drift evaluation and ratio") {
  const auto lin = SiteDrift::poly(0.5, 0.0, 0);
  CHECK(drift_eval(lin, 2.0) == doctest::Approx(-3.0));
  CHECK(drift_eval(lin, 0.0) == 0.0);
  CHECK(drift_ratio(lin, 7.0) == doctest::Approx(-1.5));
  CHECK(drift_ratio(lin, 0.0) == doctest::Approx(-1.5));  // J'(0) branch

  const auto cubic = SiteDrift::poly(0.0, 1.0, 1);
  CHECK(drift_eval(cubic, 1.0) == doctest::Approx(-2.0));
  CHECK(drift_ratio(cubic, 2.0) == doctest::Approx(-5.0));  // J(2)/2 = (-2-8)/2

  // any drift at 0
  CHECK(drift_eval(SiteDrift::linear(0.7), 0.0) == 0.0);
  CHECK(drift_eval(cubic, 0.0) == 0.0);
}

TEST_CASE("drift_ratio is nonpositive and continuous across the threshold") {
  auto s = rng::Stream::keyed(3, 1);
  const auto drifts = {SiteDrift::poly(0.5, 0.3, 2), SiteDrift::poly(0.0, 1.0, 1),
                       SiteDrift::linear(0.25)};
  for (const auto& d : drifts) {
    for (int k = 0; k < 300; ++k) {
      const double x = 20.0 * (s.next_uniform() - 0.5);
      CHECK(drift_ratio(d, x) <= 0.0);
    }
    const double theta = 1e-12;
    const double jump = std::abs(drift_ratio(d, theta * 1.001) - drift_ratio(d, 0.0));
    CHECK(jump <= 1e-10);
  }
}

TEST_CASE("monotone drift: (J(x)-J(y))(x-y) <= 0 on random pairs") {
  auto s = rng::Stream::keyed(4, 1);
  const auto d = SiteDrift::poly(0.2, 0.7, 1);
  for (int k = 0; k < 1000; ++k) {
    const double x = 10.0 * (s.next_uniform() - 0.5);
    const double y = 10.0 * (s.next_uniform() - 0.5);
    CHECK((drift_eval(d, x) - drift_eval(d, y)) * (x - y) <= 1e-12);
  }
}

TEST_CASE("linear interaction: examples") {
  const auto spec = make_model(1, 2, InteractionKernel::exp_decay(1.0), SiteDrift::poly(0.5, 0, 0),
                               InteractionKind::linear);
  std::vector<double> zeros(spec.sites(), 0.0);
  for (double v : interaction_eval(spec, zeros)) CHECK(v == 0.0);

  // state with a single 1 at the origin: I_i = e^{-|i|} for i != 0, I_0 = 0
  std::vector<double> state(spec.sites(), 0.0);
  state[spec.cube.index_of(pt({0}))] = 1.0;
  const auto iv = interaction_eval(spec, state);
  for (int i = -2; i <= 2; ++i) {
    const double expect = (i == 0) ? 0.0 : std::exp(-std::abs(i));
    CHECK(iv[spec.cube.index_of(pt({i}))] == doctest::Approx(expect).epsilon(1e-14));
  }

  std::vector<double> wrong_size(spec.sites() + 1, 0.0);
  CHECK_THROWS_AS((void)interaction_eval(spec, wrong_size), std::invalid_argument);
}

TEST_CASE("log-exp interaction: column-stochastic kernel required, zero maps to zero") {
  // unnormalized kernel: column sums != 1, construction must fail
  CHECK_THROWS_AS((void)make_model(1, 2, InteractionKernel::exp_decay(1.0),
                                   SiteDrift::poly(0.5, 0, 0), InteractionKind::log_exp),
                  std::invalid_argument);

  const auto spec = make_model(1, 3, InteractionKernel::exp_decay(1.0, true),
                               SiteDrift::poly(0.5, 0, 0), InteractionKind::log_exp);
  std::vector<double> zeros(spec.sites(), 0.0);
  for (double v : interaction_eval(spec, zeros)) CHECK(std::abs(v) < 1e-14);

  // overflow safety of the log-sum-exp form
  std::vector<double> huge(spec.sites(), 800.0);
  for (double v : interaction_eval(spec, huge)) CHECK(std::isfinite(v));
}

TEST_CASE("Lipschitz property: weighted bound for linear interactions") {
  auto s = rng::Stream::keyed(6, 2);
  const auto spec = make_model(1, 3, InteractionKernel::exp_decay(1.0),
                               SiteDrift::poly(0.5, 0, 0), InteractionKind::linear);
  const std::size_t n = spec.sites();
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 6.0 * (s.next_uniform() - 0.5);
      y[i] = 6.0 * (s.next_uniform() - 0.5);
    }
    const auto ix = interaction_eval(spec, x);
    const auto iy = interaction_eval(spec, y);
    for (std::size_t i = 0; i < n; ++i) {
      double bound = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        bound += spec.kernel.weight(spec.cube.site_at(j), spec.cube.site_at(i)) *
                 std::abs(x[j] - y[j]);
      CHECK(std::abs(ix[i] - iy[i]) <= bound + 1e-12);
    }
  }
}

TEST_CASE("Lipschitz property: sup-norm bound for the log-exp interaction") {
  // For log-exp the softmax weights sum to one (column-stochastic kernel plus
  // exterior mass), so the map is 1-Lipschitz in the sup norm. The
  // componentwise weighted bound of the linear kind does NOT hold here: the
  // local weight a_ji e^{x_j} / sum can exceed a_ji by arbitrary amounts.
  auto s = rng::Stream::keyed(7, 2);
  const auto spec = make_model(1, 3, InteractionKernel::exp_decay(1.0, true),
                               SiteDrift::poly(0.5, 0, 0), InteractionKind::log_exp);
  const std::size_t n = spec.sites();
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x(n), y(n);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 6.0 * (s.next_uniform() - 0.5);
      y[i] = 6.0 * (s.next_uniform() - 0.5);
      sup = std::max(sup, std::abs(x[i] - y[i]));
    }
    const auto ix = interaction_eval(spec, x);
    const auto iy = interaction_eval(spec, y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ix[i] - iy[i]) <= sup + 1e-12);
  }
}

TEST_CASE("validate_assumptions: passing and failing witnesses") {
  const auto good = make_model(1, 3, InteractionKernel::exp_decay(0.8),
                               SiteDrift::poly(0.5, 1.0, 1), InteractionKind::linear);
  CHECK(validate_assumptions(good).all_pass());

  // J(x) = x fails monotonicity
  const auto bad_drift =
      make_model(1, 2, InteractionKernel::exp_decay(0.5),
                 SiteDrift::custom([](double x) { return x; }, [](double) { return 1.0; }, 1.0,
                                   1.0, std::nullopt),
                 InteractionKind::linear);
  const auto r1 = validate_assumptions(bad_drift);
  CHECK_FALSE(r1.all_pass());
  bool found = false;
  for (const auto& c : r1.checks)
    if (c.name == "drift_monotone") {
      CHECK_FALSE(c.pass);
      CHECK_FALSE(c.witness.empty());
      found = true;
    }
  CHECK(found);

  // weight(0,1) = 0.9 > e^{-1} fails the decay hypothesis with that witness
  const auto bad_kernel = make_model(
      1, 2, InteractionKernel::custom_table({{pt({0}), pt({1}), 0.9}}),
      SiteDrift::poly(0.5, 0, 0), InteractionKind::linear);
  const auto r2 = validate_assumptions(bad_kernel);
  CHECK_FALSE(r2.all_pass());
  for (const auto& c : r2.checks)
    if (c.name == "kernel_decay_bound") {
      CHECK_FALSE(c.pass);
      CHECK(c.witness.find("0.9") != std::string::npos);
    }
}

TEST_CASE("finite-range kernels: mass, validation, and decay witness") {
  // w = 0.1 within l1 distance 2: eta = 0.1 * (2 + 2) in d = 1, tail 0
  const auto ok = InteractionKernel::finite_range(2, 0.1);
  CHECK(compute_eta(ok, Cube(1, 5)) == doctest::Approx(0.4));
  CHECK(ok.tail_mass(1) == 0.0);
  const auto spec_ok =
      make_model(1, 3, ok, SiteDrift::poly(0.5, 0, 0), InteractionKind::linear);
  CHECK(validate_assumptions(spec_ok).all_pass());

  // 0.2 > e^{-2} = 0.135: the decay check must fail at distance 2
  const auto bad = InteractionKernel::finite_range(2, 0.2);
  const auto spec_bad =
      make_model(1, 3, bad, SiteDrift::poly(0.5, 0, 0), InteractionKind::linear);
  const auto report = validate_assumptions(spec_bad);
  CHECK_FALSE(report.all_pass());
  for (const auto& c : report.checks)
    if (c.name == "kernel_decay_bound") {
      CHECK_FALSE(c.pass);
      CHECK(c.witness.find("distance 2") != std::string::npos);
    }
}

TEST_CASE("compute_eta takes the max of row and column sup-sums (custom table)") {
  // asymmetric table: column mass at site 1 dominates every row mass
  const auto kernel = InteractionKernel::custom_table(
      {{pt({0}), pt({1}), 0.3}, {pt({2}), pt({1}), 0.2}});
  CHECK(compute_eta(kernel, Cube(1, 2)) == doctest::Approx(0.5));
}

TEST_CASE("model constants: eta, c, delta") {
  const auto spec = make_model(1, 10, InteractionKernel::exp_decay(0.5),
                               SiteDrift::poly(0.5, 0, 0), InteractionKind::linear);
  CHECK(spec.eta == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));
  CHECK(spec.c == doctest::Approx(1.5));
  CHECK(spec.delta == doctest::Approx(1.5 - 1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));
}
