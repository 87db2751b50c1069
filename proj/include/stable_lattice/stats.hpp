#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Small statistics toolbox shared by the experiments and the test oracles:
// sample mean/standard error, ordinary least squares with a 95% slope CI,
// and the two-sample Kolmogorov-Smirnov distance.

namespace slat {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci_low() const { return slope - 1.96 * slope_se; }
  double slope_ci_high() const { return slope + 1.96 * slope_se; }
};

// OLS fit of y against x; slope_se from residual variance. Requires >= 3 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// sup-distance between the two empirical CDFs
double ks_statistic(std::span<const double> a, std::span<const double> b);

// asymptotic two-sample KS acceptance threshold at significance `level`
double ks_threshold(std::size_t n, std::size_t m, double level);

// true iff the two samples pass the KS test at `level` (i.e. D < threshold)
bool ks_same_distribution(std::span<const double> a, std::span<const double> b, double level);

}  // namespace slat
