#include "stable_lattice/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slat {

MeanSe mean_se(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_se: empty sample");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {m, 0.0, 1};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(xs.size())), xs.size()};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit_line: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return f;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] <= sb[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_threshold(std::size_t n, std::size_t m, double level) {
  if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("ks_threshold: bad level");
  const double c = std::sqrt(-std::log(level / 2.0) / 2.0);
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

bool ks_same_distribution(std::span<const double> a, std::span<const double> b, double level) {
  return ks_statistic(a, b) < ks_threshold(a.size(), b.size(), level);
}

}  // namespace slat
