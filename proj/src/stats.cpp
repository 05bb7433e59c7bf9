#include "ugp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ugp/error.hpp"

namespace ugp::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw Error(ErrorCode::EmptyMask, "quantile of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> xs) {
  return {quantile(xs, 0.0), quantile(xs, 0.25), quantile(xs, 0.5), quantile(xs, 0.75), quantile(xs, 1.0)};
}

double rank_separation(std::span<const double> high, std::span<const double> low) {
  if (high.empty() || low.empty()) throw Error(ErrorCode::EmptyMask, "rank separation needs two samples");
  std::vector<double> sorted_low(low.begin(), low.end());
  std::sort(sorted_low.begin(), sorted_low.end());
  double wins = 0.0;
  for (double h : high) {
    const auto below = std::lower_bound(sorted_low.begin(), sorted_low.end(), h) - sorted_low.begin();
    const auto equal = std::upper_bound(sorted_low.begin(), sorted_low.end(), h) - sorted_low.begin() - below;
    wins += static_cast<double>(below) + 0.5 * static_cast<double>(equal);
  }
  return wins / (static_cast<double>(high.size()) * static_cast<double>(low.size()));
}

}  // namespace ugp::stats
