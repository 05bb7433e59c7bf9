#pragma once

#include <span>

namespace ugp::stats {

double mean(std::span<const double> xs);

/// Sample standard deviation over sqrt(n); 0 for fewer than two values.
double standard_error(std::span<const double> xs);

/// Linearly interpolated quantile at q in [0, 1] (position q * (n - 1) of
/// the sorted sample).
double quantile(std::span<const double> xs, double q);

struct Quartiles {
  double min{0}, q1{0}, median{0}, q3{0}, max{0};
};
Quartiles quartiles(std::span<const double> xs);

/// Probability that a random element of `high` exceeds a random element of
/// `low`, ties counting one half (the Mann-Whitney U statistic over |high||low|).
double rank_separation(std::span<const double> high, std::span<const double> low);

}  // namespace ugp::stats
