#pragma once

#include <span>

namespace petal::stats {

struct Summary {
  int count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double median = 0.0;
  double p10 = 0.0;
  double p95 = 0.0;
};

/// Linear interpolation between closest ranks, q in [0, 1].
double percentile(std::span<const double> values, double q);
Summary summarize(std::span<const double> values);

/// Rank correlation with average ranks for ties. Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of y on x.
double slope(std::span<const double> x, std::span<const double> y);

}  // namespace petal::stats
