#pragma once

#include <cstddef>
#include <vector>

namespace zeroone::stats {

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|; 0 if either is empty.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
Interval wilson(std::size_t successes, std::size_t n, double z = 1.959963984540054);

bool overlap(const Interval& a, const Interval& b);

/// Linear-interpolation quantile (R type 7); throws on an empty sample.
double quantile(std::vector<double> xs, double q);

double mean(const std::vector<double>& xs);

}  // namespace zeroone::stats
