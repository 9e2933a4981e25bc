#pragma once

#include <cstddef>
#include <span>

namespace stepdecay {

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, so reductions over per-replication results are reproducible
/// regardless of how the replications were scheduled.
double pairwise_sum(std::span<const double> values);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;   // sample standard deviation (n - 1 denominator)
  double ci_half = 0.0;  // normal-approximation 95% half-width

  double ci_upper() const { return mean + ci_half; }
  double ci_lower() const { return mean - ci_half; }
};

SampleStats summarize(std::span<const double> values);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval for a binomial proportion at 95% confidence.
Interval wilson_interval(std::size_t successes, std::size_t trials);

inline constexpr double kZ95 = 1.959963984540054;

}  // namespace stepdecay
