#include "stepdecay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stepdecay {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {  // the rounded mean of equal values can drift off them
    s.mean = *lo;
    return s;
  }
  s.mean = pairwise_sum(values) / static_cast<double>(s.n);
  if (s.n > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - s.mean;
      sq[i] = d * d;
    }
    s.stddev = std::sqrt(pairwise_sum(sq) / static_cast<double>(s.n - 1));
    s.ci_half = kZ95 * s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

Interval wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace stepdecay
