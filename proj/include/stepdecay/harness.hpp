#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepdecay/bounds.hpp"
#include "stepdecay/optimizer.hpp"
#include "stepdecay/stats.hpp"

namespace stepdecay {

struct RateFit {
  std::vector<std::int64_t> T;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual in log space
};

/// OLS of ln(error) on ln(T). Needs at least 3 points and positive errors.
RateFit rate_fit(std::span<const std::int64_t> T, std::span<const double> errors);

/// Powers of two 2^lo .. 2^hi.
std::vector<std::int64_t> power_of_two_grid(int lo, int hi);

enum class ErrorMetric {
  LastDist2,        // ||x_{T+1} - x*||^2
  LastGap,          // f(x_{T+1}) - f*
  SuffixGap,        // f(suffix average) - f*
  GradNorm2InvEta,  // sum_t P_t ||grad f(x_t)||^2, P ~ 1/eta
  GradNorm2Eta,     // same with P ~ eta
};

std::string_view to_string(ErrorMetric metric);
ErrorMetric error_metric_from_string(std::string_view name);

using ScheduleFamily = std::function<ScheduleSpec(std::int64_t T)>;

struct RateExperiment {
  ProblemPtr problem;
  std::string problem_id;
  Vector x0;
  ScheduleFamily schedule;
  ErrorMetric metric = ErrorMetric::LastDist2;
  double suffix_mu = 0.0;  // SuffixGap only
  std::vector<std::int64_t> T_grid;
  std::size_t n_reps = 1;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
  std::optional<BoundId> bound;
  BoundInputs bound_inputs;  // T is filled in per grid point
  double max_divergence_fraction = 0.1;
};

struct RateCell {
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  ScheduleSpec schedule;
  SampleStats error;
  std::size_t n_diverged = 0;
  std::optional<BoundReport> bound;

  /// CI upper edge at or below the bound. True when no bound is attached.
  bool dominated() const { return !bound || error.ci_upper() <= bound->value; }
};

struct RateResult {
  std::vector<RateCell> cells;
  RateFit fit;

  bool all_dominated() const;
};

/// Cell seeds are derive_seed(base_seed, T); replication r of a cell uses
/// derive_seed(cell_seed, r). Throws std::runtime_error when more than
/// max_divergence_fraction of a cell's runs diverge.
RateResult run_rate_experiment(const RateExperiment& exp);

/// Columns T,seed,n_reps,n_diverged,mean,stddev,ci_half,ci_upper,bound,ratio.
void write_rate_csv(std::ostream& out, const RateResult& result);

struct ExceedanceResult {
  std::int64_t T = 0;
  double alpha = 0.0;
  double delta = 0.0;
  double threshold = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_exceeding = 0;
  double frequency = 0.0;
  Interval ci;
  std::vector<double> final_values;  // f(x_final) per trial, in trial order

  /// Fraction of trials with f(x_final) >= level.
  double frequency_at(double level) const;
};

/// n_trials projected-SGD runs on the adversarial instance from x_1 = 0 with
/// eta0 = 1. Trial r uses seed derive_seed(base_seed, r).
ExceedanceResult lower_bound_trial(std::int64_t T, double alpha, double delta, std::size_t n_trials,
                                   std::uint64_t base_seed, unsigned threads = 1);

/// Empirical q-quantile (type 7 interpolation). values need not be sorted.
double empirical_quantile(std::vector<double> values, double q);

struct RobustnessFamily {
  std::string name;
  std::function<ScheduleSpec(double eta0)> make;
};

struct RobustnessSweep {
  ProblemPtr problem;
  Vector x0;
  std::vector<RobustnessFamily> families;
  std::vector<double> eta0_grid;
  std::int64_t T = 0;
  std::size_t n_reps = 1;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
  double tolerance = 1.1;
};

struct RobustnessRow {
  std::string family;
  double eta0 = 0.0;
  double mean_loss = 0.0;  // +inf when any replication diverged
  bool in_region = false;
};

struct RobustnessFamilySummary {
  std::string family;
  double min_loss = 0.0;
  double best_eta0 = 0.0;
  double region_lo = 0.0;
  double region_hi = 0.0;
  /// log10(region_hi / region_lo) over the grid points within tolerance x min.
  double width_log10 = 0.0;
};

struct RobustnessResult {
  std::vector<RobustnessRow> rows;
  std::vector<RobustnessFamilySummary> families;

  const RobustnessFamilySummary& family(std::string_view name) const;
};

/// Every (family, eta0) cell shares the same replication seeds so the
/// comparison between families is paired.
RobustnessResult robustness_sweep(const RobustnessSweep& sweep);

/// Columns family,eta0,mean_loss,in_region.
void write_robustness_csv(std::ostream& out, const RobustnessResult& result);

/// count log-spaced points from 10^lo to 10^hi.
std::vector<double> log10_grid(double lo, double hi, std::size_t count);

}  // namespace stepdecay
