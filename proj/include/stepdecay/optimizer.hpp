#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stepdecay/output_rules.hpp"
#include "stepdecay/problems.hpp"
#include "stepdecay/schedules.hpp"
#include "stepdecay/stats.hpp"

namespace stepdecay {

enum class RetentionPolicy { All, FinalPhasePlusSampled, SummariesOnly };

std::string_view to_string(RetentionPolicy policy);
RetentionPolicy retention_from_string(std::string_view name);

struct RunConfig {
  ProblemPtr problem;
  std::string problem_id;
  ScheduleSpec schedule;
  std::int64_t T = 0;
  Vector x0;
  std::vector<OutputRule> output_rules;
  std::uint64_t seed = 0;
  RetentionPolicy retention = RetentionPolicy::FinalPhasePlusSampled;
  /// When false only the last record carries f_value / grad_norm2 (the rest
  /// are NaN). Saves a full objective pass per step on large problems; the
  /// weighted gradient metrics need it on.
  bool track_every_step = true;
};

/// One row per iteration. Row t holds the step size used at step t and the
/// state *after* the update, i.e. x_{t+1}.
struct IterationRecord {
  std::int64_t t = 0;
  std::int64_t phase = 0;
  double eta = 0.0;
  double f_value = 0.0;
  double grad_norm2 = 0.0;
  std::optional<double> dist2_to_star;
};

struct Trajectory {
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  ScheduleSpec schedule;
  std::string problem_id;
  std::optional<double> f_star;

  IterationRecord initial;  // summary of x_1, t = 0
  std::vector<IterationRecord> records;
  /// Support iterates x_t (t in [1, T], the point the t-th gradient was
  /// queried at), as kept by the retention policy.
  std::map<std::int64_t, Vector> iterates;
  Vector final_iterate;  // x_{T+1}
  std::vector<std::pair<OutputRule, std::int64_t>> presampled;

  bool diverged = false;
  std::optional<std::int64_t> divergence_step;
  bool grad_norm_is_stochastic = false;
  std::vector<std::string> notes;

  bool has_iterate(std::int64_t t) const { return iterates.count(t) != 0; }
  /// Throws std::out_of_range naming t when the iterate was not retained.
  const Vector& iterate(std::int64_t t) const;
  /// ||grad f(x_t)||^2 and f(x_t) for support index t in [1, T].
  double support_grad_norm2(std::int64_t t) const;
  double support_f_value(std::int64_t t) const;
  std::optional<std::int64_t> presampled_index(const OutputRule& rule) const;
};

/// Algorithm-2 style run: x <- Proj(x - eta_t g_t) for t = 1..T. With an
/// unconstrained problem this is plain SGD. Deterministic in (config, seed).
Trajectory sgd_run(const RunConfig& config);

/// Columns t,phase,eta,f_value,grad_norm2,dist2_to_star.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

using TrajectoryMetric = std::function<double(const Trajectory&)>;

struct NamedMetric {
  std::string name;
  TrajectoryMetric fn;
};

/// final_f, final_grad_norm2, plus final_gap / final_dist2 when f* / x* are
/// known, weighted gradient metrics, and one entry per suffix rule.
std::vector<NamedMetric> default_metrics(const RunConfig& config);

struct ReplicationSummary {
  std::size_t n_reps = 0;
  std::size_t n_diverged = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, SampleStats>> metrics;
  /// Raw per-replication values, diverged replications omitted.
  std::vector<std::pair<std::string, std::vector<double>>> values;

  const SampleStats& metric(std::string_view name) const;
  const std::vector<double>& metric_values(std::string_view name) const;
};

/// Runs n_reps copies with seeds derive_seed(base_seed, r). Work may be split
/// over `threads` workers; results are identical for any thread count.
ReplicationSummary replicate(const RunConfig& config, std::size_t n_reps, std::uint64_t base_seed,
                             unsigned threads = 1, std::vector<NamedMetric> metrics = {});

/// Runs job(0..n-1) across up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace stepdecay
