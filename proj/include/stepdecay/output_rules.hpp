#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stepdecay/problems.hpp"
#include "stepdecay/random.hpp"
#include "stepdecay/schedules.hpp"

namespace stepdecay {

struct Trajectory;

enum class OutputRuleKind { LastIterate, SampleInvEta, SampleEta, SuffixWeightedAverage };

struct OutputRule {
  OutputRuleKind kind = OutputRuleKind::LastIterate;
  double mu = 0.0;  // SuffixWeightedAverage only

  static OutputRule last_iterate() { return {OutputRuleKind::LastIterate, 0.0}; }
  static OutputRule sample_inv_eta() { return {OutputRuleKind::SampleInvEta, 0.0}; }
  static OutputRule sample_eta() { return {OutputRuleKind::SampleEta, 0.0}; }
  static OutputRule suffix_average(double mu) { return {OutputRuleKind::SuffixWeightedAverage, mu}; }

  bool samples() const {
    return kind == OutputRuleKind::SampleInvEta || kind == OutputRuleKind::SampleEta;
  }
  std::string name() const;

  friend bool operator==(const OutputRule&, const OutputRule&) = default;
};

OutputRuleKind output_rule_kind_from_string(std::string_view name);

/// Probabilities over iterations t = 1..T. Immutable once built.
class OutputDistribution {
 public:
  OutputDistribution() = default;
  explicit OutputDistribution(std::vector<double> probabilities);

  std::int64_t size() const { return static_cast<std::int64_t>(p_.size()); }
  /// P(t) for 1-based t.
  double p(std::int64_t t) const { return p_.at(static_cast<std::size_t>(t - 1)); }
  /// Total mass on [first, last], both 1-based and inclusive.
  double mass(std::int64_t first, std::int64_t last) const;
  std::span<const double> probabilities() const { return p_; }

  /// Inverse-CDF draw using exactly one uniform variate. Returns a 1-based t.
  std::int64_t sample(Rng& rng) const;

 private:
  std::vector<double> p_;
  std::vector<double> cdf_;
};

/// P_t proportional to 1/eta_t (SampleInvEta) or eta_t (SampleEta), formed in
/// log space so huge decay ranges do not overflow.
OutputDistribution output_weights(OutputRuleKind kind, const Schedule& schedule);
OutputDistribution output_weights(OutputRuleKind kind, const ScheduleSpec& spec, std::int64_t T);

/// First phase of the suffix average:
///   t* = max(0, floor(log_alpha(eta0 * alpha * A5 * T / log_alpha T))),
///   A5 = 2 mu alpha / (alpha - 1).
std::int64_t suffix_start_phase(double mu, double eta0, double alpha, std::int64_t T);
/// Same quantity written as floor(log_alpha(2 mu eta0 alpha^2 / (alpha - 1) * T / log_alpha T)).
std::int64_t suffix_start_phase_expanded(double mu, double eta0, double alpha, std::int64_t T);

/// Iterates of one phase, all taken with the same step size.
struct PhaseIterates {
  double eta = 0.0;
  std::vector<Vector> points;
};

/// sum_t eta_t sum_i x_i^t / sum_t eta_t |phase t|, over the given phases.
Vector eta_weighted_average(std::span<const PhaseIterates> phases);

/// Suffix average of a step-decay trajectory from phase max(1, t*) to N.
/// Throws std::domain_error when t* > N.
Vector suffix_average(const Trajectory& trajectory, double mu);

Vector select_output(const OutputRule& rule, const Trajectory& trajectory, Rng& rng);

/// sum_t P_t ||grad f(x_t)||^2 over the support iterates: the exact
/// expectation of the gradient metric under a sampling rule.
double expected_grad_norm2(const Trajectory& trajectory, OutputRuleKind kind);

}  // namespace stepdecay
