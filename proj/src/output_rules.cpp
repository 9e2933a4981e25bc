#include "stepdecay/output_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stepdecay/optimizer.hpp"
#include "stepdecay/stats.hpp"

namespace stepdecay {

std::string OutputRule::name() const {
  switch (kind) {
    case OutputRuleKind::LastIterate: return "last";
    case OutputRuleKind::SampleInvEta: return "sample_inv_eta";
    case OutputRuleKind::SampleEta: return "sample_eta";
    case OutputRuleKind::SuffixWeightedAverage: {
      std::ostringstream os;
      os << "suffix_average(mu=" << mu << ")";
      return os.str();
    }
  }
  return "?";
}

OutputRuleKind output_rule_kind_from_string(std::string_view name) {
  if (name == "last") return OutputRuleKind::LastIterate;
  if (name == "sample_inv_eta") return OutputRuleKind::SampleInvEta;
  if (name == "sample_eta") return OutputRuleKind::SampleEta;
  if (name == "suffix_average") return OutputRuleKind::SuffixWeightedAverage;
  throw std::invalid_argument("unknown output rule '" + std::string(name) + "'");
}

OutputDistribution::OutputDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)), cdf_(p_.size()) {
  double run = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!(p_[i] >= 0.0)) throw std::invalid_argument("OutputDistribution: negative probability");
    run += p_[i];
    cdf_[i] = run;
  }
}

double OutputDistribution::mass(std::int64_t first, std::int64_t last) const {
  if (first < 1 || last > size() || first > last) {
    throw std::out_of_range("OutputDistribution::mass: bad range");
  }
  return pairwise_sum(std::span<const double>(p_).subspan(static_cast<std::size_t>(first - 1),
                                                          static_cast<std::size_t>(last - first + 1)));
}

std::int64_t OutputDistribution::sample(Rng& rng) const {
  if (p_.empty()) throw std::logic_error("OutputDistribution::sample: empty distribution");
  const double u = uniform01(rng) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(p_.size()) - 1);
  return static_cast<std::int64_t>(idx) + 1;
}

OutputDistribution output_weights(OutputRuleKind kind, const Schedule& schedule) {
  double sign = 0.0;
  if (kind == OutputRuleKind::SampleInvEta) {
    sign = -1.0;
  } else if (kind == OutputRuleKind::SampleEta) {
    sign = 1.0;
  } else {
    throw std::invalid_argument("output_weights: rule does not define a sampling distribution");
  }
  const std::int64_t T = schedule.horizon();
  std::vector<double> logw(static_cast<std::size_t>(T));
  double top = -std::numeric_limits<double>::infinity();
  for (std::int64_t t = 1; t <= T; ++t) {
    const double lw = sign * schedule.log_step_size(t);
    logw[static_cast<std::size_t>(t - 1)] = lw;
    top = std::max(top, lw);
  }
  for (auto& lw : logw) lw = std::exp(lw - top);
  const double total = pairwise_sum(logw);
  for (auto& w : logw) w /= total;
  return OutputDistribution(std::move(logw));
}

OutputDistribution output_weights(OutputRuleKind kind, const ScheduleSpec& spec, std::int64_t T) {
  return output_weights(kind, Schedule(spec, T));
}

namespace {

void check_suffix_inputs(double mu, double eta0, double alpha, std::int64_t T) {
  if (!(mu > 0.0)) throw std::invalid_argument("suffix average: mu must be positive");
  if (!(eta0 > 0.0)) throw std::invalid_argument("suffix average: eta0 must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("suffix average: alpha must be > 1");
  if (T < 2) throw std::invalid_argument("suffix average: T must be >= 2");
}

std::int64_t floor_log(double arg, double alpha) {
  // Small tolerance so exact powers of alpha do not floor one short.
  const double v = std::log(arg) / std::log(alpha);
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(v + 1e-9)));
}

}  // namespace

std::int64_t suffix_start_phase(double mu, double eta0, double alpha, std::int64_t T) {
  check_suffix_inputs(mu, eta0, alpha, T);
  const double Td = static_cast<double>(T);
  const double log_a_T = std::log(Td) / std::log(alpha);
  const double A5 = 2.0 * mu * alpha / (alpha - 1.0);
  return floor_log(eta0 * alpha * A5 * Td / log_a_T, alpha);
}

std::int64_t suffix_start_phase_expanded(double mu, double eta0, double alpha, std::int64_t T) {
  check_suffix_inputs(mu, eta0, alpha, T);
  const double Td = static_cast<double>(T);
  const double log_a_T = std::log(Td) / std::log(alpha);
  return floor_log(2.0 * mu * eta0 * alpha * alpha / (alpha - 1.0) * Td / log_a_T, alpha);
}

Vector eta_weighted_average(std::span<const PhaseIterates> phases) {
  Vector sum;
  double weight = 0.0;
  for (const auto& ph : phases) {
    for (const auto& x : ph.points) {
      if (sum.size() == 0) sum = Vector::Zero(x.size());
      sum += ph.eta * x;
      weight += ph.eta;
    }
  }
  if (!(weight > 0.0)) throw std::invalid_argument("eta_weighted_average: no iterates");
  return sum / weight;
}

Vector suffix_average(const Trajectory& trajectory, double mu) {
  const ScheduleSpec& spec = trajectory.schedule;
  if (spec.kind != ScheduleKind::StepDecay) {
    throw std::invalid_argument("suffix_average: requires a step-decay trajectory");
  }
  if (trajectory.diverged) throw std::domain_error("suffix_average: trajectory diverged");
  const Schedule schedule(spec, trajectory.T);
  const std::int64_t t_star = suffix_start_phase(mu, spec.eta0, spec.alpha, trajectory.T);
  const std::int64_t N = schedule.phase_count();
  if (t_star > N) {
    throw std::domain_error("suffix_average: start phase t* = " + std::to_string(t_star) +
                            " exceeds N = " + std::to_string(N) +
                            " (T too small for this mu, eta0, alpha)");
  }
  const std::int64_t first_phase = std::max<std::int64_t>(1, t_star);
  std::vector<PhaseIterates> phases;
  std::vector<std::int64_t> missing;
  for (std::int64_t p = first_phase; p <= N; ++p) {
    PhaseIterates ph;
    const std::int64_t start = schedule.phase_start(p);
    ph.eta = schedule.step_size(start);
    for (std::int64_t t = start; t < start + schedule.phase_length(p); ++t) {
      if (trajectory.has_iterate(t)) {
        ph.points.push_back(trajectory.iterates.at(t));
      } else {
        missing.push_back(t);
      }
    }
    phases.push_back(std::move(ph));
  }
  if (!missing.empty()) {
    throw std::out_of_range("suffix_average: iterates not retained for t in [" +
                            std::to_string(missing.front()) + ", " +
                            std::to_string(missing.back()) + "] (" +
                            std::to_string(missing.size()) + " missing)");
  }
  return eta_weighted_average(phases);
}

Vector select_output(const OutputRule& rule, const Trajectory& trajectory, Rng& rng) {
  switch (rule.kind) {
    case OutputRuleKind::LastIterate:
      return trajectory.final_iterate;
    case OutputRuleKind::SampleInvEta:
    case OutputRuleKind::SampleEta: {
      const auto dist = output_weights(rule.kind, trajectory.schedule, trajectory.T);
      return trajectory.iterate(dist.sample(rng));
    }
    case OutputRuleKind::SuffixWeightedAverage:
      return suffix_average(trajectory, rule.mu);
  }
  throw std::logic_error("select_output: unknown rule");
}

double expected_grad_norm2(const Trajectory& trajectory, OutputRuleKind kind) {
  if (trajectory.diverged) return std::numeric_limits<double>::infinity();
  const auto dist = output_weights(kind, trajectory.schedule, trajectory.T);
  std::vector<double> terms(static_cast<std::size_t>(trajectory.T));
  for (std::int64_t t = 1; t <= trajectory.T; ++t) {
    terms[static_cast<std::size_t>(t - 1)] = dist.p(t) * trajectory.support_grad_norm2(t);
  }
  return pairwise_sum(terms);
}

}  // namespace stepdecay
