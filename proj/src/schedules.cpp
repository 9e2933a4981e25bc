#include "stepdecay/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stepdecay {

namespace {

constexpr double kIntegralTol = 1e-9;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("schedule: " + what); }

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::InverseT: return "inverse_t";
    case ScheduleKind::InverseSqrtT: return "inverse_sqrt_t";
    case ScheduleKind::StepDecay: return "step_decay";
    case ScheduleKind::ExpDecay: return "exp_decay";
    case ScheduleKind::HazanKale: return "hazan_kale";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  for (auto k : {ScheduleKind::Constant, ScheduleKind::InverseT, ScheduleKind::InverseSqrtT,
                 ScheduleKind::StepDecay, ScheduleKind::ExpDecay, ScheduleKind::HazanKale}) {
    if (to_string(k) == name) return k;
  }
  bad("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(PhaseMode mode) {
  return mode == PhaseMode::Nonconvex ? "nonconvex" : "strongly_convex";
}

PhaseMode phase_mode_from_string(std::string_view name) {
  if (name == "nonconvex") return PhaseMode::Nonconvex;
  if (name == "strongly_convex") return PhaseMode::StronglyConvex;
  throw std::invalid_argument("unknown phase mode '" + std::string(name) + "'");
}

ScheduleSpec ScheduleSpec::constant(double eta0) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Constant;
  s.eta0 = eta0;
  return s;
}

ScheduleSpec ScheduleSpec::inverse_t(double eta0, double a0, double offset) {
  ScheduleSpec s;
  s.kind = ScheduleKind::InverseT;
  s.eta0 = eta0;
  s.a0 = a0;
  s.offset = offset;
  return s;
}

ScheduleSpec ScheduleSpec::inverse_sqrt_t(double eta0, double a0, double offset) {
  ScheduleSpec s = inverse_t(eta0, a0, offset);
  s.kind = ScheduleKind::InverseSqrtT;
  return s;
}

ScheduleSpec ScheduleSpec::step_decay(double eta0, double alpha, std::int64_t S,
                                      std::optional<std::int64_t> phases) {
  ScheduleSpec s;
  s.kind = ScheduleKind::StepDecay;
  s.eta0 = eta0;
  s.alpha = alpha;
  s.S = S;
  s.phases = phases;
  return s;
}

ScheduleSpec ScheduleSpec::exp_decay(double eta0, double beta) {
  ScheduleSpec s;
  s.kind = ScheduleKind::ExpDecay;
  s.eta0 = eta0;
  s.beta = beta;
  return s;
}

ScheduleSpec ScheduleSpec::hazan_kale(double eta0, std::int64_t T0) {
  ScheduleSpec s;
  s.kind = ScheduleKind::HazanKale;
  s.eta0 = eta0;
  s.T0 = T0;
  return s;
}

bool PhasePlan::ideal_is_integral() const {
  return std::abs(ideal_phase_count - std::round(ideal_phase_count)) < kIntegralTol;
}

std::int64_t PhasePlan::phase_length(std::int64_t phase) const {
  if (phase < 1 || phase > N) throw std::out_of_range("phase index out of range");
  return phase < N ? S : T - S * (N - 1);
}

PhasePlan phase_partition(double alpha, std::int64_t T, PhaseMode mode) {
  if (!(alpha > 1.0)) throw std::invalid_argument("phase_partition: alpha must be > 1");
  if (T < 2) throw std::invalid_argument("phase_partition: T must be >= 2");
  const double log_alpha_T = std::log(static_cast<double>(T)) / std::log(alpha);
  const double ideal = mode == PhaseMode::Nonconvex ? log_alpha_T / 2.0 : log_alpha_T;
  if (ideal < 1.0 - kIntegralTol) {
    throw std::domain_error("phase_partition: ideal phase count " + std::to_string(ideal) +
                            " < 1 (alpha too large for T; use a constant schedule)");
  }
  PhasePlan plan;
  plan.mode = mode;
  plan.T = T;
  plan.ideal_phase_count = ideal;
  plan.N = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(ideal)));
  if (plan.N > T) {
    throw std::domain_error("phase_partition: " + std::to_string(plan.N) + " phases do not fit in T = " +
                            std::to_string(T) + " steps");
  }
  plan.S = T / plan.N;
  return plan;
}

ScheduleSpec step_decay_for(double eta0, double alpha, std::int64_t T, PhaseMode mode) {
  const PhasePlan plan = phase_partition(alpha, T, mode);
  return ScheduleSpec::step_decay(eta0, alpha, plan.S, plan.N);
}

void validate(const ScheduleSpec& spec, std::int64_t T) {
  if (T < 1) bad("horizon T must be >= 1");
  if (!(spec.eta0 > 0.0) || !std::isfinite(spec.eta0)) bad("eta0 must be positive and finite");
  switch (spec.kind) {
    case ScheduleKind::Constant:
      break;
    case ScheduleKind::InverseT:
    case ScheduleKind::InverseSqrtT:
      if (!(spec.a0 > 0.0)) bad("a0 must be positive");
      if (!(spec.offset >= 0.0)) bad("offset must be nonnegative");
      break;
    case ScheduleKind::StepDecay: {
      if (!(spec.alpha > 1.0)) bad("alpha must be > 1");
      if (spec.S < 1) bad("S must be >= 1");
      if (spec.S > T) bad("S must not exceed T");
      const std::int64_t n = spec.phases.value_or(T / spec.S);
      if (n < 1) bad("phase count must be >= 1");
      if (spec.S * n > T) bad("S * N must not exceed T");
      break;
    }
    case ScheduleKind::ExpDecay:
      if (!(spec.beta > 0.0) || !(spec.beta < static_cast<double>(T))) bad("beta must lie in (0, T)");
      break;
    case ScheduleKind::HazanKale:
      if (spec.T0 < 1) bad("T0 must be >= 1");
      break;
  }
}

double step_size(const ScheduleSpec& spec, std::int64_t t, std::int64_t T) {
  return Schedule(spec, T).step_size(t);
}

double solve_tail_coefficient(double eta0, double eta_T, std::int64_t T, ScheduleKind kind) {
  if (!(eta0 > 0.0)) throw std::invalid_argument("solve_tail_coefficient: eta0 must be positive");
  if (!(eta_T > 0.0) || !(eta_T < eta0)) {
    throw std::invalid_argument("solve_tail_coefficient: need 0 < eta_T < eta0");
  }
  if (T < 1) throw std::invalid_argument("solve_tail_coefficient: T must be >= 1");
  const double Td = static_cast<double>(T);
  switch (kind) {
    case ScheduleKind::InverseT: return (eta0 / eta_T - 1.0) / Td;
    case ScheduleKind::InverseSqrtT: return (eta0 / eta_T - 1.0) / std::sqrt(Td);
    case ScheduleKind::ExpDecay: return Td * eta_T / eta0;
    default: break;
  }
  throw std::invalid_argument("solve_tail_coefficient: variant has no tail coefficient");
}

Schedule::Schedule(ScheduleSpec spec, std::int64_t T) : spec_(spec), T_(T) {
  validate(spec_, T_);
  if (spec_.kind == ScheduleKind::StepDecay) {
    step_phases_ = spec_.phases.value_or(T_ / spec_.S);
  } else if (spec_.kind == ScheduleKind::HazanKale) {
    step_phases_ = hazan_kale_interval(T_) + 1;
  }
}

void Schedule::check_t(std::int64_t t) const {
  if (t < 1 || t > T_) {
    throw std::out_of_range("schedule: iteration " + std::to_string(t) + " outside [1, " +
                            std::to_string(T_) + "]");
  }
}

// Zero-based doubling interval containing t; interval i covers
// [T0 (2^i - 1) + 1, T0 (2^(i+1) - 1)].
std::int64_t Schedule::hazan_kale_interval(std::int64_t t) const {
  std::int64_t i = 0;
  std::int64_t end = spec_.T0;
  std::int64_t len = spec_.T0;
  while (t > end) {
    len *= 2;
    end += len;
    ++i;
  }
  return i;
}

double Schedule::step_size(std::int64_t t) const {
  check_t(t);
  const double td = static_cast<double>(t);
  switch (spec_.kind) {
    case ScheduleKind::Constant: return spec_.eta0;
    case ScheduleKind::InverseT: return spec_.eta0 / (spec_.offset + spec_.a0 * td);
    case ScheduleKind::InverseSqrtT: return spec_.eta0 / (spec_.offset + spec_.a0 * std::sqrt(td));
    case ScheduleKind::StepDecay:
      return spec_.eta0 / std::pow(spec_.alpha, static_cast<double>(phase(t) - 1));
    case ScheduleKind::ExpDecay: {
      const double Td = static_cast<double>(T_);
      return spec_.eta0 * std::pow(spec_.beta / Td, td / Td);
    }
    case ScheduleKind::HazanKale:
      return std::ldexp(spec_.eta0, -static_cast<int>(hazan_kale_interval(t)));
  }
  return 0.0;
}

double Schedule::log_step_size(std::int64_t t) const {
  check_t(t);
  const double td = static_cast<double>(t);
  const double log_eta0 = std::log(spec_.eta0);
  switch (spec_.kind) {
    case ScheduleKind::StepDecay:
      return log_eta0 - static_cast<double>(phase(t) - 1) * std::log(spec_.alpha);
    case ScheduleKind::ExpDecay: {
      const double Td = static_cast<double>(T_);
      return log_eta0 + (td / Td) * std::log(spec_.beta / Td);
    }
    case ScheduleKind::HazanKale:
      return log_eta0 - static_cast<double>(hazan_kale_interval(t)) * std::log(2.0);
    default:
      return std::log(step_size(t));
  }
}

std::int64_t Schedule::phase(std::int64_t t) const {
  check_t(t);
  switch (spec_.kind) {
    case ScheduleKind::StepDecay: return std::min((t - 1) / spec_.S + 1, step_phases_);
    case ScheduleKind::HazanKale: return hazan_kale_interval(t) + 1;
    default: return 1;
  }
}

std::int64_t Schedule::phase_count() const { return step_phases_; }

std::int64_t Schedule::phase_start(std::int64_t p) const {
  if (p < 1 || p > step_phases_) throw std::out_of_range("schedule: phase index out of range");
  switch (spec_.kind) {
    case ScheduleKind::StepDecay: return (p - 1) * spec_.S + 1;
    case ScheduleKind::HazanKale: return spec_.T0 * ((std::int64_t{1} << (p - 1)) - 1) + 1;
    default: return 1;
  }
}

std::int64_t Schedule::phase_length(std::int64_t p) const {
  const std::int64_t start = phase_start(p);
  const std::int64_t next = p < step_phases_ ? phase_start(p + 1) : T_ + 1;
  return next - start;
}

}  // namespace stepdecay
