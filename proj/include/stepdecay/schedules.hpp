#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace stepdecay {

enum class ScheduleKind { Constant, InverseT, InverseSqrtT, StepDecay, ExpDecay, HazanKale };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Parameters of one step-size policy. Only the fields relevant to `kind`
/// are read; the rest are ignored.
///
///   Constant      eta0
///   InverseT      eta0 / (offset + a0 * t)
///   InverseSqrtT  eta0 / (offset + a0 * sqrt(t))
///   StepDecay     eta0 / alpha^(p - 1), p = min(floor((t - 1) / S) + 1, phases)
///   ExpDecay      eta0 * (beta / T)^(t / T)
///   HazanKale     eta0 / 2^i on the i-th doubling interval (lengths T0, 2 T0, ...)
///
/// `offset` defaults to 1; offset = 0 with a0 = 1 gives the pure eta0/sqrt(t)
/// and eta0/t policies.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Constant;
  double eta0 = 0.0;
  double a0 = 0.0;
  double offset = 1.0;
  double alpha = 0.0;
  std::int64_t S = 0;
  std::optional<std::int64_t> phases;  // StepDecay N; defaults to floor(T / S)
  double beta = 0.0;
  std::int64_t T0 = 0;

  static ScheduleSpec constant(double eta0);
  static ScheduleSpec inverse_t(double eta0, double a0, double offset = 1.0);
  static ScheduleSpec inverse_sqrt_t(double eta0, double a0, double offset = 1.0);
  static ScheduleSpec step_decay(double eta0, double alpha, std::int64_t S,
                                 std::optional<std::int64_t> phases = std::nullopt);
  static ScheduleSpec exp_decay(double eta0, double beta);
  static ScheduleSpec hazan_kale(double eta0, std::int64_t T0);
};

enum class PhaseMode { Nonconvex, StronglyConvex };

std::string_view to_string(PhaseMode mode);
PhaseMode phase_mode_from_string(std::string_view name);

/// Step-decay phase layout. The final phase absorbs the T - S*N leftover
/// iterations, so phase_length(N) = T - S*(N - 1).
struct PhasePlan {
  std::int64_t S = 0;
  std::int64_t N = 0;
  PhaseMode mode = PhaseMode::Nonconvex;
  std::int64_t T = 0;
  double ideal_phase_count = 0.0;

  bool ideal_is_integral() const;
  std::int64_t phase_length(std::int64_t phase) const;
};

/// N = round(log_alpha(T) / 2) for nonconvex mode, round(log_alpha(T)) for
/// strongly convex mode; S = floor(T / N). Throws std::domain_error when the
/// ideal phase count is below 1 (a constant schedule is the right tool then).
PhasePlan phase_partition(double alpha, std::int64_t T, PhaseMode mode);

/// A ScheduleSpec checked against a horizon T. All queries are pure.
class Schedule {
 public:
  Schedule(ScheduleSpec spec, std::int64_t T);

  const ScheduleSpec& spec() const { return spec_; }
  std::int64_t horizon() const { return T_; }

  double step_size(std::int64_t t) const;
  double log_step_size(std::int64_t t) const;

  /// 1-based phase index of iteration t. StepDecay phases and HazanKale
  /// doubling intervals are numbered from 1; every other policy is one phase.
  std::int64_t phase(std::int64_t t) const;
  std::int64_t phase_count() const;
  /// First iteration of a phase (1-based).
  std::int64_t phase_start(std::int64_t phase) const;
  std::int64_t phase_length(std::int64_t phase) const;

 private:
  void check_t(std::int64_t t) const;
  std::int64_t hazan_kale_interval(std::int64_t t) const;

  ScheduleSpec spec_;
  std::int64_t T_;
  std::int64_t step_phases_ = 1;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const ScheduleSpec& spec, std::int64_t T);

double step_size(const ScheduleSpec& spec, std::int64_t t, std::int64_t T);

/// Solves for the tail parameter that makes step_size(T) == eta_T:
/// a0 for InverseT / InverseSqrtT (offset 1), beta for ExpDecay.
double solve_tail_coefficient(double eta0, double eta_T, std::int64_t T, ScheduleKind kind);

/// StepDecay spec whose S and N come from phase_partition.
ScheduleSpec step_decay_for(double eta0, double alpha, std::int64_t T, PhaseMode mode);

}  // namespace stepdecay
