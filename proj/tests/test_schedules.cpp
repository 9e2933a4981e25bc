#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stepdecay/schedules.hpp"

using namespace stepdecay;

TEST(Schedules, StepDecayPhaseTwo) {
  // eta0 = 1, alpha = 2, S = 64: t = 70 sits in phase 2.
  const auto spec = ScheduleSpec::step_decay(1.0, 2.0, 64);
  EXPECT_EQ(step_size(spec, 70, 256), 0.5);
  EXPECT_EQ(Schedule(spec, 256).phase(70), 2);
}

TEST(Schedules, ExpDecayEndpoint) {
  const auto spec = ScheduleSpec::exp_decay(1.0, 16.0);
  EXPECT_NEAR(step_size(spec, 256, 256), 0.0625, 1e-15);
}

TEST(Schedules, TunedMnistConfigurationStartsAtEta0) {
  const auto spec = step_decay_for(0.5, 7.0, 60000, PhaseMode::Nonconvex);
  EXPECT_EQ(step_size(spec, 1, 60000), 0.5);
}

TEST(Schedules, ConstantAndPolynomialForms) {
  EXPECT_EQ(step_size(ScheduleSpec::constant(0.3), 17, 20), 0.3);
  EXPECT_DOUBLE_EQ(step_size(ScheduleSpec::inverse_t(1.0, 0.5), 4, 10), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(step_size(ScheduleSpec::inverse_sqrt_t(1.0, 1.0), 9, 10), 0.25);
  // offset 0, a0 1: pure eta0 / sqrt(t)
  EXPECT_DOUBLE_EQ(step_size(ScheduleSpec::inverse_sqrt_t(2.0, 1.0, 0.0), 16, 20), 0.5);
}

TEST(Schedules, HazanKaleIntervals) {
  // T0 = 4: [1,4] eta0, [5,12] eta0/2, [13,28] eta0/4, then truncated at T.
  const Schedule s(ScheduleSpec::hazan_kale(1.0, 4), 20);
  EXPECT_EQ(s.step_size(1), 1.0);
  EXPECT_EQ(s.step_size(4), 1.0);
  EXPECT_EQ(s.step_size(5), 0.5);
  EXPECT_EQ(s.step_size(12), 0.5);
  EXPECT_EQ(s.step_size(13), 0.25);
  EXPECT_EQ(s.step_size(20), 0.25);
  EXPECT_EQ(s.phase_count(), 3);
  EXPECT_EQ(s.phase_start(3), 13);
  EXPECT_EQ(s.phase_length(3), 8);
}

TEST(Schedules, PhasePartitionExamples) {
  const auto nc = phase_partition(2.0, 256, PhaseMode::Nonconvex);
  EXPECT_EQ(nc.S, 64);
  EXPECT_EQ(nc.N, 4);
  EXPECT_TRUE(nc.ideal_is_integral());
  const auto sc = phase_partition(2.0, 256, PhaseMode::StronglyConvex);
  EXPECT_EQ(sc.S, 32);
  EXPECT_EQ(sc.N, 8);
  const auto odd = phase_partition(4.0, 1000, PhaseMode::StronglyConvex);
  EXPECT_EQ(odd.N, 5);
  EXPECT_EQ(odd.S, 200);
  EXPECT_LE(odd.S * odd.N, 1000);
}

TEST(Schedules, PhasePartitionRejectsHugeAlpha) {
  EXPECT_THROW(phase_partition(1000.0, 100, PhaseMode::Nonconvex), std::domain_error);
  EXPECT_THROW(phase_partition(1.0, 100, PhaseMode::Nonconvex), std::invalid_argument);
  EXPECT_THROW(phase_partition(2.0, 1, PhaseMode::Nonconvex), std::invalid_argument);
}

TEST(Schedules, LastPhaseAbsorbsRemainder) {
  const auto plan = phase_partition(4.0, 1000, PhaseMode::StronglyConvex);
  EXPECT_EQ(plan.phase_length(5), 200);
  const auto plan2 = phase_partition(2.0, 1000, PhaseMode::StronglyConvex);  // log2 1000 = 9.97
  EXPECT_EQ(plan2.N, 10);
  EXPECT_EQ(plan2.S, 100);
  const auto plan3 = phase_partition(3.0, 1000, PhaseMode::StronglyConvex);  // 6.29 -> 6
  EXPECT_EQ(plan3.N, 6);
  EXPECT_EQ(plan3.S, 166);
  EXPECT_EQ(plan3.phase_length(6), 1000 - 166 * 5);
  const Schedule s(step_decay_for(1.0, 3.0, 1000, PhaseMode::StronglyConvex), 1000);
  EXPECT_EQ(s.phase(1000), 6);
  EXPECT_EQ(s.step_size(1000), 1.0 / std::pow(3.0, 5));
}

TEST(Schedules, SolveTailCoefficientExamples) {
  EXPECT_NEAR(solve_tail_coefficient(1.0, 0.01, 10000, ScheduleKind::InverseSqrtT), 0.99, 1e-15);
  EXPECT_NEAR(solve_tail_coefficient(1.0, 0.0625, 256, ScheduleKind::ExpDecay), 16.0, 1e-12);
  const double a0 = solve_tail_coefficient(1.0, 0.05, 60000, ScheduleKind::InverseT);
  EXPECT_NEAR(a0, 19.0 / 60000.0, 1e-18);
  EXPECT_NEAR(step_size(ScheduleSpec::inverse_t(1.0, a0), 60000, 60000), 0.05, 1e-12);
  EXPECT_THROW(solve_tail_coefficient(1.0, 1.0, 10, ScheduleKind::InverseT), std::invalid_argument);
  EXPECT_THROW(solve_tail_coefficient(1.0, 2.0, 10, ScheduleKind::ExpDecay), std::invalid_argument);
}

TEST(Schedules, RejectsOutOfRangeAndInvalidSpecs) {
  const auto spec = ScheduleSpec::constant(1.0);
  EXPECT_THROW(step_size(spec, 0, 10), std::out_of_range);
  EXPECT_THROW(step_size(spec, 11, 10), std::out_of_range);
  EXPECT_THROW(validate(ScheduleSpec::constant(0.0), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::step_decay(1.0, 1.0, 4), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::step_decay(1.0, 2.0, 0), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::exp_decay(1.0, 10.0), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::exp_decay(1.0, 0.0), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::hazan_kale(1.0, 0), 10), std::invalid_argument);
  EXPECT_THROW(validate(ScheduleSpec::inverse_t(1.0, -1.0), 10), std::invalid_argument);
}

// Properties

std::vector<ScheduleSpec> random_specs(std::mt19937_64& rng, std::int64_t T) {
  std::uniform_real_distribution<double> eta(1e-3, 10.0), alpha(1.1, 10.0), a0(1e-4, 5.0);
  std::uniform_int_distribution<std::int64_t> S(1, T), T0(1, T);
  std::uniform_real_distribution<double> frac(0.001, 0.999);
  return {ScheduleSpec::constant(eta(rng)),
          ScheduleSpec::inverse_t(eta(rng), a0(rng)),
          ScheduleSpec::inverse_sqrt_t(eta(rng), a0(rng)),
          ScheduleSpec::step_decay(eta(rng), alpha(rng), S(rng)),
          ScheduleSpec::exp_decay(eta(rng), frac(rng) * static_cast<double>(T)),
          ScheduleSpec::hazan_kale(eta(rng), T0(rng))};
}

TEST(ScheduleProperties, Monotone) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t T = std::uniform_int_distribution<std::int64_t>(2, 3000)(rng);
    for (const auto& spec : random_specs(rng, T)) {
      const Schedule s(spec, T);
      for (std::int64_t t = 1; t < T; ++t) {
        ASSERT_GE(s.step_size(t), s.step_size(t + 1)) << to_string(spec.kind) << " t=" << t;
        ASSERT_GT(s.step_size(t + 1), 0.0);
      }
    }
  }
}

TEST(ScheduleProperties, StepDecayPhaseConstancy) {
  for (double alpha : {1.5, 2.0, 3.0, 7.0}) {
    for (std::int64_t T : {64, 256, 1000, 4096}) {
      const auto spec = step_decay_for(1.0, alpha, T, PhaseMode::StronglyConvex);
      const Schedule s(spec, T);
      for (std::int64_t p = 1; p <= s.phase_count(); ++p) {
        const std::int64_t start = s.phase_start(p);
        const double eta = s.step_size(start);
        for (std::int64_t t = start; t < start + s.phase_length(p); ++t) ASSERT_EQ(s.step_size(t), eta);
        if (p < s.phase_count()) {
          ASSERT_EQ(s.phase_length(p), spec.S);
          const double ratio = s.step_size(s.phase_start(p + 1)) / eta;
          ASSERT_NEAR(ratio, 1.0 / alpha, 1e-15);
        }
      }
    }
  }
}

TEST(ScheduleProperties, ExpDecayEndpoint) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> eta(1e-3, 10.0), frac(0.01, 0.99);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t T = std::uniform_int_distribution<std::int64_t>(2, 100000)(rng);
    const double eta0 = eta(rng);
    const double beta = 1.0 + frac(rng) * static_cast<double>(T - 1);
    ASSERT_NEAR(step_size(ScheduleSpec::exp_decay(eta0, beta), T, T), eta0 * beta / static_cast<double>(T),
                1e-12 * eta0);
  }
}

TEST(ScheduleProperties, HazanKaleHalving) {
  for (std::int64_t T0 : {1, 3, 10}) {
    const Schedule s(ScheduleSpec::hazan_kale(0.7, T0), 5000);
    for (std::int64_t p = 1; p < s.phase_count(); ++p) {
      ASSERT_EQ(s.step_size(s.phase_start(p + 1)) / s.step_size(s.phase_start(p)), 0.5);
    }
  }
}

TEST(ScheduleProperties, PartitionRoundTrip) {
  for (double alpha : {1.2, 1.5, 2.0, 2.5, 4.0, 10.0}) {
    for (std::int64_t T = 2; T <= 5000; T += 7) {
      for (auto mode : {PhaseMode::Nonconvex, PhaseMode::StronglyConvex}) {
        PhasePlan plan;
        try {
          plan = phase_partition(alpha, T, mode);
        } catch (const std::domain_error&) {
          continue;
        }
        ASSERT_GE(plan.N, 1);
        ASSERT_GE(plan.S, 1);
        ASSERT_LE(plan.S * plan.N, T);
        ASSERT_LT(T - plan.S * plan.N, plan.N);  // remainder goes to the last phase
        std::int64_t total = 0;
        for (std::int64_t p = 1; p <= plan.N; ++p) total += plan.phase_length(p);
        ASSERT_EQ(total, T);
      }
    }
  }
}

TEST(ScheduleProperties, LogStepSizeAgrees) {
  std::mt19937_64 rng(9);
  for (const auto& spec : random_specs(rng, 500)) {
    const Schedule s(spec, 500);
    for (std::int64_t t = 1; t <= 500; t += 13) {
      ASSERT_NEAR(s.log_step_size(t), std::log(s.step_size(t)), 1e-12);
    }
  }
}
