#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stepdecay/bounds.hpp"

using namespace stepdecay;

namespace {

BoundInputs nonconvex_example(std::int64_t T = 256) {
  BoundInputs in;
  in.T = T;
  in.eta0 = 1.0;
  in.alpha = 2.0;
  in.L = 1.0;
  in.f_max = 1.0;
  in.V2 = 1.0;
  return in;
}

BoundInputs strongly_convex_example(std::int64_t T = 256) {
  BoundInputs in;
  in.T = T;
  in.eta0 = 0.25;
  in.alpha = 2.0;
  in.mu = 1.0;
  in.L = 1.0;
  in.G2 = 1.0;
  in.R = 1.0;
  return in;
}

}  // namespace

TEST(Bounds, T31Example) {
  const auto r = nonconvex_bound(BoundId::T3_1, nonconvex_example());
  EXPECT_NEAR(r.constant("A"), 1.0 / (4.0 * std::numbers::ln2), 1e-15);
  EXPECT_NEAR(r.constant("A"), 0.36067, 1e-5);
  EXPECT_EQ(r.constant("B"), 1.0);
  EXPECT_NEAR(r.value, 0.2000, 5e-5);
}

TEST(Bounds, C31FixesAlpha) {
  auto in = nonconvex_example();
  in.alpha.reset();
  const auto r = nonconvex_bound(BoundId::C3_1, in);
  EXPECT_EQ(r.constant("alpha"), 2.0);
  in.alpha = 3.0;
  EXPECT_FALSE(nonconvex_bound(BoundId::C3_1, in).notes.empty());
}

TEST(Bounds, T33NoiseFree) {
  BoundInputs in;
  in.T = 10000;
  in.eta0 = 1.0;
  in.f_max = 1.0;
  in.L = 1.0;
  in.V2 = 0.0;
  EXPECT_NEAR(nonconvex_bound(BoundId::T3_3, in).value, 0.03, 1e-15);
}

TEST(Bounds, T32SqrtTMatchesGeneralFormShape) {
  auto in = nonconvex_example(1024);
  in.beta = 32.0;
  const auto general = nonconvex_bound(BoundId::T3_2, in);
  const auto special = nonconvex_bound(BoundId::T3_2_SqrtT, in);
  EXPECT_GT(general.value, 0.0);
  EXPECT_GT(special.value, 0.0);
  EXPECT_EQ(special.constant("beta"), 32.0);
}

TEST(Bounds, T41Example) {
  BoundInputs in;
  in.T = 256;
  in.D2 = 4.0;
  in.G2 = 1.0;
  in.eta0 = 1.0;
  in.alpha = 2.0;
  const auto avg = convex_bound(BoundId::T4_1_Avg, in);
  EXPECT_NEAR(avg.constant("A2"), 0.72135, 1e-5);
  EXPECT_EQ(avg.constant("B2"), 1.0);
  EXPECT_NEAR(avg.value, 0.3125, 1e-4);
  const auto last = convex_bound(BoundId::T4_1_Last, in);
  EXPECT_GE(last.value, avg.value);
  const auto appendix = convex_bound(BoundId::T4_1_LastAppendix, in);
  EXPECT_NEAR(appendix.value, last.value, 1e-15 * last.value);
  EXPECT_FALSE(appendix.notes.empty());
  in.D2 = 16.0;
  EXPECT_DOUBLE_EQ(convex_bound(BoundId::T4_1_Avg, in).constant("A2"), 4.0 * avg.constant("A2"));
}

TEST(Bounds, T41RejectsMissingInputs) {
  BoundInputs in;
  in.T = 256;
  in.G2 = 1.0;
  in.eta0 = 1.0;
  in.alpha = 2.0;
  try {
    convex_bound(BoundId::T4_1_Avg, in);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("D2"), std::string::npos);
  }
}

TEST(Bounds, T51Example) {
  const auto r = strongly_convex_bound(BoundId::T5_1, strongly_convex_example());
  EXPECT_NEAR(r.constant("A3"), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(r.value, 0.0354, 1e-4);
  const auto smooth = strongly_convex_bound(BoundId::T5_1_Smooth, strongly_convex_example());
  EXPECT_NEAR(smooth.value, r.value / 2.0, 1e-15);
}

TEST(Bounds, T51FirstTermVanishes) {
  const auto in = strongly_convex_example(1 << 14);
  const auto r = strongly_convex_bound(BoundId::T5_1, in);
  const double T = 1 << 14;
  const double first = *in.R / std::exp(r.constant("A3") * (T - 1) / std::log(T));
  EXPECT_LT(first, 1e-12);
}

TEST(Bounds, T54Constants) {
  const auto r = strongly_convex_bound(BoundId::T5_4, strongly_convex_example());
  EXPECT_EQ(r.constant("A5"), 4.0);
  EXPECT_NEAR(r.constant("C5"), 3.3664, 2e-4);
  EXPECT_DOUBLE_EQ(r.constant("C5"), 2.0 * (2.0 + 1.0 / 3.0) / (2.0 * std::numbers::ln2));
}

TEST(Bounds, StronglyConvexRejectsLargeStep) {
  auto in = strongly_convex_example();
  in.eta0 = 0.5;
  EXPECT_THROW(strongly_convex_bound(BoundId::T5_1, in), std::invalid_argument);
}

TEST(Bounds, RejectsSmallT) {
  auto in = nonconvex_example(1);
  EXPECT_THROW(nonconvex_bound(BoundId::T3_1, in), std::invalid_argument);
  EXPECT_NO_THROW(nonconvex_bound(BoundId::T3_1, nonconvex_example(2)));
}

TEST(Bounds, StepAboveOneOverLIsNoted) {
  auto in = nonconvex_example();
  in.eta0 = 1.5;
  EXPECT_FALSE(nonconvex_bound(BoundId::T3_1, in).notes.empty());
}

TEST(Bounds, NamesRoundTrip) {
  for (auto id : all_bound_ids()) EXPECT_EQ(bound_id_from_string(to_string(id)), id);
  EXPECT_THROW(bound_id_from_string("T9.9"), std::invalid_argument);
}

TEST(LowerBound, ThresholdExample) {
  const auto lb = lower_bound_threshold(0.25, 2.0, 65536);
  EXPECT_NEAR(lb.threshold, 5.09e-6, 0.01e-6);
  EXPECT_FALSE(lb.lemma_applicable);
  EXPECT_THROW(lower_bound_threshold(0.25, 2.0, 65536, LemmaMode::Strict), std::domain_error);
  // c >= 2 needs delta <= e^-18; with large T the lemma applies.
  const auto strict = lower_bound_threshold(std::exp(-20.0), 2.0, 1 << 20, LemmaMode::Strict);
  EXPECT_TRUE(strict.lemma_applicable);
}

TEST(LowerBound, MonotoneAndAlphaScaling) {
  double prev = INFINITY;
  for (double delta : {0.01, 0.05, 0.1, 0.25, 0.5, 0.9}) {
    const double v = lower_bound_threshold(delta, 2.0, 4096).threshold;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_NEAR(lower_bound_threshold(0.25, 4.0, 4096).threshold,
              lower_bound_threshold(0.25, 2.0, 4096).threshold / 2.0, 1e-18);
}

// Properties

TEST(BoundProperties, ConstantsReproduceFromInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(1.1, 10.0), eta(0.01, 0.49), g(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    BoundInputs in = strongly_convex_example(std::uniform_int_distribution<std::int64_t>(2, 1 << 20)(rng));
    in.alpha = alpha(rng);
    in.mu = g(rng);
    in.eta0 = eta(rng) / *in.mu;
    in.G2 = g(rng);
    const double a = *in.alpha, mu = *in.mu, e0 = *in.eta0, G2 = *in.G2;
    const auto t51 = strongly_convex_bound(BoundId::T5_1, in);
    ASSERT_EQ(t51.constant("A3"), 2.0 * mu * e0 * a * std::log(a) / (a - 1.0));
    const auto t53 = strongly_convex_bound(BoundId::T5_3, in);
    const auto t54 = strongly_convex_bound(BoundId::T5_4, in);
    const double A4 = e0 * a * std::log(a);
    ASSERT_EQ(t53.constant("A4"), A4);
    ASSERT_EQ(t53.constant("C4"), G2 * e0 * a);
    ASSERT_EQ(t53.constant("E4"), a * t53.constant("B4"));
    ASSERT_EQ(t53.constant("D4"), G2 / (2.0 * mu * std::log(a) * t53.constant("B4")));
    // T5.3 and T5.4 share B4 = 2 mu A4 / (alpha - 1).
    ASSERT_EQ(t53.constant("B4"), t54.constant("B4"));
    ASSERT_NEAR(t53.constant("B4"), 2.0 * mu * A4 / (a - 1.0), 1e-15 * t53.constant("B4"));
    ASSERT_EQ(t54.constant("A5"), 2.0 * mu * a / (a - 1.0));
    ASSERT_EQ(t54.constant("C5"), a * (2.0 + 1.0 / (a * a - 1.0)) * G2 / (2.0 * mu * std::log(a)));
  }
}

TEST(BoundProperties, PositiveAndFiniteOnRandomGrid) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> alpha(1.1, 10.0), frac(0.01, 0.49), pos(0.01, 10.0);
  for (int i = 0; i < 100; ++i) {
    BoundInputs in;
    in.T = std::uniform_int_distribution<std::int64_t>(2, 1 << 24)(rng);
    in.alpha = alpha(rng);
    in.mu = pos(rng);
    in.eta0 = frac(rng) / *in.mu;
    in.L = *in.mu + pos(rng);
    in.V2 = pos(rng);
    in.G2 = pos(rng);
    in.f_max = pos(rng);
    in.D2 = pos(rng);
    in.R = pos(rng);
    in.delta = frac(rng);
    in.beta = 1.0 + frac(rng) * static_cast<double>(in.T - 1);
    for (auto id : all_bound_ids()) {
      const auto r = evaluate_bound(id, in);
      ASSERT_TRUE(std::isfinite(r.value)) << to_string(id);
      ASSERT_GT(r.value, 0.0) << to_string(id);
      if (id == BoundId::T4_1_Last) ASSERT_GE(r.value, evaluate_bound(BoundId::T4_1_Avg, in).value);
    }
  }
}

TEST(BoundProperties, T31WithAlphaSqrtT) {
  // alpha = sqrt T: one shrink per sqrt T; the bound stays O(lnT/sqrtT) only through A.
  for (std::int64_t T : {256, 4096, 65536}) {
    auto in = nonconvex_example(T);
    in.alpha = std::sqrt(static_cast<double>(T));
    const auto r = nonconvex_bound(BoundId::T3_1, in);
    const double a = *in.alpha;
    EXPECT_NEAR(r.constant("A") * std::log(static_cast<double>(T)), 2.0 * (a - 1.0) / (a * a), 1e-12);
  }
}
