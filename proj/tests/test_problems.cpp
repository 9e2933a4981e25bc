#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "stepdecay/data_io.hpp"
#include "stepdecay/problems.hpp"
#include "stepdecay/random.hpp"
#include "stepdecay/stats.hpp"

using namespace stepdecay;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

Vector central_difference(const StochasticProblem& p, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (p.value(a) - p.value(b)) / (2.0 * h);
  }
  return g;
}

Vector random_point(std::mt19937_64& rng, std::size_t d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = u(rng);
  return x;
}

// Mean and per-coordinate standard errors of n stochastic gradients at x.
struct GradientSample {
  Vector mean;
  Vector se;
  double spread = 0.0;  // E||g - mean||^2
};

GradientSample sample_gradients(const StochasticProblem& p, const Vector& x, int n, std::uint64_t seed,
                                const OracleContext& ctx = {}) {
  Rng rng(seed);
  const auto d = x.size();
  Vector sum = Vector::Zero(d), sum2 = Vector::Zero(d);
  Vector g(d);
  for (int i = 0; i < n; ++i) {
    p.stochastic_gradient_into(x, rng, ctx, g);
    sum += g;
    sum2 += g.cwiseProduct(g);
  }
  GradientSample s;
  s.mean = sum / n;
  const Vector var = (sum2 / n - s.mean.cwiseProduct(s.mean)) * (static_cast<double>(n) / (n - 1));
  s.se = (var / n).cwiseSqrt();
  s.spread = var.sum();
  return s;
}

std::shared_ptr<const SparseDataset> small_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  return std::make_shared<const SparseDataset>(synth_logistic_data(n, d, 2.0, seed));
}

}  // namespace

TEST(Quadratic, GradientExample) {
  const auto p = make_quadratic(1, {1.0}, vec({0.0}), NoiseModel::none());
  EXPECT_EQ(p->full_gradient(vec({3.0}))[0], 3.0);
  EXPECT_EQ(p->value(vec({3.0})), 4.5);
}

TEST(Quadratic, SpectrumExtremes) {
  const auto p = make_quadratic(2, {1.0, 4.0}, Vector::Zero(2), NoiseModel::none());
  EXPECT_EQ(*p->constants().L, 4.0);
  EXPECT_EQ(*p->constants().mu, 1.0);
  EXPECT_EQ(*p->constants().f_star, 0.0);
}

TEST(Quadratic, GaussianVarianceExample) {
  const auto p = make_quadratic(1, {1.0}, vec({0.0}), NoiseModel::gaussian(1.0));
  const auto s = sample_gradients(*p, vec({0.0}), 100000, 17);
  EXPECT_GE(s.spread, 0.95);
  EXPECT_LE(s.spread, 1.05);
  EXPECT_EQ(*p->constants().V2, 1.0);
}

TEST(Quadratic, RejectsBadInputs) {
  EXPECT_THROW(make_quadratic(2, {1.0, 0.0}, Vector::Zero(2), NoiseModel::none()), std::invalid_argument);
  EXPECT_THROW(make_quadratic(2, {1.0, -3.0}, Vector::Zero(2), NoiseModel::none()), std::invalid_argument);
  EXPECT_THROW(make_quadratic(2, {1.0}, Vector::Zero(2), NoiseModel::none()), std::invalid_argument);
  EXPECT_THROW(make_quadratic(1, {1.0}, vec({5.0}), NoiseModel::none(), FeasibleSet::box(1, -1, 1)),
               std::invalid_argument);
}

TEST(Quadratic, SecondMomentCertifiedOnBoundedSet) {
  // Box [-2, 2], x* = 0, L = 1, gaussian 1: G2 = 4 + 1.
  const auto p = make_quadratic(1, {1.0}, vec({0.0}), NoiseModel::gaussian(1.0), FeasibleSet::box(1, -2, 2));
  ASSERT_TRUE(p->constants().G2);
  EXPECT_DOUBLE_EQ(*p->constants().G2, 5.0);
  EXPECT_DOUBLE_EQ(*p->constants().D2, 16.0);
  const auto unbounded = make_quadratic(1, {1.0}, vec({0.0}), NoiseModel::gaussian(1.0));
  EXPECT_FALSE(unbounded->constants().G2);
}

TEST(Nonconvex, Examples) {
  const auto p = make_bounded_nonconvex(3);
  EXPECT_EQ(p->value(Vector::Zero(3)), 0.0);
  EXPECT_EQ(p->full_gradient(Vector::Zero(3)).norm(), 0.0);
  EXPECT_EQ(*p->constants().f_max, 3.0);
  EXPECT_EQ(*p->constants().L, 2.0);
  EXPECT_LT(p->value(Vector::Constant(3, 1e6)), 3.0);
}

TEST(Nonconvex, FiniteDifferenceAtPointSeven) {
  const auto p = make_bounded_nonconvex(1);
  const Vector x = vec({0.7});
  const double analytic = 2 * 0.7 / std::pow(1 + 0.49, 2);
  EXPECT_NEAR(p->full_gradient(x)[0], analytic, 1e-15);
  EXPECT_NEAR(central_difference(*p, x)[0], analytic, 1e-6);
}

TEST(Nonconvex, SmoothnessCertificate) {
  // |f''| <= 2 per coordinate: gradient differences bounded by 2 |dx|.
  const auto p = make_bounded_nonconvex(4);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vector a = random_point(rng, 4, 5.0), b = random_point(rng, 4, 5.0);
    ASSERT_LE((p->full_gradient(a) - p->full_gradient(b)).norm(), 2.0 * (a - b).norm() + 1e-12);
  }
}

TEST(Logistic, LossAtZeroIsLn2) {
  const auto p = make_logistic(small_data(50, 5, 1), 0.0, 1);
  EXPECT_NEAR(p->value(Vector::Zero(5)), std::log(2.0), 1e-15);
}

TEST(Logistic, FullGradientIsMeanOfSingleRowGradients) {
  const auto data = small_data(40, 6, 2);
  const double lambda = 1e-3;
  const auto p = make_logistic(data, lambda, 1);
  std::mt19937_64 rng(4);
  const Vector x = random_point(rng, 6, 1.0);
  Vector avg = Vector::Zero(6);
  for (const auto& row : data->rows) {
    auto one = std::make_shared<SparseDataset>();
    one->d = data->d;
    one->rows = {row};
    avg += make_logistic(one, lambda, 1)->full_gradient(x);
  }
  avg /= static_cast<double>(data->n());
  EXPECT_LT((avg - p->full_gradient(x)).norm(), 1e-14);
}

TEST(Logistic, FullBatchMinibatchIsExactGradient) {
  const auto data = small_data(30, 4, 3);
  const auto p = make_logistic(data, 1e-4, 30);
  Rng rng(1);
  const Vector x = Vector::Constant(4, 0.3);
  EXPECT_LT((p->stochastic_gradient(x, rng) - p->full_gradient(x)).norm(), 1e-14);
}

TEST(Logistic, FiniteDifferenceCheck) {
  const auto p = make_logistic(small_data(1000, 10, 7), 1e-4, 1);
  std::mt19937_64 rng(8);
  const Vector x = random_point(rng, 10, 1.0);
  const Vector g = p->full_gradient(x);
  const Vector fd = central_difference(*p, x);
  EXPECT_LE((g - fd).norm(), 1e-5 * g.norm());
}

TEST(Logistic, Constants) {
  const auto data = small_data(100, 5, 9);
  const auto p = make_logistic(data, 0.01, 10, FeasibleSet::ball(Vector::Zero(5), 3.0));
  EXPECT_DOUBLE_EQ(*p->constants().mu, 0.01);
  EXPECT_DOUBLE_EQ(*p->constants().L, 0.01 + data->max_row_norm2() / 4.0);
  EXPECT_TRUE(p->constants().G2);
}

TEST(Logistic, RejectsBadInput) {
  auto bad = std::make_shared<SparseDataset>(*small_data(10, 3, 1));
  bad->rows[2].label = 0;
  EXPECT_THROW(make_logistic(bad, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(make_logistic(std::make_shared<SparseDataset>(), 0.0, 1), std::invalid_argument);
  EXPECT_THROW(make_logistic(small_data(10, 3, 1), 0.0, 11), std::invalid_argument);
}

TEST(Adversarial, NoisyPhaseExample) {
  const auto p = make_adversarial_lower_bound(65536, 2.0);
  EXPECT_EQ(p->noisy_phase(), 13);
  EXPECT_EQ(p->noisy_phase_step(), 1.0 / 4096.0);
  EXPECT_EQ(p->noisy_phase_step(), 16.0 / 65536.0);  // log2 T / T
  EXPECT_EQ(p->plan().S, 4096);
  EXPECT_EQ(p->plan().N, 16);
  EXPECT_NEAR(std::pow(1.0 - p->noisy_phase_step(), 4096), 0.36784, 1e-4);
  EXPECT_NEAR(std::pow(1.0 - p->noisy_phase_step(), 4096), std::exp(-1.0), 1e-4);
  EXPECT_EQ(p->nu(4096), 1.0);
  EXPECT_LE(p->noise_bound(), std::exp(1.0));
  EXPECT_NEAR(adversarial_phase_ideal(65536, 2.0), 13.0, 1e-12);
}

TEST(Adversarial, OracleOutsideNoisyPhaseIsExact) {
  const auto p = make_adversarial_lower_bound(65536, 2.0);
  Rng rng(3);
  for (std::int64_t phase : {1, 5, 12, 14, 16}) {
    OracleContext ctx{1, phase, 1, 1.0};
    EXPECT_EQ(p->stochastic_gradient(vec({0.0}), rng, ctx)[0], 0.0);
    EXPECT_EQ(p->stochastic_gradient(vec({1.5}), rng, ctx)[0], 1.5);
  }
}

TEST(Adversarial, NoiseBoundedAndCentred) {
  const auto p = make_adversarial_lower_bound(65536, 2.0);
  Rng rng(4);
  const double e = std::exp(1.0);
  for (std::int64_t i = 1; i <= 4096; i += 5) {
    OracleContext ctx{0, 13, i, p->noisy_phase_step()};
    for (int k = 0; k < 4; ++k) {
      const double z = -p->stochastic_gradient(vec({0.0}), rng, ctx)[0];
      ASSERT_LE(std::abs(z), e);
      ASSERT_NEAR(std::abs(z), 1.0 / p->nu(i), 1e-15);
      const double g = p->stochastic_gradient(vec({4.0}), rng, ctx)[0];
      ASSERT_LE(std::abs(g), 4.0 + e);
    }
  }
  const auto s = sample_gradients(*p, vec({0.5}), 100000, 9, {0, 13, 1, p->noisy_phase_step()});
  EXPECT_LE(std::abs(s.mean[0] - 0.5), 4.0 * s.se[0]);
}

TEST(Adversarial, RejectsUnusableHorizon) {
  EXPECT_THROW(make_adversarial_lower_bound(2, 2.0), std::domain_error);
}

TEST(Projection, Examples) {
  EXPECT_EQ(project(FeasibleSet::box(1, -4, 4), vec({5.0}))[0], 4.0);
  const Vector b = project(FeasibleSet::ball(Vector::Zero(2), 2.0), vec({3.0, 4.0}));
  EXPECT_NEAR(b[0], 1.2, 1e-15);
  EXPECT_NEAR(b[1], 1.6, 1e-15);
  EXPECT_EQ(project(FeasibleSet::all_space(), vec({7.0, -1.0})), vec({7.0, -1.0}));
}

TEST(ProjectionProperties, IdempotentAndNonexpansive) {
  std::mt19937_64 rng(12);
  Vector lo(3), hi(3);
  lo << -1, -2, 0;
  hi << 1, 0.5, 3;
  const FeasibleSet sets[] = {FeasibleSet::box(lo, hi), FeasibleSet::ball(vec({0.5, -0.5, 1.0}), 1.5),
                              FeasibleSet::all_space()};
  for (const auto& set : sets) {
    for (int i = 0; i < 1000; ++i) {
      const Vector u = random_point(rng, 3, 10.0);
      const Vector pu = set.project(u);
      ASSERT_TRUE(set.contains(pu));
      ASSERT_LE((set.project(pu) - pu).norm(), 1e-12);
      const Vector v = set.project(random_point(rng, 3, 10.0));
      ASSERT_LE((pu - v).norm(), (u - v).norm() + 1e-12);
      const Vector w = set.project(random_point(rng, 3, 10.0));
      ASSERT_LE((pu - w).norm(), (u - set.project(w)).norm() + 1e-12 + (u - w).norm());
      ASSERT_LE((pu - set.project(w)).norm(), (u - w).norm() + 1e-12);
    }
  }
}

// Unbiasedness at 10 random feasible points within 4 standard errors, and the
// declared variance respected with 10% slack.
void check_oracle(const StochasticProblem& p, double scale, std::uint64_t seed, int draws = 100000) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 10; ++k) {
    const Vector x = p.feasible_set().project(random_point(rng, p.dimension(), scale));
    const auto s = sample_gradients(p, x, draws, seed * 100 + static_cast<std::uint64_t>(k));
    const Vector g = p.full_gradient(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(s.mean[i] - g[i]), 4.0 * s.se[i] + 1e-12) << p.kind() << " point " << k << " coord " << i;
    }
    if (p.constants().V2) ASSERT_LE(s.spread, 1.1 * *p.constants().V2 + 1e-12) << p.kind();
  }
}

TEST(OracleProperties, QuadraticGaussian) {
  check_oracle(*make_quadratic(3, {1.0, 2.0, 5.0}, vec({0.1, 0.2, 0.3}), NoiseModel::gaussian(0.5)), 3.0, 1);
}

TEST(OracleProperties, QuadraticSphere) {
  const auto p = make_quadratic(2, {1.0, 3.0}, Vector::Zero(2), NoiseModel::sphere(0.8),
                                FeasibleSet::ball(Vector::Zero(2), 2.0));
  check_oracle(*p, 3.0, 2);
  // E||g||^2 <= G2 at the worst point of the ball.
  Rng rng(1);
  const Vector x = vec({0.0, 2.0});
  std::vector<double> sq(20000);
  for (auto& v : sq) v = p->stochastic_gradient(x, rng).squaredNorm();
  EXPECT_LE(summarize(sq).mean, *p->constants().G2 * 1.01);
}

TEST(OracleProperties, Nonconvex) { check_oracle(*make_bounded_nonconvex(10, 1.0), 3.0, 3); }

TEST(OracleProperties, Logistic) {
  check_oracle(*make_logistic(small_data(60, 4, 5), 1e-4, 8), 2.0, 4, 20000);
}
