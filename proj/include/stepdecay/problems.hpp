#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stepdecay/random.hpp"
#include "stepdecay/schedules.hpp"

namespace stepdecay {

using Vector = Eigen::VectorXd;

struct SparseDataset;

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

struct AllSpace {};

struct Box {
  Vector lo;
  Vector hi;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

/// Closed convex constraint set with Euclidean projection.
class FeasibleSet {
 public:
  FeasibleSet() = default;

  static FeasibleSet all_space();
  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet box(std::size_t dimension, double lo, double hi);
  static FeasibleSet ball(Vector center, double radius);

  Vector project(const Vector& u) const;
  void project_in_place(Vector& u) const;
  bool contains(const Vector& x, double tol = 1e-12) const;
  bool bounded() const;

  /// sup_{x,y in X} ||x - y||^2, absent for unbounded sets.
  std::optional<double> diameter2() const;
  /// sup_{x in X} ||x - p||^2, absent for unbounded sets.
  std::optional<double> max_dist2_from(const Vector& p) const;

  std::string describe() const;
  const std::variant<AllSpace, Box, Ball>& shape() const { return shape_; }

 private:
  explicit FeasibleSet(std::variant<AllSpace, Box, Ball> shape) : shape_(std::move(shape)) {}
  std::variant<AllSpace, Box, Ball> shape_;
};

Vector project(const FeasibleSet& set, const Vector& u);

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Certified constants of an instance. Each present value is a valid bound.
struct ProblemConstants {
  std::optional<double> L;      // smoothness
  std::optional<double> mu;     // strong convexity
  std::optional<double> V2;     // E||g - E g||^2 <= V2
  std::optional<double> G2;     // E||g||^2 <= G2 on the feasible set
  std::optional<double> f_max;  // f(x) <= f_max everywhere
  std::optional<double> D2;     // diameter^2 of the feasible set
  std::optional<Vector> x_star;
  std::optional<double> f_star;
};

/// Where in the run the oracle is being queried. The adversarial instance
/// keys its noise off (phase, inner).
struct OracleContext {
  std::int64_t t = 0;      // global iteration, 1-based
  std::int64_t phase = 0;  // 1-based
  std::int64_t inner = 0;  // 1-based position inside the phase
  double eta = 0.0;
};

struct NoiseModel {
  enum class Kind { None, Gaussian, Sphere };
  Kind kind = Kind::None;
  double sigma2 = 0.0;  // per-coordinate variance (Gaussian)
  double radius = 0.0;  // sphere radius (Sphere)

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma2) { return {Kind::Gaussian, sigma2, 0.0}; }
  static NoiseModel sphere(double radius) { return {Kind::Sphere, 0.0, radius}; }

  /// E||noise||^2 in dimension d.
  double second_moment(std::size_t d) const;
  void add_to(Vector& g, Rng& rng) const;
};

class StochasticProblem {
 public:
  virtual ~StochasticProblem() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void gradient_into(const Vector& x, Vector& out) const = 0;
  virtual void stochastic_gradient_into(const Vector& x, Rng& rng, const OracleContext& ctx,
                                        Vector& out) const = 0;

  Vector full_gradient(const Vector& x) const;
  Vector stochastic_gradient(const Vector& x, Rng& rng, const OracleContext& ctx = {}) const;

  const ProblemConstants& constants() const { return constants_; }
  const FeasibleSet& feasible_set() const { return set_; }
  /// f(x) - f*, or f(x) when f* is unknown.
  double gap(const Vector& x) const;

 protected:
  ProblemConstants constants_;
  FeasibleSet set_;
};

using ProblemPtr = std::shared_ptr<const StochasticProblem>;

/// f(x) = 1/2 (x - x*)^T diag(spectrum) (x - x*). G2 is certified only when
/// `set` is bounded.
ProblemPtr make_quadratic(std::size_t dimension, const std::vector<double>& spectrum,
                          const Vector& x_star, NoiseModel noise,
                          FeasibleSet set = FeasibleSet::all_space());

/// f(x) = sum_i x_i^2 / (1 + x_i^2): smooth (L = 2), nonconvex, 0 <= f < d.
/// Gaussian noise with total variance V2 (per-coordinate V2 / d).
ProblemPtr make_bounded_nonconvex(std::size_t dimension, double V2 = 1.0);

/// L2-regularized logistic loss averaged over the dataset; the stochastic
/// gradient is a minibatch drawn without replacement.
ProblemPtr make_logistic(std::shared_ptr<const SparseDataset> data, double lambda,
                         std::size_t batch_size, FeasibleSet set = FeasibleSet::all_space());

/// 1-D instance f(x) = x^2/2 on [-4, 4] whose oracle returns x - z, with
/// z = X_i / nu_i (X_i Rademacher, nu_i = (1 - eta_{t*})^(len - i)) during
/// phase t* and z = 0 otherwise. Built for step decay with eta0 = 1 and the
/// strongly convex phase partition.
class AdversarialLowerBound final : public StochasticProblem {
 public:
  AdversarialLowerBound(std::int64_t T, double alpha);

  std::string_view kind() const override { return "adversarial"; }
  std::size_t dimension() const override { return 1; }
  double value(const Vector& x) const override;
  void gradient_into(const Vector& x, Vector& out) const override;
  void stochastic_gradient_into(const Vector& x, Rng& rng, const OracleContext& ctx,
                                Vector& out) const override;

  std::int64_t horizon() const { return T_; }
  double alpha() const { return alpha_; }
  std::int64_t noisy_phase() const { return t_star_; }
  double noisy_phase_step() const { return eta_star_; }
  const PhasePlan& plan() const { return plan_; }
  /// StepDecay spec the construction assumes (eta0 = 1).
  ScheduleSpec schedule_spec() const;
  /// max_i |z_i|.
  double noise_bound() const { return noise_bound_; }
  /// Scale nu_i for 1-based inner index i of the noisy phase.
  double nu(std::int64_t inner) const;

 private:
  std::int64_t T_;
  double alpha_;
  PhasePlan plan_;
  std::int64_t t_star_;
  std::int64_t noisy_len_;
  double eta_star_;
  double noise_bound_;
};

std::shared_ptr<const AdversarialLowerBound> make_adversarial_lower_bound(std::int64_t T,
                                                                          double alpha);

/// t* = log_a T - log_a log_a T + 1, rounded to the nearest integer.
double adversarial_phase_ideal(std::int64_t T, double alpha);

}  // namespace stepdecay
