#include "stepdecay/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stepdecay/data_io.hpp"
#include "stepdecay/stats.hpp"

namespace stepdecay {

// ---------------------------------------------------------------------------
// FeasibleSet
// ---------------------------------------------------------------------------

FeasibleSet FeasibleSet::all_space() { return FeasibleSet(AllSpace{}); }

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box: lo/hi dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box: lo must not exceed hi");
  }
  return FeasibleSet(Box{std::move(lo), std::move(hi)});
}

FeasibleSet FeasibleSet::box(std::size_t dimension, double lo, double hi) {
  const auto d = static_cast<Eigen::Index>(dimension);
  return box(Vector::Constant(d, lo), Vector::Constant(d, hi));
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
  return FeasibleSet(Ball{std::move(center), radius});
}

void FeasibleSet::project_in_place(Vector& u) const {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    u = u.cwiseMax(b->lo).cwiseMin(b->hi);
  } else if (const auto* ball = std::get_if<Ball>(&shape_)) {
    const double dist = (u - ball->center).norm();
    if (dist > ball->radius) u = ball->center + (ball->radius / dist) * (u - ball->center);
  }
}

Vector FeasibleSet::project(const Vector& u) const {
  Vector out = u;
  project_in_place(out);
  return out;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    return ((x - b->lo).array() >= -tol).all() && ((b->hi - x).array() >= -tol).all();
  }
  if (const auto* ball = std::get_if<Ball>(&shape_)) {
    return (x - ball->center).norm() <= ball->radius + tol;
  }
  return x.allFinite();
}

bool FeasibleSet::bounded() const { return !std::holds_alternative<AllSpace>(shape_); }

std::optional<double> FeasibleSet::diameter2() const {
  if (const auto* b = std::get_if<Box>(&shape_)) return (b->hi - b->lo).squaredNorm();
  if (const auto* ball = std::get_if<Ball>(&shape_)) return 4.0 * ball->radius * ball->radius;
  return std::nullopt;
}

std::optional<double> FeasibleSet::max_dist2_from(const Vector& p) const {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double m = std::max(std::abs(p[i] - b->lo[i]), std::abs(b->hi[i] - p[i]));
      s += m * m;
    }
    return s;
  }
  if (const auto* ball = std::get_if<Ball>(&shape_)) {
    const double r = (p - ball->center).norm() + ball->radius;
    return r * r;
  }
  return std::nullopt;
}

std::string FeasibleSet::describe() const {
  std::ostringstream os;
  if (const auto* b = std::get_if<Box>(&shape_)) {
    os << "box(dim=" << b->lo.size() << ")";
  } else if (const auto* ball = std::get_if<Ball>(&shape_)) {
    os << "ball(dim=" << ball->center.size() << ", r=" << ball->radius << ")";
  } else {
    os << "all_space";
  }
  return os.str();
}

Vector project(const FeasibleSet& set, const Vector& u) { return set.project(u); }

// ---------------------------------------------------------------------------
// Noise and base oracle
// ---------------------------------------------------------------------------

double NoiseModel::second_moment(std::size_t d) const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::Gaussian: return sigma2 * static_cast<double>(d);
    case Kind::Sphere: return radius * radius;
  }
  return 0.0;
}

void NoiseModel::add_to(Vector& g, Rng& rng) const {
  if (kind == Kind::None) return;
  std::normal_distribution<double> normal(0.0, 1.0);
  if (kind == Kind::Gaussian) {
    const double sd = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += sd * normal(rng);
    return;
  }
  Vector dir(g.size());
  double n2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = normal(rng);
    n2 = dir.squaredNorm();
  } while (n2 == 0.0);
  g += (radius / std::sqrt(n2)) * dir;
}

Vector StochasticProblem::full_gradient(const Vector& x) const {
  Vector g(static_cast<Eigen::Index>(dimension()));
  gradient_into(x, g);
  return g;
}

Vector StochasticProblem::stochastic_gradient(const Vector& x, Rng& rng,
                                              const OracleContext& ctx) const {
  Vector g(static_cast<Eigen::Index>(dimension()));
  stochastic_gradient_into(x, rng, ctx, g);
  return g;
}

double StochasticProblem::gap(const Vector& x) const {
  return value(x) - constants_.f_star.value_or(0.0);
}

namespace {

void check_dimension(const Vector& x, std::size_t d, std::string_view who) {
  if (static_cast<std::size_t>(x.size()) != d) {
    throw std::invalid_argument(std::string(who) + ": point has dimension " +
                                std::to_string(x.size()) + ", expected " + std::to_string(d));
  }
}

// ---------------------------------------------------------------------------
// Quadratic
// ---------------------------------------------------------------------------

class Quadratic final : public StochasticProblem {
 public:
  Quadratic(Vector spectrum, Vector x_star, NoiseModel noise, FeasibleSet set)
      : spectrum_(std::move(spectrum)), x_star_(std::move(x_star)), noise_(noise) {
    set_ = std::move(set);
    const auto d = static_cast<std::size_t>(spectrum_.size());
    constants_.L = spectrum_.maxCoeff();
    constants_.mu = spectrum_.minCoeff();
    constants_.V2 = noise_.second_moment(d);
    constants_.x_star = x_star_;
    constants_.f_star = 0.0;
    constants_.D2 = set_.diameter2();
    if (auto r2 = set_.max_dist2_from(x_star_)) {
      const double L = *constants_.L;
      constants_.G2 = L * L * *r2 + noise_.second_moment(d);
    }
  }

  std::string_view kind() const override { return "quadratic"; }
  std::size_t dimension() const override { return static_cast<std::size_t>(spectrum_.size()); }

  double value(const Vector& x) const override {
    check_dimension(x, dimension(), "quadratic");
    const Vector r = x - x_star_;
    return 0.5 * r.dot(spectrum_.cwiseProduct(r));
  }

  void gradient_into(const Vector& x, Vector& out) const override {
    check_dimension(x, dimension(), "quadratic");
    out = spectrum_.cwiseProduct(x - x_star_);
  }

  void stochastic_gradient_into(const Vector& x, Rng& rng, const OracleContext&,
                                Vector& out) const override {
    gradient_into(x, out);
    noise_.add_to(out, rng);
  }

 private:
  Vector spectrum_;
  Vector x_star_;
  NoiseModel noise_;
};

// ---------------------------------------------------------------------------
// Bounded nonconvex: sum x^2 / (1 + x^2)
// ---------------------------------------------------------------------------

class BoundedNonconvex final : public StochasticProblem {
 public:
  BoundedNonconvex(std::size_t d, double V2) : d_(d), noise_(NoiseModel::gaussian(V2 / d)) {
    if (V2 == 0.0) noise_ = NoiseModel::none();
    // |d^2/dx^2 x^2/(1+x^2)| = |2 - 6x^2| / (1+x^2)^3 <= 2, attained at 0.
    constants_.L = 2.0;
    constants_.f_max = static_cast<double>(d);
    constants_.V2 = V2;
    constants_.x_star = Vector::Zero(static_cast<Eigen::Index>(d));
    constants_.f_star = 0.0;
  }

  std::string_view kind() const override { return "bounded_nonconvex"; }
  std::size_t dimension() const override { return d_; }

  double value(const Vector& x) const override {
    check_dimension(x, d_, "bounded_nonconvex");
    const Eigen::ArrayXd x2 = x.array().square();
    return (x2 / (1.0 + x2)).sum();
  }

  void gradient_into(const Vector& x, Vector& out) const override {
    check_dimension(x, d_, "bounded_nonconvex");
    const Eigen::ArrayXd denom = (1.0 + x.array().square()).square();
    out = (2.0 * x.array() / denom).matrix();
  }

  void stochastic_gradient_into(const Vector& x, Rng& rng, const OracleContext&,
                                Vector& out) const override {
    gradient_into(x, out);
    noise_.add_to(out, rng);
  }

 private:
  std::size_t d_;
  NoiseModel noise_;
};

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

double log1p_exp_neg(double margin) {
  // ln(1 + exp(-m)) without overflow.
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double sigmoid_neg(double margin) {
  // 1 / (1 + exp(m))
  if (margin >= 0.0) {
    const double e = std::exp(-margin);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(margin));
}

class Logistic final : public StochasticProblem {
 public:
  Logistic(std::shared_ptr<const SparseDataset> data, double lambda, std::size_t batch,
           FeasibleSet set)
      : data_(std::move(data)), lambda_(lambda), batch_(batch) {
    set_ = std::move(set);
    const double max_norm2 = data_->max_row_norm2();
    constants_.L = lambda_ + max_norm2 / 4.0;
    if (lambda_ > 0.0) constants_.mu = lambda_;
    constants_.D2 = set_.diameter2();
    if (auto r2 = set_.max_dist2_from(Vector::Zero(static_cast<Eigen::Index>(data_->d)))) {
      const double g = std::sqrt(max_norm2) + lambda_ * std::sqrt(*r2);
      constants_.G2 = g * g;
    }
  }

  std::string_view kind() const override { return "logistic"; }
  std::size_t dimension() const override { return data_->d; }

  double value(const Vector& x) const override {
    check_dimension(x, data_->d, "logistic");
    std::vector<double> losses(data_->n());
    for (std::size_t i = 0; i < data_->n(); ++i) {
      const auto& row = data_->rows[i];
      losses[i] = log1p_exp_neg(row.label * row.dot(x));
    }
    return pairwise_mean(losses) + 0.5 * lambda_ * x.squaredNorm();
  }

  void gradient_into(const Vector& x, Vector& out) const override {
    check_dimension(x, data_->d, "logistic");
    out.setZero(static_cast<Eigen::Index>(data_->d));
    for (const auto& row : data_->rows) accumulate(row, x, out);
    out /= static_cast<double>(data_->n());
    out += lambda_ * x;
  }

  void stochastic_gradient_into(const Vector& x, Rng& rng, const OracleContext&,
                                Vector& out) const override {
    check_dimension(x, data_->d, "logistic");
    out.setZero(static_cast<Eigen::Index>(data_->d));
    // Floyd's algorithm: batch_ distinct indices from [0, n).
    const std::size_t n = data_->n();
    std::vector<std::size_t> chosen;
    chosen.reserve(batch_);
    for (std::size_t j = n - batch_; j < n; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      const std::size_t r = pick(rng);
      const bool seen = std::find(chosen.begin(), chosen.end(), r) != chosen.end();
      chosen.push_back(seen ? j : r);
    }
    for (std::size_t i : chosen) accumulate(data_->rows[i], x, out);
    out /= static_cast<double>(batch_);
    out += lambda_ * x;
  }

 private:
  static double pairwise_mean(const std::vector<double>& v) {
    return pairwise_sum(v) / static_cast<double>(v.size());
  }

  static void accumulate(const SparseRow& row, const Vector& x, Vector& out) {
    const double margin = row.label * row.dot(x);
    const double coeff = -row.label * sigmoid_neg(margin);
    for (const auto& e : row.features) out[e.index] += coeff * e.value;
  }

  std::shared_ptr<const SparseDataset> data_;
  double lambda_;
  std::size_t batch_;
};

}  // namespace

ProblemPtr make_quadratic(std::size_t dimension, const std::vector<double>& spectrum,
                          const Vector& x_star, NoiseModel noise, FeasibleSet set) {
  if (dimension == 0) throw std::invalid_argument("make_quadratic: dimension must be >= 1");
  if (spectrum.size() != dimension) {
    throw std::invalid_argument("make_quadratic: spectrum length must equal dimension");
  }
  if (static_cast<std::size_t>(x_star.size()) != dimension) {
    throw std::invalid_argument("make_quadratic: x_star length must equal dimension");
  }
  for (double e : spectrum) {
    if (!(e > 0.0)) throw std::invalid_argument("make_quadratic: eigenvalues must be positive");
  }
  if (noise.kind == NoiseModel::Kind::Gaussian && !(noise.sigma2 >= 0.0)) {
    throw std::invalid_argument("make_quadratic: gaussian variance must be nonnegative");
  }
  if (noise.kind == NoiseModel::Kind::Sphere && !(noise.radius >= 0.0)) {
    throw std::invalid_argument("make_quadratic: sphere radius must be nonnegative");
  }
  if (!set.contains(x_star)) throw std::invalid_argument("make_quadratic: x_star must be feasible");
  Vector spec = Eigen::Map<const Vector>(spectrum.data(), static_cast<Eigen::Index>(dimension));
  return std::make_shared<Quadratic>(std::move(spec), x_star, noise, std::move(set));
}

ProblemPtr make_bounded_nonconvex(std::size_t dimension, double V2) {
  if (dimension == 0) throw std::invalid_argument("make_bounded_nonconvex: dimension must be >= 1");
  if (!(V2 >= 0.0)) throw std::invalid_argument("make_bounded_nonconvex: V2 must be nonnegative");
  return std::make_shared<BoundedNonconvex>(dimension, V2);
}

ProblemPtr make_logistic(std::shared_ptr<const SparseDataset> data, double lambda,
                         std::size_t batch_size, FeasibleSet set) {
  if (!data || data->n() == 0) throw std::invalid_argument("make_logistic: empty dataset");
  if (data->d == 0) throw std::invalid_argument("make_logistic: dataset has zero features");
  for (std::size_t i = 0; i < data->n(); ++i) {
    const int y = data->rows[i].label;
    if (y != -1 && y != 1) {
      throw std::invalid_argument("make_logistic: row " + std::to_string(i) +
                                  " has label outside {-1, +1}");
    }
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("make_logistic: lambda must be nonnegative");
  if (batch_size == 0 || batch_size > data->n()) {
    throw std::invalid_argument("make_logistic: batch_size must lie in [1, n]");
  }
  return std::make_shared<Logistic>(std::move(data), lambda, batch_size, std::move(set));
}

// ---------------------------------------------------------------------------
// Adversarial lower-bound instance
// ---------------------------------------------------------------------------

double adversarial_phase_ideal(std::int64_t T, double alpha) {
  if (T < 2) throw std::invalid_argument("adversarial: T must be >= 2");
  if (!(alpha > 1.0)) throw std::invalid_argument("adversarial: alpha must be > 1");
  const double log_a_T = std::log(static_cast<double>(T)) / std::log(alpha);
  if (!(log_a_T > 0.0)) throw std::invalid_argument("adversarial: log_alpha T must be positive");
  return log_a_T - std::log(log_a_T) / std::log(alpha) + 1.0;
}

AdversarialLowerBound::AdversarialLowerBound(std::int64_t T, double alpha)
    : T_(T), alpha_(alpha), plan_(phase_partition(alpha, T, PhaseMode::StronglyConvex)) {
  const double ideal = adversarial_phase_ideal(T, alpha);
  t_star_ = std::llround(ideal);
  if (t_star_ < 2 || t_star_ > plan_.N) {
    throw std::domain_error("adversarial: noisy phase t* = " + std::to_string(t_star_) +
                            " outside [2, N = " + std::to_string(plan_.N) + "]");
  }
  noisy_len_ = plan_.phase_length(t_star_);
  eta_star_ = 1.0 / std::pow(alpha_, static_cast<double>(t_star_ - 1));
  noise_bound_ = 1.0 / nu(1);
  if (!(noise_bound_ <= 4.0)) {
    throw std::domain_error("adversarial: noise bound " + std::to_string(noise_bound_) +
                            " leaves the feasible interval [-4, 4]");
  }
  set_ = FeasibleSet::box(1, -4.0, 4.0);
  constants_.L = 1.0;
  constants_.mu = 1.0;
  constants_.x_star = Vector::Zero(1);
  constants_.f_star = 0.0;
  constants_.D2 = 64.0;
  constants_.V2 = noise_bound_ * noise_bound_;
  // E(x - z)^2 = x^2 + E z^2 <= 16 + max z^2 on [-4, 4].
  constants_.G2 = 16.0 + noise_bound_ * noise_bound_;
}

double AdversarialLowerBound::nu(std::int64_t inner) const {
  if (inner < 1 || inner > noisy_len_) throw std::out_of_range("adversarial: inner index");
  return std::pow(1.0 - eta_star_, static_cast<double>(noisy_len_ - inner));
}

ScheduleSpec AdversarialLowerBound::schedule_spec() const {
  return ScheduleSpec::step_decay(1.0, alpha_, plan_.S, plan_.N);
}

double AdversarialLowerBound::value(const Vector& x) const {
  check_dimension(x, 1, "adversarial");
  return 0.5 * x[0] * x[0];
}

void AdversarialLowerBound::gradient_into(const Vector& x, Vector& out) const {
  check_dimension(x, 1, "adversarial");
  out = x;
}

void AdversarialLowerBound::stochastic_gradient_into(const Vector& x, Rng& rng,
                                                     const OracleContext& ctx,
                                                     Vector& out) const {
  gradient_into(x, out);
  if (ctx.phase != t_star_) return;
  const double sign = (rng() >> 63) != 0 ? 1.0 : -1.0;
  out[0] -= sign / nu(ctx.inner);
}

std::shared_ptr<const AdversarialLowerBound> make_adversarial_lower_bound(std::int64_t T,
                                                                          double alpha) {
  return std::make_shared<AdversarialLowerBound>(T, alpha);
}

}  // namespace stepdecay
