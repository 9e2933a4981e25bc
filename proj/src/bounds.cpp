#include "stepdecay/bounds.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stepdecay/schedules.hpp"

namespace stepdecay {

namespace {

struct Name {
  BoundId id;
  std::string_view name;
};

constexpr Name kNames[] = {
    {BoundId::P3_1, "P3.1"},
    {BoundId::T3_1, "T3.1"},
    {BoundId::C3_1, "C3.1"},
    {BoundId::T3_2, "T3.2"},
    {BoundId::T3_2_SqrtT, "T3.2-sqrtT"},
    {BoundId::T3_3, "T3.3"},
    {BoundId::T4_1_Avg, "T4.1-avg"},
    {BoundId::T4_1_Last, "T4.1-last"},
    {BoundId::T4_1_LastAppendix, "T4.1-last-appendix"},
    {BoundId::T5_1, "T5.1"},
    {BoundId::T5_1_Smooth, "T5.1-smooth"},
    {BoundId::T5_2_Lower, "T5.2-lower"},
    {BoundId::T5_3, "T5.3"},
    {BoundId::T5_4, "T5.4"},
};

double need(const std::optional<double>& v, std::string_view field, BoundId id) {
  if (!v) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": missing input '" +
                                std::string(field) + "'");
  }
  if (!std::isfinite(*v)) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": input '" +
                                std::string(field) + "' is not finite");
  }
  return *v;
}

double need_positive(const std::optional<double>& v, std::string_view field, BoundId id) {
  const double x = need(v, field, id);
  if (!(x > 0.0)) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": input '" +
                                std::string(field) + "' must be positive");
  }
  return x;
}

double need_nonneg(const std::optional<double>& v, std::string_view field, BoundId id) {
  const double x = need(v, field, id);
  if (x < 0.0) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": input '" +
                                std::string(field) + "' must be nonnegative");
  }
  return x;
}

double need_alpha(const std::optional<double>& v, BoundId id) {
  const double a = need(v, "alpha", id);
  if (!(a > 1.0)) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": alpha must be > 1");
  }
  return a;
}

void check_T(const BoundInputs& in, BoundId id) {
  if (in.T < 2) {
    throw std::invalid_argument("bound " + std::string(to_string(id)) + ": T must be >= 2 (got " +
                                std::to_string(in.T) + ")");
  }
}

void note_rounding(BoundReport& r, double alpha, PhaseMode mode) {
  const double ideal = std::log(static_cast<double>(r.inputs.T)) / std::log(alpha) /
                       (mode == PhaseMode::Nonconvex ? 2.0 : 1.0);
  if (std::abs(ideal - std::round(ideal)) > 1e-9) {
    std::ostringstream os;
    os << "ideal phase count " << ideal << " is not an integer; runs use the rounded partition";
    r.notes.push_back(os.str());
  }
}

void note_eta_vs_L(BoundReport& r, double eta0) {
  if (r.inputs.L && eta0 > 1.0 / *r.inputs.L) {
    std::ostringstream os;
    os << "eta0 = " << eta0 << " exceeds 1/L = " << 1.0 / *r.inputs.L
       << "; the stated guarantee assumes eta0 <= 1/L";
    r.notes.push_back(os.str());
  }
}

BoundReport start(BoundId id, const BoundInputs& in) {
  BoundReport r;
  r.id = id;
  r.inputs = in;
  return r;
}

void finish(BoundReport& r) {
  if (!std::isfinite(r.value)) {
    r.notes.push_back("bound evaluated to a non-finite value");
  }
}

}  // namespace

std::string_view to_string(BoundId id) {
  for (const auto& n : kNames) {
    if (n.id == id) return n.name;
  }
  return "?";
}

BoundId bound_id_from_string(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.id;
  }
  throw std::invalid_argument("unknown bound id '" + std::string(name) + "'");
}

std::vector<BoundId> all_bound_ids() {
  std::vector<BoundId> ids;
  for (const auto& n : kNames) ids.push_back(n.id);
  return ids;
}

double BoundReport::constant(std::string_view name) const {
  for (const auto& [k, v] : constants) {
    if (k == name) return v;
  }
  throw std::out_of_range("bound report has no constant '" + std::string(name) + "'");
}

BoundReport nonconvex_bound(BoundId id, const BoundInputs& in) {
  BoundReport r = start(id, in);
  check_T(in, id);
  const double T = static_cast<double>(in.T);
  const double lnT = std::log(T);
  const double sqrtT = std::sqrt(T);
  const double eta0 = need_positive(in.eta0, "eta0", id);
  const double L = need_nonneg(in.L, "L", id);
  const double V2 = need_nonneg(in.V2, "V2", id);
  note_eta_vs_L(r, eta0);

  switch (id) {
    case BoundId::P3_1: {
      double gap = 0.0;
      if (in.f1_gap) {
        gap = need_nonneg(in.f1_gap, "f1_gap", id);
      } else {
        gap = need(in.f_max, "f_max", id);
        r.notes.push_back("f(x_1) - f* not given; using f_max in its place");
      }
      r.value = gap / (eta0 * (sqrtT - 1.0)) + L * V2 * eta0 * (lnT + 1.0) / (2.0 * (sqrtT - 1.0));
      break;
    }
    case BoundId::T3_1: {
      const double alpha = need_alpha(in.alpha, id);
      const double f_max = need(in.f_max, "f_max", id);
      const double A = (alpha - 1.0) / (alpha * alpha * std::log(alpha));
      const double B = alpha - 1.0;
      r.constants = {{"A", A}, {"B", B}};
      r.value = A * (f_max / eta0) * lnT / (sqrtT - 1.0) + B * L * V2 * eta0 / (sqrtT - 1.0);
      note_rounding(r, alpha, PhaseMode::Nonconvex);
      break;
    }
    case BoundId::C3_1: {
      if (!(V2 > 0.0)) throw std::invalid_argument("bound C3.1: V2 must be positive");
      const double alpha = 1.0 + 1.0 / V2;
      if (in.alpha && std::abs(*in.alpha - alpha) > 1e-12 * alpha) {
        r.notes.push_back("given alpha ignored; the corollary fixes alpha = 1 + 1/V^2");
      }
      const double f_max = need(in.f_max, "f_max", id);
      r.constants = {{"alpha", alpha}};
      r.value = (f_max / eta0) * lnT / (sqrtT - 1.0) + L * eta0 / (sqrtT - 1.0);
      note_rounding(r, alpha, PhaseMode::Nonconvex);
      break;
    }
    case BoundId::T3_2:
    case BoundId::T3_2_SqrtT: {
      const double f_max = need(in.f_max, "f_max", id);
      if (id == BoundId::T3_2_SqrtT) {
        r.constants = {{"beta", sqrtT}, {"alpha", std::pow(sqrtT / T, -1.0 / T)}};
        r.value = (f_max / eta0 + L * V2 * eta0 / 2.0) * lnT / (sqrtT - 1.0);
        break;
      }
      const double beta = need(in.beta, "beta", id);
      if (!(beta >= 1.0 && beta < T)) {
        throw std::invalid_argument("bound T3.2: beta must lie in [1, T)");
      }
      const double ratio = T / beta;
      r.constants = {{"beta", beta}, {"alpha", std::pow(beta / T, -1.0 / T)}};
      r.value = eta0 * std::log(ratio) / ((ratio - 1.0) * T) *
                (2.0 * f_max / (eta0 * eta0) * ratio * ratio + L * V2 * T);
      break;
    }
    case BoundId::T3_3: {
      const double f_max = need(in.f_max, "f_max", id);
      r.value = (3.0 * f_max / eta0 + 3.0 * L * V2 * eta0 / 2.0) / sqrtT;
      break;
    }
    default:
      throw std::invalid_argument("nonconvex_bound: " + std::string(to_string(id)) +
                                  " is not a nonconvex bound");
  }
  finish(r);
  return r;
}

BoundReport convex_bound(BoundId id, const BoundInputs& in) {
  if (id != BoundId::T4_1_Avg && id != BoundId::T4_1_Last && id != BoundId::T4_1_LastAppendix) {
    throw std::invalid_argument("convex_bound: " + std::string(to_string(id)) +
                                " is not a convex bound");
  }
  BoundReport r = start(id, in);
  check_T(in, id);
  const double T = static_cast<double>(in.T);
  const double lnT = std::log(T);
  const double sqrtT = std::sqrt(T);
  const double eta0 = need_positive(in.eta0, "eta0", id);
  const double alpha = need_alpha(in.alpha, id);
  const double D2 = need_nonneg(in.D2, "D2", id);
  const double G2 = need_nonneg(in.G2, "G2", id);

  const double A2 = D2 / (4.0 * eta0 * alpha * std::log(alpha));
  const double B2 = G2 * eta0 * alpha / 2.0;
  r.constants = {{"A2", A2}, {"B2", B2}};
  switch (id) {
    case BoundId::T4_1_Avg:
      r.value = A2 * lnT / sqrtT + B2 / sqrtT;
      break;
    case BoundId::T4_1_Last:
      r.value = (A2 + B2) * lnT / sqrtT + (2.0 + std::numbers::ln2) * B2 / sqrtT;
      break;
    default:
      r.value = (A2 + B2) * lnT / sqrtT + G2 * eta0 * alpha * (1.0 + std::numbers::ln2 / 2.0) / sqrtT;
      r.notes.push_back(
          "appendix writes the last term as G^2 eta0 alpha (1 + ln2/2); this equals (2 + ln2) B2");
      break;
  }
  note_rounding(r, alpha, PhaseMode::StronglyConvex);
  finish(r);
  return r;
}

BoundReport strongly_convex_bound(BoundId id, const BoundInputs& in) {
  if (id != BoundId::T5_1 && id != BoundId::T5_1_Smooth && id != BoundId::T5_3 &&
      id != BoundId::T5_4) {
    throw std::invalid_argument("strongly_convex_bound: " + std::string(to_string(id)) +
                                " is not a strongly convex bound");
  }
  BoundReport r = start(id, in);
  check_T(in, id);
  const double T = static_cast<double>(in.T);
  const double lnT = std::log(T);
  const double eta0 = need_positive(in.eta0, "eta0", id);
  const double alpha = need_alpha(in.alpha, id);
  const double mu = need_positive(in.mu, "mu", id);
  const double G2 = need_nonneg(in.G2, "G2", id);
  const double R = need_nonneg(in.R, "R", id);
  if (!(eta0 < 1.0 / (2.0 * mu))) {
    std::ostringstream os;
    os << "bound " << to_string(id) << ": eta0 = " << eta0 << " must be below 1/(2 mu) = "
       << 1.0 / (2.0 * mu);
    throw std::invalid_argument(os.str());
  }
  const double lna = std::log(alpha);

  switch (id) {
    case BoundId::T5_1:
    case BoundId::T5_1_Smooth: {
      const double A3 = 2.0 * mu * eta0 * alpha * lna / (alpha - 1.0);
      r.constants = {{"A3", A3}};
      r.value = R / std::exp(A3 * (T - 1.0) / lnT) +
                alpha * G2 * std::exp(A3 / lnT) * lnT / (2.0 * mu * A3 * T);
      if (id == BoundId::T5_1_Smooth) {
        const double L = need_positive(in.L, "L", id);
        r.value *= L / 2.0;
      }
      break;
    }
    case BoundId::T5_3: {
      const double A4 = eta0 * alpha * lna;
      const double B4 = 2.0 * mu * A4 / (alpha - 1.0);
      const double C4 = G2 * eta0 * alpha;
      const double D4 = G2 / (2.0 * mu * lna * B4);
      const double E4 = alpha * B4;
      r.constants = {{"A4", A4}, {"B4", B4}, {"C4", C4}, {"D4", D4}, {"E4", E4}};
      r.value = R * lnT / (A4 * std::exp(B4 * (T - alpha) / lnT)) + C4 * (lnT + 2.0) / T +
                D4 * std::exp(E4 / lnT) * lnT * lnT / T;
      break;
    }
    default: {
      const double A4 = eta0 * alpha * lna;
      const double B4 = 2.0 * mu * A4 / (alpha - 1.0);
      const double A5 = 2.0 * mu * alpha / (alpha - 1.0);
      const double C5 = alpha * (2.0 + 1.0 / (alpha * alpha - 1.0)) * G2 / (2.0 * mu * lna);
      r.constants = {{"A4", A4}, {"B4", B4}, {"A5", A5}, {"C5", C5}};
      r.value = A5 * R / std::exp(B4 * T / lnT - 1.0) + C5 * lnT / T;
      break;
    }
  }
  note_rounding(r, alpha, PhaseMode::StronglyConvex);
  finish(r);
  return r;
}

LowerBoundThreshold lower_bound_threshold(double delta, double alpha, std::int64_t T,
                                          LemmaMode mode) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("lower bound: delta must lie in (0, 1)");
  if (!(alpha > 1.0)) throw std::invalid_argument("lower bound: alpha must be > 1");
  if (T < 2) throw std::invalid_argument("lower bound: T must be >= 2");
  const double Td = static_cast<double>(T);
  const double lnT = std::log(Td);
  const double log_inv_delta = -std::log(delta);

  LowerBoundThreshold out;
  out.threshold = log_inv_delta / (9.0 * std::exp(2.0) * std::log(alpha)) * lnT / Td;
  out.c = std::sqrt(2.0 * log_inv_delta) / 3.0;
  out.K = Td / (lnT / std::log(alpha));
  const double c_max = std::sqrt(out.K) / 2.0;
  std::ostringstream os;
  if (out.c < 2.0) {
    os << "lemma needs c >= 2 but c = " << out.c << " (requires delta <= e^-18)";
  } else if (out.c > c_max) {
    os << "lemma needs c <= sqrt(K)/2 = " << c_max << " but c = " << out.c;
  }
  out.lemma_note = os.str();
  out.lemma_applicable = out.lemma_note.empty();
  if (mode == LemmaMode::Strict && !out.lemma_applicable) {
    throw std::domain_error("lower bound (strict): " + out.lemma_note);
  }
  return out;
}

BoundReport evaluate_bound(BoundId id, const BoundInputs& in) {
  switch (id) {
    case BoundId::P3_1:
    case BoundId::T3_1:
    case BoundId::C3_1:
    case BoundId::T3_2:
    case BoundId::T3_2_SqrtT:
    case BoundId::T3_3:
      return nonconvex_bound(id, in);
    case BoundId::T4_1_Avg:
    case BoundId::T4_1_Last:
    case BoundId::T4_1_LastAppendix:
      return convex_bound(id, in);
    case BoundId::T5_2_Lower: {
      BoundReport r = start(id, in);
      const auto lb = lower_bound_threshold(need(in.delta, "delta", id), need_alpha(in.alpha, id), in.T);
      r.value = lb.threshold;
      r.constants = {{"c", lb.c}, {"K", lb.K}};
      if (!lb.lemma_applicable) r.notes.push_back(lb.lemma_note + "; checked empirically instead");
      return r;
    }
    default:
      return strongly_convex_bound(id, in);
  }
}

}  // namespace stepdecay
