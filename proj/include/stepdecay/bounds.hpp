#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stepdecay {

enum class BoundId {
  P3_1,        // eta_t = eta0/sqrt(t), P_t ~ eta_t
  T3_1,        // step decay, nonconvex, P_t ~ 1/eta_t
  C3_1,        // T3_1 with alpha = 1 + 1/V^2
  T3_2,        // exp decay, general beta
  T3_2_SqrtT,  // exp decay, beta = sqrt(T)
  T3_3,        // eta_t = eta0/sqrt(t), P_t ~ 1/eta_t
  T4_1_Avg,
  T4_1_Last,
  T4_1_LastAppendix,  // same value, appendix arrangement of the constant
  T5_1,
  T5_1_Smooth,
  T5_2_Lower,
  T5_3,
  T5_4,
};

std::string_view to_string(BoundId id);
BoundId bound_id_from_string(std::string_view name);
std::vector<BoundId> all_bound_ids();

/// Everything a bound may read. Missing-but-required inputs are an error
/// naming the field.
struct BoundInputs {
  std::int64_t T = 0;
  std::optional<double> eta0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> L;
  std::optional<double> mu;
  std::optional<double> V2;
  std::optional<double> G2;
  std::optional<double> f_max;
  std::optional<double> D2;
  std::optional<double> R;        // ||x_1 - x*||^2
  std::optional<double> f1_gap;   // f(x_1) - f*, P3.1 only; falls back to f_max
  std::optional<double> delta;
};

struct BoundReport {
  BoundId id = BoundId::T3_1;
  BoundInputs inputs;
  std::vector<std::pair<std::string, double>> constants;
  double value = 0.0;
  std::vector<std::string> notes;
  std::optional<double> empirical;

  /// Throws std::out_of_range for an unknown name.
  double constant(std::string_view name) const;
  std::optional<double> ratio() const {
    if (!empirical) return std::nullopt;
    return *empirical / value;
  }
};

BoundReport nonconvex_bound(BoundId id, const BoundInputs& in);
BoundReport convex_bound(BoundId id, const BoundInputs& in);
BoundReport strongly_convex_bound(BoundId id, const BoundInputs& in);
/// Dispatches on id. T5_2_Lower goes through lower_bound_threshold in
/// empirical mode.
BoundReport evaluate_bound(BoundId id, const BoundInputs& in);

enum class LemmaMode { Strict, Empirical };

struct LowerBoundThreshold {
  double threshold = 0.0;
  double c = 0.0;
  double K = 0.0;
  bool lemma_applicable = false;
  std::string lemma_note;  // names the failing inequality when not applicable
};

/// ln(1/delta) / (9 e^2 ln alpha) * ln T / T, with the Chernoff-lemma constants
/// c = sqrt(2 ln(1/delta)) / 3 and K = T / log_alpha T. Strict mode throws
/// std::domain_error unless 2 <= c <= sqrt(K)/2.
LowerBoundThreshold lower_bound_threshold(double delta, double alpha, std::int64_t T,
                                          LemmaMode mode = LemmaMode::Empirical);

}  // namespace stepdecay
