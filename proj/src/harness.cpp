#include "stepdecay/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stepdecay/data_io.hpp"
#include "stepdecay/random.hpp"

namespace stepdecay {

RateFit rate_fit(std::span<const std::int64_t> T, std::span<const double> errors) {
  if (T.size() != errors.size()) throw std::invalid_argument("rate_fit: size mismatch");
  if (T.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 grid points");
  const std::size_t n = T.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (T[i] < 1) throw std::invalid_argument("rate_fit: T values must be positive");
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw std::invalid_argument("rate_fit: errors must be positive and finite");
    }
    lx[i] = std::log(static_cast<double>(T[i]));
    ly[i] = std::log(errors[i]);
  }
  const double mx = pairwise_sum(lx) / static_cast<double>(n);
  const double my = pairwise_sum(ly) / static_cast<double>(n);
  std::vector<double> sxy(n), sxx(n);
  for (std::size_t i = 0; i < n; ++i) {
    sxy[i] = (lx[i] - mx) * (ly[i] - my);
    sxx[i] = (lx[i] - mx) * (lx[i] - mx);
  }
  const double denom = pairwise_sum(sxx);
  if (!(denom > 0.0)) throw std::invalid_argument("rate_fit: T values must not all be equal");

  RateFit fit;
  fit.T.assign(T.begin(), T.end());
  fit.errors.assign(errors.begin(), errors.end());
  fit.slope = pairwise_sum(sxy) / denom;
  fit.intercept = my - fit.slope * mx;
  std::vector<double> r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    r2[i] = r * r;
  }
  fit.residual = std::sqrt(pairwise_sum(r2) / static_cast<double>(n));
  return fit;
}

std::vector<std::int64_t> power_of_two_grid(int lo, int hi) {
  if (lo < 0 || hi > 62 || lo > hi) throw std::invalid_argument("power_of_two_grid: bad range");
  std::vector<std::int64_t> g;
  for (int k = lo; k <= hi; ++k) g.push_back(std::int64_t{1} << k);
  return g;
}

std::vector<double> log10_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("log10_grid: need count >= 2 and hi > lo");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return g;
}

std::string_view to_string(ErrorMetric metric) {
  switch (metric) {
    case ErrorMetric::LastDist2: return "last_dist2";
    case ErrorMetric::LastGap: return "last_gap";
    case ErrorMetric::SuffixGap: return "suffix_gap";
    case ErrorMetric::GradNorm2InvEta: return "grad_norm2_inv_eta";
    case ErrorMetric::GradNorm2Eta: return "grad_norm2_eta";
  }
  return "?";
}

ErrorMetric error_metric_from_string(std::string_view name) {
  for (auto m : {ErrorMetric::LastDist2, ErrorMetric::LastGap, ErrorMetric::SuffixGap,
                 ErrorMetric::GradNorm2InvEta, ErrorMetric::GradNorm2Eta}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown error metric '" + std::string(name) + "'");
}

bool RateResult::all_dominated() const {
  return std::all_of(cells.begin(), cells.end(), [](const RateCell& c) { return c.dominated(); });
}

namespace {

NamedMetric metric_for(const RateExperiment& exp) {
  const auto& k = exp.problem->constants();
  switch (exp.metric) {
    case ErrorMetric::LastDist2:
      if (!k.x_star) throw std::invalid_argument("rate experiment: last_dist2 needs a known x*");
      return {"last_dist2", [xs = *k.x_star](const Trajectory& tr) {
                return (tr.final_iterate - xs).squaredNorm();
              }};
    case ErrorMetric::LastGap:
      return {"last_gap", [p = exp.problem](const Trajectory& tr) { return p->gap(tr.final_iterate); }};
    case ErrorMetric::SuffixGap:
      return {"suffix_gap", [p = exp.problem, mu = exp.suffix_mu](const Trajectory& tr) {
                return p->gap(suffix_average(tr, mu));
              }};
    case ErrorMetric::GradNorm2InvEta:
      return {"grad_norm2_inv_eta", [](const Trajectory& tr) {
                return expected_grad_norm2(tr, OutputRuleKind::SampleInvEta);
              }};
    case ErrorMetric::GradNorm2Eta:
      return {"grad_norm2_eta", [](const Trajectory& tr) {
                return expected_grad_norm2(tr, OutputRuleKind::SampleEta);
              }};
  }
  throw std::logic_error("unknown metric");
}

}  // namespace

RateResult run_rate_experiment(const RateExperiment& exp) {
  if (!exp.problem) throw std::invalid_argument("rate experiment: no problem");
  if (!exp.schedule) throw std::invalid_argument("rate experiment: no schedule family");
  if (exp.n_reps == 0) throw std::invalid_argument("rate experiment: n_reps must be >= 1");
  const NamedMetric metric = metric_for(exp);

  RateResult result;
  std::vector<double> means;
  for (const std::int64_t T : exp.T_grid) {
    RunConfig cfg;
    cfg.problem = exp.problem;
    cfg.problem_id = exp.problem_id;
    cfg.schedule = exp.schedule(T);
    cfg.T = T;
    cfg.x0 = exp.x0;
    if (exp.metric == ErrorMetric::SuffixGap) {
      cfg.output_rules = {OutputRule::suffix_average(exp.suffix_mu)};
      cfg.retention = RetentionPolicy::FinalPhasePlusSampled;
    } else {
      cfg.retention = RetentionPolicy::SummariesOnly;
    }

    RateCell cell;
    cell.T = T;
    cell.seed = derive_seed(exp.base_seed, static_cast<std::uint64_t>(T));
    cell.schedule = cfg.schedule;
    const ReplicationSummary rs = replicate(cfg, exp.n_reps, cell.seed, exp.threads, {metric});
    cell.n_diverged = rs.n_diverged;
    if (static_cast<double>(rs.n_diverged) >
        exp.max_divergence_fraction * static_cast<double>(exp.n_reps)) {
      throw std::runtime_error("rate experiment: " + std::to_string(rs.n_diverged) + " of " +
                               std::to_string(exp.n_reps) + " runs diverged at T = " +
                               std::to_string(T));
    }
    cell.error = rs.metric(metric.name);
    if (exp.bound) {
      BoundInputs in = exp.bound_inputs;
      in.T = T;
      BoundReport report = evaluate_bound(*exp.bound, in);
      report.empirical = cell.error.mean;
      cell.bound = std::move(report);
    }
    means.push_back(cell.error.mean);
    result.cells.push_back(std::move(cell));
  }
  if (exp.T_grid.size() >= 3) result.fit = rate_fit(exp.T_grid, means);
  return result;
}

void write_rate_csv(std::ostream& out, const RateResult& result) {
  CsvWriter csv(out, {"T", "seed", "n_reps", "n_diverged", "mean", "stddev", "ci_half", "ci_upper",
                      "bound", "ratio"});
  for (const auto& c : result.cells) {
    csv.cell(c.T).cell(c.seed).cell(c.error.n + c.n_diverged).cell(c.n_diverged);
    csv.cell(c.error.mean).cell(c.error.stddev).cell(c.error.ci_half).cell(c.error.ci_upper());
    if (c.bound) {
      csv.cell(c.bound->value).cell(*c.bound->ratio());
    } else {
      csv.empty().empty();
    }
    csv.end_row();
  }
}

double ExceedanceResult::frequency_at(double level) const {
  if (final_values.empty()) return 0.0;
  const auto hits = std::count_if(final_values.begin(), final_values.end(),
                                  [level](double v) { return v >= level; });
  return static_cast<double>(hits) / static_cast<double>(final_values.size());
}

ExceedanceResult lower_bound_trial(std::int64_t T, double alpha, double delta, std::size_t n_trials,
                                   std::uint64_t base_seed, unsigned threads) {
  if (n_trials == 0) throw std::invalid_argument("lower_bound_trial: n_trials must be >= 1");
  const auto problem = make_adversarial_lower_bound(T, alpha);
  const LowerBoundThreshold lb = lower_bound_threshold(delta, alpha, T, LemmaMode::Empirical);

  RunConfig cfg;
  cfg.problem = problem;
  cfg.problem_id = "adversarial";
  cfg.schedule = problem->schedule_spec();
  cfg.T = T;
  cfg.x0 = Vector::Zero(1);
  cfg.retention = RetentionPolicy::SummariesOnly;

  ExceedanceResult out;
  out.T = T;
  out.alpha = alpha;
  out.delta = delta;
  out.threshold = lb.threshold;
  out.n_trials = n_trials;
  out.final_values.assign(n_trials, 0.0);
  parallel_for(n_trials, threads, [&](std::size_t r) {
    RunConfig c = cfg;
    c.seed = derive_seed(base_seed, r);
    const Trajectory tr = sgd_run(c);
    if (tr.diverged) throw std::runtime_error("lower_bound_trial: adversarial run diverged");
    out.final_values[r] = problem->value(tr.final_iterate);
  });
  out.n_exceeding = static_cast<std::size_t>(
      std::count_if(out.final_values.begin(), out.final_values.end(),
                    [&](double v) { return v >= out.threshold; }));
  out.frequency = static_cast<double>(out.n_exceeding) / static_cast<double>(n_trials);
  out.ci = wilson_interval(out.n_exceeding, n_trials);
  return out;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

const RobustnessFamilySummary& RobustnessResult::family(std::string_view name) const {
  for (const auto& f : families) {
    if (f.family == name) return f;
  }
  throw std::out_of_range("robustness result has no family '" + std::string(name) + "'");
}

RobustnessResult robustness_sweep(const RobustnessSweep& sweep) {
  if (!sweep.problem) throw std::invalid_argument("robustness_sweep: no problem");
  if (sweep.eta0_grid.empty()) throw std::invalid_argument("robustness_sweep: empty eta0 grid");
  const auto [lo, hi] = std::minmax_element(sweep.eta0_grid.begin(), sweep.eta0_grid.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("robustness_sweep: eta0 values must be positive");
  if (std::log10(*hi / *lo) < 3.0 - 1e-9) {
    throw std::invalid_argument("robustness_sweep: eta0 grid must span at least 3 orders of magnitude");
  }

  // Cells flattened as (family, eta0, rep) so the pool stays busy.
  const std::size_t nf = sweep.families.size();
  const std::size_t ne = sweep.eta0_grid.size();
  const std::size_t nr = sweep.n_reps;
  std::vector<double> loss(nf * ne * nr, 0.0);
  parallel_for(loss.size(), sweep.threads, [&](std::size_t k) {
    const std::size_t f = k / (ne * nr);
    const std::size_t e = (k / nr) % ne;
    const std::size_t r = k % nr;
    RunConfig cfg;
    cfg.problem = sweep.problem;
    cfg.schedule = sweep.families[f].make(sweep.eta0_grid[e]);
    cfg.T = sweep.T;
    cfg.x0 = sweep.x0;
    cfg.retention = RetentionPolicy::SummariesOnly;
    cfg.track_every_step = false;
    cfg.seed = derive_seed(sweep.base_seed, r);
    const Trajectory tr = sgd_run(cfg);
    loss[k] = tr.diverged ? std::numeric_limits<double>::infinity()
                          : sweep.problem->value(tr.final_iterate);
  });

  RobustnessResult out;
  for (std::size_t f = 0; f < nf; ++f) {
    RobustnessFamilySummary s;
    s.family = sweep.families[f].name;
    s.min_loss = std::numeric_limits<double>::infinity();
    std::vector<double> means(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const std::span<const double> reps(loss.data() + (f * ne + e) * nr, nr);
      const bool finite = std::all_of(reps.begin(), reps.end(), [](double v) { return std::isfinite(v); });
      means[e] = finite ? pairwise_sum(reps) / static_cast<double>(nr)
                        : std::numeric_limits<double>::infinity();
      if (means[e] < s.min_loss) {
        s.min_loss = means[e];
        s.best_eta0 = sweep.eta0_grid[e];
      }
    }
    s.region_lo = std::numeric_limits<double>::infinity();
    s.region_hi = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
      RobustnessRow row{s.family, sweep.eta0_grid[e], means[e], false};
      if (std::isfinite(means[e]) && means[e] <= sweep.tolerance * s.min_loss) {
        row.in_region = true;
        s.region_lo = std::min(s.region_lo, row.eta0);
        s.region_hi = std::max(s.region_hi, row.eta0);
      }
      out.rows.push_back(std::move(row));
    }
    s.width_log10 = std::isfinite(s.min_loss) ? std::log10(s.region_hi / s.region_lo) : 0.0;
    out.families.push_back(std::move(s));
  }
  return out;
}

void write_robustness_csv(std::ostream& out, const RobustnessResult& result) {
  CsvWriter csv(out, {"family", "eta0", "mean_loss", "in_region"});
  for (const auto& r : result.rows) {
    csv.cell(r.family).cell(r.eta0).cell(r.mean_loss).cell(r.in_region ? 1 : 0);
    csv.end_row();
  }
}

}  // namespace stepdecay
