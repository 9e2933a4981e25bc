#include "stepdecay/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stepdecay/data_io.hpp"
#include "stepdecay/random.hpp"

namespace stepdecay {

std::string_view to_string(RetentionPolicy policy) {
  switch (policy) {
    case RetentionPolicy::All: return "all";
    case RetentionPolicy::FinalPhasePlusSampled: return "final_phase_plus_sampled";
    case RetentionPolicy::SummariesOnly: return "summaries_only";
  }
  return "?";
}

RetentionPolicy retention_from_string(std::string_view name) {
  for (auto p : {RetentionPolicy::All, RetentionPolicy::FinalPhasePlusSampled,
                 RetentionPolicy::SummariesOnly}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown retention policy '" + std::string(name) + "'");
}

const Vector& Trajectory::iterate(std::int64_t t) const {
  const auto it = iterates.find(t);
  if (it == iterates.end()) {
    throw std::out_of_range("trajectory: iterate x_" + std::to_string(t) +
                            " was not retained (needed index " + std::to_string(t) +
                            "; use retention 'all' or request the rule before the run)");
  }
  return it->second;
}

double Trajectory::support_grad_norm2(std::int64_t t) const {
  if (t < 1 || t > static_cast<std::int64_t>(records.size()) + 1 || t > T) {
    throw std::out_of_range("trajectory: support index out of range");
  }
  return t == 1 ? initial.grad_norm2 : records[static_cast<std::size_t>(t - 2)].grad_norm2;
}

double Trajectory::support_f_value(std::int64_t t) const {
  if (t < 1 || t > static_cast<std::int64_t>(records.size()) + 1 || t > T) {
    throw std::out_of_range("trajectory: support index out of range");
  }
  return t == 1 ? initial.f_value : records[static_cast<std::size_t>(t - 2)].f_value;
}

std::optional<std::int64_t> Trajectory::presampled_index(const OutputRule& rule) const {
  for (const auto& [r, t] : presampled) {
    if (r == rule) return t;
  }
  return std::nullopt;
}

namespace {

void validate_run(const RunConfig& c) {
  if (!c.problem) throw std::invalid_argument("sgd_run: no problem");
  if (c.T < 1) throw std::invalid_argument("sgd_run: T must be >= 1");
  if (static_cast<std::size_t>(c.x0.size()) != c.problem->dimension()) {
    throw std::invalid_argument("sgd_run: x0 has dimension " + std::to_string(c.x0.size()) +
                                ", problem has " + std::to_string(c.problem->dimension()));
  }
  for (const auto& rule : c.output_rules) {
    if (c.retention == RetentionPolicy::SummariesOnly && rule.kind != OutputRuleKind::LastIterate) {
      throw std::invalid_argument("sgd_run: retention 'summaries_only' cannot serve output rule " +
                                  rule.name());
    }
    if (rule.kind == OutputRuleKind::SuffixWeightedAverage) {
      if (!(rule.mu > 0.0)) throw std::invalid_argument("sgd_run: suffix average needs mu > 0");
      if (c.schedule.kind != ScheduleKind::StepDecay) {
        throw std::invalid_argument("sgd_run: suffix average needs a step-decay schedule");
      }
    }
  }
}

void precondition_notes(const RunConfig& c, Trajectory& tr) {
  const auto& k = c.problem->constants();
  const double eta0 = c.schedule.eta0;
  std::ostringstream os;
  if (k.L && eta0 > 2.0 / *k.L) {
    os << "eta0 = " << eta0 << " exceeds 2/L = " << 2.0 / *k.L << "; iterates may diverge";
    tr.notes.push_back(os.str());
    os.str("");
  } else if (k.L && eta0 > 1.0 / *k.L) {
    os << "eta0 = " << eta0 << " exceeds 1/L = " << 1.0 / *k.L
       << "; nonconvex guarantees do not apply";
    tr.notes.push_back(os.str());
    os.str("");
  }
  if (k.mu && *k.mu > 0.0 && eta0 >= 1.0 / (2.0 * *k.mu)) {
    os << "eta0 = " << eta0 << " is not below 1/(2 mu) = " << 1.0 / (2.0 * *k.mu)
       << "; strongly convex guarantees do not apply";
    tr.notes.push_back(os.str());
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dist2(const Vector& x, const std::optional<Vector>& star) {
  return star ? (x - *star).squaredNorm() : 0.0;
}

}  // namespace

Trajectory sgd_run(const RunConfig& config) {
  validate_run(config);
  const StochasticProblem& problem = *config.problem;
  const Schedule schedule(config.schedule, config.T);
  const auto& consts = problem.constants();
  const std::int64_t T = config.T;

  Trajectory tr;
  tr.T = T;
  tr.seed = config.seed;
  tr.schedule = config.schedule;
  tr.problem_id = config.problem_id.empty() ? std::string(problem.kind()) : config.problem_id;
  tr.f_star = consts.f_star;
  precondition_notes(config, tr);

  // Retention plan. Output indices are drawn before the run: the sampling
  // distributions depend only on the schedule.
  std::vector<char> keep(static_cast<std::size_t>(T) + 1, 0);
  if (config.retention == RetentionPolicy::All) {
    std::fill(keep.begin() + 1, keep.end(), 1);
  } else if (config.retention == RetentionPolicy::FinalPhasePlusSampled) {
    const std::int64_t final_start = schedule.phase_start(schedule.phase_count());
    for (std::int64_t t = final_start; t <= T; ++t) keep[static_cast<std::size_t>(t)] = 1;
  }
  Rng output_rng = make_rng(config.seed, RunStream::OutputSampler);
  for (const auto& rule : config.output_rules) {
    if (rule.samples()) {
      const std::int64_t idx = output_weights(rule.kind, schedule).sample(output_rng);
      tr.presampled.emplace_back(rule, idx);
      keep[static_cast<std::size_t>(idx)] = 1;
    } else if (rule.kind == OutputRuleKind::SuffixWeightedAverage && T >= 2) {
      const std::int64_t t_star =
          suffix_start_phase(rule.mu, config.schedule.eta0, config.schedule.alpha, T);
      if (t_star > schedule.phase_count()) {
        tr.notes.push_back("suffix average start phase " + std::to_string(t_star) +
                           " exceeds the phase count; suffix output unavailable");
        continue;
      }
      const std::int64_t start = schedule.phase_start(std::max<std::int64_t>(1, t_star));
      for (std::int64_t t = start; t <= T; ++t) keep[static_cast<std::size_t>(t)] = 1;
    }
  }

  Rng rng = make_rng(config.seed, RunStream::Oracle);
  Vector x = config.x0;
  if (!problem.feasible_set().contains(x)) {
    tr.notes.push_back("x0 was outside the feasible set and has been projected");
    problem.feasible_set().project_in_place(x);
  }
  Vector g(x.size());
  Vector full(x.size());

  auto summarize_point = [&](std::int64_t t, std::int64_t phase, double eta) {
    IterationRecord r;
    r.t = t;
    r.phase = phase;
    r.eta = eta;
    r.f_value = problem.value(x);
    problem.gradient_into(x, full);
    r.grad_norm2 = full.squaredNorm();
    if (consts.x_star) r.dist2_to_star = dist2(x, consts.x_star);
    return r;
  };

  tr.initial = summarize_point(0, 0, 0.0);
  tr.records.reserve(static_cast<std::size_t>(T));
  std::int64_t phase_start = 1;
  std::int64_t current_phase = 0;
  for (std::int64_t t = 1; t <= T; ++t) {
    if (keep[static_cast<std::size_t>(t)]) tr.iterates.emplace(t, x);
    const std::int64_t phase = schedule.phase(t);
    if (phase != current_phase) {
      current_phase = phase;
      phase_start = t;
    }
    const double eta = schedule.step_size(t);
    const OracleContext ctx{t, phase, t - phase_start + 1, eta};
    problem.stochastic_gradient_into(x, rng, ctx, g);
    x -= eta * g;
    problem.feasible_set().project_in_place(x);
    if (!x.allFinite()) {
      tr.diverged = true;
      tr.divergence_step = t;
      tr.notes.push_back("divergence: non-finite iterate at t = " + std::to_string(t));
      break;
    }
    IterationRecord r;
    if (config.track_every_step || t == T) {
      r = summarize_point(t, phase, eta);
    } else {
      r = {t, phase, eta, kNaN, kNaN, std::nullopt};
    }
    if ((config.track_every_step || t == T) && !std::isfinite(r.f_value)) {
      tr.diverged = true;
      tr.divergence_step = t;
      tr.notes.push_back("divergence: non-finite objective at t = " + std::to_string(t));
      break;
    }
    tr.records.push_back(r);
  }
  tr.final_iterate = x;
  return tr;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  CsvWriter csv(out, {"t", "phase", "eta", "f_value", "grad_norm2", "dist2_to_star"});
  for (const auto& r : trajectory.records) {
    csv.cell(r.t).cell(r.phase).cell(r.eta).cell(r.f_value).cell(r.grad_norm2);
    if (r.dist2_to_star) {
      csv.cell(*r.dist2_to_star);
    } else {
      csv.empty();
    }
    csv.end_row();
  }
}

std::vector<NamedMetric> default_metrics(const RunConfig& config) {
  std::vector<NamedMetric> m;
  const auto& k = config.problem->constants();
  m.push_back({"final_f", [](const Trajectory& tr) {
                 return tr.records.empty() ? tr.initial.f_value : tr.records.back().f_value;
               }});
  if (k.f_star) {
    const double fs = *k.f_star;
    m.push_back({"final_gap", [fs](const Trajectory& tr) {
                   return (tr.records.empty() ? tr.initial.f_value : tr.records.back().f_value) - fs;
                 }});
  }
  if (k.x_star) {
    m.push_back({"final_dist2", [](const Trajectory& tr) {
                   const auto& r = tr.records.empty() ? tr.initial : tr.records.back();
                   return r.dist2_to_star.value_or(0.0);
                 }});
  }
  m.push_back({"final_grad_norm2", [](const Trajectory& tr) {
                 return tr.records.empty() ? tr.initial.grad_norm2 : tr.records.back().grad_norm2;
               }});
  m.push_back({"expected_grad_norm2_inv_eta", [](const Trajectory& tr) {
                 return expected_grad_norm2(tr, OutputRuleKind::SampleInvEta);
               }});
  m.push_back({"expected_grad_norm2_eta", [](const Trajectory& tr) {
                 return expected_grad_norm2(tr, OutputRuleKind::SampleEta);
               }});
  for (const auto& rule : config.output_rules) {
    if (rule.kind != OutputRuleKind::SuffixWeightedAverage) continue;
    auto problem = config.problem;
    const double mu = rule.mu;
    m.push_back({"suffix_gap", [problem, mu](const Trajectory& tr) {
                   return problem->gap(suffix_average(tr, mu));
                 }});
  }
  return m;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const SampleStats& ReplicationSummary::metric(std::string_view name) const {
  for (const auto& [n, s] : metrics) {
    if (n == name) return s;
  }
  throw std::out_of_range("replication summary has no metric '" + std::string(name) + "'");
}

const std::vector<double>& ReplicationSummary::metric_values(std::string_view name) const {
  for (const auto& [n, v] : values) {
    if (n == name) return v;
  }
  throw std::out_of_range("replication summary has no metric '" + std::string(name) + "'");
}

ReplicationSummary replicate(const RunConfig& config, std::size_t n_reps, std::uint64_t base_seed,
                             unsigned threads, std::vector<NamedMetric> metrics) {
  if (n_reps == 0) throw std::invalid_argument("replicate: n_reps must be >= 1");
  if (metrics.empty()) metrics = default_metrics(config);

  ReplicationSummary out;
  out.n_reps = n_reps;
  out.seeds.resize(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) out.seeds[r] = derive_seed(base_seed, r);

  std::vector<std::vector<double>> per_rep(n_reps);
  std::vector<char> diverged(n_reps, 0);
  parallel_for(n_reps, threads, [&](std::size_t r) {
    RunConfig c = config;
    c.seed = out.seeds[r];
    const Trajectory tr = sgd_run(c);
    if (tr.diverged) {
      diverged[r] = 1;
      return;
    }
    per_rep[r].reserve(metrics.size());
    for (const auto& m : metrics) per_rep[r].push_back(m.fn(tr));
  });

  for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < n_reps; ++r) {
      if (!diverged[r]) vals.push_back(per_rep[r][mi]);
    }
    out.metrics.emplace_back(metrics[mi].name, summarize(vals));
    out.values.emplace_back(metrics[mi].name, std::move(vals));
  }
  out.n_diverged = static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), 1));
  return out;
}

}  // namespace stepdecay
