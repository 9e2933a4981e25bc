#include "stepdecay/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "stepdecay/config.hpp"
#include "stepdecay/data_io.hpp"
#include "stepdecay/random.hpp"

namespace stepdecay {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSeedRule =
    "replication r of base seed s runs with splitmix64(s ^ splitmix64(r + 1)); within a run, "
    "stream 0 feeds the oracle and stream 1 the output sampler";

struct Common {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config (or a run manifest)");
  sub->add_option("--out-dir", c.out_dir, "Output directory");
  sub->add_option("--seed", c.seed, "Base seed (overrides the config)");
  sub->add_option("--threads", c.threads, "Worker cap; results do not depend on it")->check(CLI::PositiveNumber);
  sub->add_option("--set", c.sets, "Override, key.path=value (repeatable)");
}

Json raw_config(const Common& c) {
  Json doc = c.config.empty() ? Json::object() : load_config(c.config);
  for (const auto& s : c.sets) apply_override(doc, s);
  if (c.seed) doc["seed"] = *c.seed;
  return doc;
}

fs::path output_dir(const Common& c, const Json& raw) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (raw.contains("out_dir") && raw["out_dir"].is_string()) return raw["out_dir"].get<std::string>();
  if (const char* env = std::getenv("STEPDECAY_LAB_OUT"); env && *env) return env;
  return "stepdecay_out";
}

unsigned thread_count(const Common& c, const Json& raw) {
  if (c.threads) return *c.threads;
  if (raw.contains("threads") && raw["threads"].is_number_integer()) return raw["threads"].get<unsigned>();
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

class Manifest {
 public:
  Manifest(std::string command, Json resolved) {
    doc_["tool"] = "stepdecay-lab";
    doc_["command"] = std::move(command);
    doc_["resolved_config"] = std::move(resolved);
    doc_["seed_rule"] = kSeedRule;
    doc_["seeds"] = Json::array();
    doc_["outputs"] = Json::array();
    doc_["results"] = Json::object();
  }
  Json& results() { return doc_["results"]; }
  void seed(std::uint64_t s) { doc_["seeds"].push_back(s); }
  void output(const std::string& name) { doc_["outputs"].push_back(name); }
  void note(const std::string& n) {
    if (!doc_.contains("notes")) doc_["notes"] = Json::array();
    doc_["notes"].push_back(n);
  }
  void write(const fs::path& dir) const { write_text(dir / "manifest.json", doc_.dump(2) + "\n"); }

 private:
  Json doc_;
};

double sanitize(double v) { return std::isfinite(v) ? v : 0.0; }

int cmd_run(const Common& c, std::ostream& out, std::ostream& err) {
  const Json raw = raw_config(c);
  const Json resolved = resolve_config(raw);
  const RunConfig cfg = build_run_config(resolved);
  const fs::path dir = output_dir(c, raw);
  fs::create_directories(dir);

  Manifest manifest("run", resolved);
  manifest.results()["schedule"] = schedule_to_json(cfg.schedule);
  manifest.seed(cfg.seed);

  const Trajectory tr = sgd_run(cfg);
  for (const auto& n : tr.notes) {
    err << "note: " << n << "\n";
    manifest.note(n);
  }
  {
    std::ofstream f(dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(f, tr);
  }
  manifest.output("trajectory.csv");

  if (tr.diverged) {
    manifest.results()["diverged"] = true;
    manifest.results()["divergence_step"] = *tr.divergence_step;
    manifest.write(dir);
    err << "error: run diverged at t = " << *tr.divergence_step << "\n";
    return kExitDiverged;
  }

  {
    std::ofstream f(dir / "outputs.csv", std::ios::binary);
    CsvWriter csv(f, {"rule", "index", "f_value", "gap"});
    const auto& k = cfg.problem->constants();
    for (const auto& rule : cfg.output_rules) {
      Vector x;
      std::optional<std::int64_t> index;
      if (rule.kind == OutputRuleKind::LastIterate) {
        x = tr.final_iterate;
        index = cfg.T + 1;
      } else if (rule.samples()) {
        index = tr.presampled_index(rule);
        x = tr.iterate(*index);
      } else {
        x = suffix_average(tr, rule.mu);
      }
      csv.cell(rule.name());
      if (index) {
        csv.cell(*index);
      } else {
        csv.empty();
      }
      const double fx = cfg.problem->value(x);
      csv.cell(fx);
      if (k.f_star) {
        csv.cell(fx - *k.f_star);
      } else {
        csv.empty();
      }
      csv.end_row();
    }
  }
  manifest.output("outputs.csv");

  const auto n_reps = resolved["n_reps"].get<std::size_t>();
  if (n_reps > 1) {
    const ReplicationSummary rs = replicate(cfg, n_reps, cfg.seed, thread_count(c, raw));
    std::ofstream f(dir / "replicates.csv", std::ios::binary);
    CsvWriter csv(f, {"metric", "n", "n_diverged", "mean", "stddev", "ci_half"});
    for (const auto& [name, s] : rs.metrics) {
      csv.cell(name).cell(s.n).cell(rs.n_diverged).cell(s.mean).cell(s.stddev).cell(s.ci_half);
      csv.end_row();
    }
    for (auto s : rs.seeds) manifest.seed(s);
    manifest.output("replicates.csv");
    manifest.results()["n_diverged"] = rs.n_diverged;
  }

  const auto& last = tr.records.empty() ? tr.initial : tr.records.back();
  manifest.results()["final_f_value"] = last.f_value;
  manifest.write(dir);
  out << "final f_value " << format_double(last.f_value) << "\n";
  out << "wrote " << (dir / "trajectory.csv").string() << "\n";
  return kExitOk;
}

int cmd_grid(const Common& c, std::ostream& out, std::ostream& err) {
  const Json raw = raw_config(c);
  const Json resolved = resolve_config(raw);
  const fs::path dir = output_dir(c, raw);
  const unsigned threads = thread_count(c, raw);
  fs::create_directories(dir);
  Manifest manifest("grid", resolved);

  if (resolved.contains("sweep")) {
    RobustnessSweep sweep = build_robustness_sweep(resolved);
    sweep.threads = threads;
    const RobustnessResult res = robustness_sweep(sweep);
    {
      std::ofstream f(dir / "robustness.csv", std::ios::binary);
      write_robustness_csv(f, res);
    }
    manifest.output("robustness.csv");
    for (std::size_t r = 0; r < sweep.n_reps; ++r) manifest.seed(derive_seed(sweep.base_seed, r));
    for (const auto& fam : res.families) {
      manifest.results()[fam.family] = {{"min_loss", sanitize(fam.min_loss)},
                                        {"best_eta0", fam.best_eta0},
                                        {"region_lo", sanitize(fam.region_lo)},
                                        {"region_hi", fam.region_hi},
                                        {"width_log10", fam.width_log10}};
      out << fam.family << ": min loss " << format_double(fam.min_loss) << " at eta0 "
          << format_double(fam.best_eta0) << ", robust width " << format_double(fam.width_log10)
          << " decades\n";
    }
    manifest.write(dir);
    return kExitOk;
  }

  RateExperiment exp = build_rate_experiment(resolved);
  exp.threads = threads;
  RateResult res;
  try {
    res = run_rate_experiment(exp);
  } catch (const std::runtime_error& e) {
    if (std::string_view(e.what()).find("diverged") == std::string_view::npos) throw;
    manifest.results()["aborted"] = e.what();
    manifest.write(dir);
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  {
    std::ofstream f(dir / "rate.csv", std::ios::binary);
    write_rate_csv(f, res);
  }
  manifest.output("rate.csv");
  Json schedules = Json::array();
  for (const auto& cell : res.cells) {
    manifest.seed(cell.seed);
    Json s = schedule_to_json(cell.schedule);
    s["T"] = cell.T;
    schedules.push_back(s);
    if (cell.bound) {
      for (const auto& n : cell.bound->notes) manifest.note("T=" + std::to_string(cell.T) + ": " + n);
    }
  }
  manifest.results()["schedules"] = schedules;
  manifest.results()["slope"] = res.fit.slope;
  manifest.results()["intercept"] = res.fit.intercept;
  manifest.results()["residual"] = res.fit.residual;
  if (exp.bound) manifest.results()["all_dominated"] = res.all_dominated();
  manifest.write(dir);
  out << "fitted slope " << format_double(res.fit.slope) << " (residual "
      << format_double(res.fit.residual) << ")\n";
  if (exp.bound) {
    out << "bound " << to_string(*exp.bound) << (res.all_dominated() ? " holds" : " VIOLATED")
        << " at every grid T\n";
  }
  return kExitOk;
}

struct BoundFlags {
  std::string id;
  std::optional<std::int64_t> T;
  std::optional<double> eta0, alpha, beta, L, mu, V2, G2, f_max, D2, R, f1_gap, delta;
  std::string format = "csv";
};

int cmd_bounds(const Common& c, const BoundFlags& b, std::ostream& out, std::ostream& err) {
  const Json raw = raw_config(c);
  const Json resolved = resolve_config(raw);
  Json bound = resolved.value("bound", Json::object());
  if (!b.id.empty()) bound["id"] = b.id;
  if (!bound.contains("id")) throw ConfigError({"bounds: --id or config.bound.id is required"});
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) bound[key] = *v;
  };
  put("eta0", b.eta0);
  put("alpha", b.alpha);
  put("beta", b.beta);
  put("L", b.L);
  put("mu", b.mu);
  put("V2", b.V2);
  put("G2", b.G2);
  put("f_max", b.f_max);
  put("D2", b.D2);
  put("R", b.R);
  put("f1_gap", b.f1_gap);
  put("delta", b.delta);

  std::int64_t T = 0;
  if (b.T) {
    T = *b.T;
  } else if (resolved.contains("T")) {
    T = resolved["T"].get<std::int64_t>();
  } else {
    throw ConfigError({"bounds: --T or config.T is required"});
  }
  ProblemPtr problem;
  std::optional<ScheduleSpec> schedule;
  std::optional<Vector> x0;
  if (resolved.contains("problem")) {
    problem = build_problem(resolved, T);
    x0 = build_x0(resolved, problem->dimension());
  }
  if (resolved.contains("schedule")) schedule = build_schedule(resolved, T);
  BoundInputs in = bound_inputs_from(bound, problem.get(), schedule ? &*schedule : nullptr,
                                     x0 ? &*x0 : nullptr);
  in.T = T;
  const BoundReport rep = evaluate_bound(bound_id_from_string(bound["id"].get<std::string>()), in);

  std::vector<std::pair<std::string, double>> inputs;
  auto add = [&](const char* name, const std::optional<double>& v) {
    if (v) inputs.emplace_back(name, *v);
  };
  add("eta0", in.eta0);
  add("alpha", in.alpha);
  add("beta", in.beta);
  add("L", in.L);
  add("mu", in.mu);
  add("V2", in.V2);
  add("G2", in.G2);
  add("f_max", in.f_max);
  add("D2", in.D2);
  add("R", in.R);
  add("f1_gap", in.f1_gap);
  add("delta", in.delta);

  if (b.format == "text") {
    out << "bound id " << to_string(rep.id) << "\n";
    out << "T        " << T << "\n";
    for (const auto& [k, v] : inputs) out << std::left << std::setw(9) << k << format_double(v) << "\n";
    for (const auto& [k, v] : rep.constants) out << std::left << std::setw(9) << k << format_double(v) << "\n";
    out << "bound    " << format_double(rep.value) << "\n";
  } else {
    CsvWriter csv(out, {"field", "value"});
    csv.cell("id").cell(to_string(rep.id));
    csv.end_row();
    csv.cell("T").cell(T);
    csv.end_row();
    for (const auto& [k, v] : inputs) {
      csv.cell("input." + k).cell(v);
      csv.end_row();
    }
    for (const auto& [k, v] : rep.constants) {
      csv.cell("constant." + k).cell(v);
      csv.end_row();
    }
    csv.cell("bound").cell(rep.value);
    csv.end_row();
  }
  for (const auto& n : rep.notes) err << "note: " << n << "\n";
  return kExitOk;
}

struct LowerFlags {
  std::optional<std::int64_t> T;
  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<std::size_t> trials;
};

int cmd_lowerbound(const Common& c, const LowerFlags& l, std::ostream& out, std::ostream&) {
  Json raw = raw_config(c);
  if (l.T) raw["T"] = *l.T;
  if (l.delta) raw["lowerbound"]["delta"] = *l.delta;
  if (l.trials) raw["lowerbound"]["trials"] = *l.trials;
  if (!raw.contains("T")) raw["T"] = 65536;
  if (!raw.contains("problem")) raw["problem"] = {{"kind", "adversarial"}};
  if (l.alpha) raw["problem"]["alpha"] = *l.alpha;
  if (!raw.contains("lowerbound")) raw["lowerbound"] = Json::object();
  const Json resolved = resolve_config(raw);
  if (resolved["problem"]["kind"] != "adversarial") {
    throw ConfigError({"config.problem.kind: lowerbound needs the 'adversarial' problem"});
  }
  const auto T = resolved["T"].get<std::int64_t>();
  const double alpha = resolved["problem"]["alpha"].get<double>();
  const double delta = resolved["lowerbound"]["delta"].get<double>();
  const auto trials = resolved["lowerbound"]["trials"].get<std::size_t>();
  const auto seed = resolved["seed"].get<std::uint64_t>();
  const fs::path dir = output_dir(c, raw);
  fs::create_directories(dir);

  const ExceedanceResult res = lower_bound_trial(T, alpha, delta, trials, seed, thread_count(c, raw));
  const LowerBoundThreshold lb = lower_bound_threshold(delta, alpha, T);
  {
    std::ofstream f(dir / "lowerbound.csv", std::ios::binary);
    CsvWriter csv(f, {"trial", "seed", "f_final", "exceeds"});
    for (std::size_t r = 0; r < trials; ++r) {
      csv.cell(r).cell(derive_seed(seed, r)).cell(res.final_values[r]);
      csv.cell(res.final_values[r] >= res.threshold ? 1 : 0);
      csv.end_row();
    }
  }
  Manifest manifest("lowerbound", resolved);
  for (std::size_t r = 0; r < trials; ++r) manifest.seed(derive_seed(seed, r));
  manifest.output("lowerbound.csv");
  auto& rj = manifest.results();
  rj["threshold"] = res.threshold;
  rj["c"] = lb.c;
  rj["K"] = lb.K;
  rj["lemma_applicable"] = lb.lemma_applicable;
  if (!lb.lemma_applicable) rj["lemma_note"] = lb.lemma_note;
  rj["n_exceeding"] = res.n_exceeding;
  rj["frequency"] = res.frequency;
  rj["ci_lower"] = res.ci.lower;
  rj["ci_upper"] = res.ci.upper;
  manifest.write(dir);

  out << "threshold " << format_double(res.threshold) << "\n";
  out << "exceeding " << res.n_exceeding << " / " << trials << " = " << format_double(res.frequency)
      << " (95% CI " << format_double(res.ci.lower) << " .. " << format_double(res.ci.upper) << ")\n";
  if (!lb.lemma_applicable) out << "note: " << lb.lemma_note << "; result is empirical\n";
  return kExitOk;
}

int cmd_sample_dist(const Common& c, std::optional<std::int64_t> T_flag, const std::string& output,
                    std::ostream& out) {
  Json raw = raw_config(c);
  if (T_flag) raw["T"] = *T_flag;
  const Json resolved = resolve_config(raw);
  if (!resolved.contains("T")) throw ConfigError({"config.T: required key is missing"});
  const auto T = resolved["T"].get<std::int64_t>();
  const Schedule schedule(build_schedule(resolved, T), T);
  const auto inv = output_weights(OutputRuleKind::SampleInvEta, schedule);
  const auto eta = output_weights(OutputRuleKind::SampleEta, schedule);
  std::ofstream file;
  if (!output.empty()) file.open(output, std::ios::binary);
  std::ostream& dst = output.empty() ? out : file;
  CsvWriter csv(dst, {"t", "eta", "p_inv_eta", "p_eta"});
  for (std::int64_t t = 1; t <= T; ++t) {
    csv.cell(t).cell(schedule.step_size(t)).cell(inv.p(t)).cell(eta.p(t));
    csv.end_row();
  }
  return kExitOk;
}

void describe_dataset(const SparseDataset& d, std::ostream& out) {
  std::size_t pos = 0, nnz = 0;
  for (const auto& r : d.rows) {
    pos += r.label > 0 ? 1 : 0;
    nnz += r.features.size();
  }
  out << "n " << d.n() << "\nd " << d.d << "\npositives " << pos << "\nnegatives " << d.n() - pos
      << "\nnnz " << nnz << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Step-decay SGD laboratory"};
  app.require_subcommand(1);

  Common common;
  auto* run = app.add_subcommand("run", "Single SGD run: trajectory.csv, outputs.csv, manifest.json");
  add_common(run, common);
  auto* grid = app.add_subcommand("grid", "Rate experiment over T_grid, or a robustness sweep");
  add_common(grid, common);

  BoundFlags bf;
  auto* bounds = app.add_subcommand("bounds", "Evaluate a closed-form bound");
  add_common(bounds, common);
  bounds->add_option("--id", bf.id, "Bound id, e.g. T3.1, T4.1-last, T5.2-lower");
  bounds->add_option("--T", bf.T, "Horizon");
  bounds->add_option("--eta0", bf.eta0);
  bounds->add_option("--alpha", bf.alpha);
  bounds->add_option("--beta", bf.beta);
  bounds->add_option("--L", bf.L);
  bounds->add_option("--mu", bf.mu);
  bounds->add_option("--V2", bf.V2);
  bounds->add_option("--G2", bf.G2);
  bounds->add_option("--f-max", bf.f_max);
  bounds->add_option("--D2", bf.D2);
  bounds->add_option("--R", bf.R, "||x_1 - x*||^2");
  bounds->add_option("--f1-gap", bf.f1_gap, "f(x_1) - f*");
  bounds->add_option("--delta", bf.delta);
  bounds->add_option("--format", bf.format)->check(CLI::IsMember({"csv", "text"}));

  LowerFlags lf;
  auto* lower = app.add_subcommand("lowerbound", "Exceedance trials on the adversarial instance");
  add_common(lower, common);
  lower->add_option("--T", lf.T);
  lower->add_option("--alpha", lf.alpha);
  lower->add_option("--delta", lf.delta);
  lower->add_option("--trials", lf.trials);

  std::optional<std::int64_t> sd_T;
  std::string sd_output;
  auto* sample = app.add_subcommand("sample-dist", "Output distributions as CSV (t,eta,p_inv_eta,p_eta)");
  add_common(sample, common);
  sample->add_option("--T", sd_T);
  sample->add_option("-o,--output", sd_output, "Write here instead of stdout");

  auto* data = app.add_subcommand("data", "Dataset utilities");
  data->require_subcommand(1);
  std::string parse_path;
  std::optional<std::size_t> parse_d;
  auto* dparse = data->add_subcommand("parse", "Parse a LIBSVM file and summarize it");
  dparse->add_option("file", parse_path)->required();
  dparse->add_option("--d", parse_d, "Declared dimension");

  std::size_t syn_n = 2000, syn_d = 20;
  double syn_sep = 2.0;
  std::uint64_t syn_seed = 0;
  std::string syn_out;
  auto* dsynth = data->add_subcommand("synth", "Generate synthetic logistic data (LIBSVM)");
  dsynth->add_option("--n", syn_n)->check(CLI::PositiveNumber);
  dsynth->add_option("--d", syn_d)->check(CLI::PositiveNumber);
  dsynth->add_option("--separation", syn_sep);
  dsynth->add_option("--seed", syn_seed);
  dsynth->add_option("-o,--output", syn_out, "Write here instead of stdout");

  std::string split_path, split_train, split_test;
  double split_fraction = 0.75;
  std::uint64_t split_seed = 0;
  auto* dsplit = data->add_subcommand("split", "Shuffled train/test split");
  dsplit->add_option("file", split_path)->required();
  dsplit->add_option("--fraction", split_fraction);
  dsplit->add_option("--seed", split_seed);
  dsplit->add_option("--train", split_train)->required();
  dsplit->add_option("--test", split_test)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const char* context = "";
  try {
    if (run->parsed()) {
      context = "run";
      return cmd_run(common, out, err);
    }
    if (grid->parsed()) {
      context = "grid";
      return cmd_grid(common, out, err);
    }
    if (bounds->parsed()) {
      context = "bounds";
      return cmd_bounds(common, bf, out, err);
    }
    if (lower->parsed()) {
      context = "lowerbound";
      return cmd_lowerbound(common, lf, out, err);
    }
    if (sample->parsed()) {
      context = "sample-dist";
      return cmd_sample_dist(common, sd_T, sd_output, out);
    }
    context = "data";
    if (dparse->parsed()) {
      describe_dataset(load_libsvm(parse_path, parse_d), out);
    } else if (dsynth->parsed()) {
      const SparseDataset d = synth_logistic_data(syn_n, syn_d, syn_sep, syn_seed);
      if (syn_out.empty()) {
        write_libsvm(out, d);
      } else {
        write_text(syn_out, format_libsvm(d));
      }
    } else if (dsplit->parsed()) {
      const auto [a, b] = train_test_split(load_libsvm(split_path), split_fraction, split_seed);
      write_text(split_train, format_libsvm(a));
      write_text(split_test, format_libsvm(b));
      out << "train " << a.n() << "\ntest " << b.n() << "\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error (" << context << "): invalid configuration\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error (" << context << "): " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error (" << context << "): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error (" << context << "): " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace stepdecay
