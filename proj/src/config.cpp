#include "stepdecay/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "schema_text.hpp"
#include "stepdecay/data_io.hpp"

namespace stepdecay {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "\n";
    out += p;
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool type_matches(const Json& v, std::string_view type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  return false;
}

void check(const Json& v, const Json& schema, const std::string& path, std::vector<std::string>& errs) {
  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    std::string expected;
    if (it->is_array()) {
      for (const auto& t : *it) {
        ok = ok || type_matches(v, t.get<std::string>());
        expected += (expected.empty() ? "" : " or ") + t.get<std::string>();
      }
    } else {
      expected = it->get<std::string>();
      ok = type_matches(v, expected);
    }
    if (!ok) {
      errs.push_back(path + ": expected " + expected + ", got " + v.dump());
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end() && v.is_string()) {
    if (std::find(it->begin(), it->end(), v) == it->end()) {
      std::string allowed;
      for (const auto& e : *it) allowed += (allowed.empty() ? "" : ", ") + e.get<std::string>();
      errs.push_back(path + ": " + v.dump() + " is not one of " + allowed);
    }
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) {
      errs.push_back(path + ": must be >= " + it->dump());
    }
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && !(x > it->get<double>())) {
      errs.push_back(path + ": must be > " + it->dump());
    }
  }
  if (v.is_object()) {
    const auto props = schema.find("properties");
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, child] : v.items()) {
      const std::string child_path = path + "." + key;
      if (props != schema.end() && props->contains(key)) {
        check(child, (*props)[key], child_path, errs);
      } else if (closed) {
        std::string msg = child_path + ": unknown key";
        if (props != schema.end()) {
          std::string best;
          std::size_t best_d = 3;
          for (const auto& [known, _] : props->items()) {
            const std::size_t d = edit_distance(key, known);
            if (d < best_d) {
              best_d = d;
              best = known;
            }
          }
          if (!best.empty()) msg += " (did you mean '" + best + "'?)";
        }
        errs.push_back(msg);
      }
    }
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& r : *req) {
        if (!v.contains(r.get<std::string>())) {
          errs.push_back(path + "." + r.get<std::string>() + ": required key is missing");
        }
      }
    }
  }
  if (v.is_array()) {
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(v[i], *items, path + "[" + std::to_string(i) + "]", errs);
      }
    }
  }
}

[[noreturn]] void fail(const std::string& message) { throw ConfigError({message}); }

std::string kind_of(const Json& resolved) {
  return resolved.at("problem").at("kind").get<std::string>();
}

std::vector<double> doubles(const Json& arr) { return arr.get<std::vector<double>>(); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

FeasibleSet build_set(const Json& set, std::size_t d) {
  const std::string kind = set.at("kind").get<std::string>();
  if (kind == "all") return FeasibleSet::all_space();
  if (kind == "box") {
    if (!set.contains("lo") || !set.contains("hi")) fail("config.problem.set: box needs lo and hi");
    const double lo = set["lo"].get<double>();
    const double hi = set["hi"].get<double>();
    if (!(lo <= hi)) fail("config.problem.set: box needs lo <= hi");
    return FeasibleSet::box(d, lo, hi);
  }
  if (!set.contains("radius")) fail("config.problem.set.radius: required for a ball");
  Vector center = Vector::Zero(static_cast<Eigen::Index>(d));
  if (set.contains("center")) {
    const auto c = doubles(set["center"]);
    if (c.size() != d) fail("config.problem.set.center: length must equal the dimension");
    center = to_vector(c);
  }
  return FeasibleSet::ball(center, set["radius"].get<double>());
}

std::shared_ptr<const SparseDataset> build_dataset(const Json& data) {
  if (data.contains("path")) {
    std::optional<std::size_t> d;
    if (data.contains("d")) d = data["d"].get<std::size_t>();
    return std::make_shared<const SparseDataset>(load_libsvm(data["path"].get<std::string>(), d));
  }
  const Json& s = data.at("synth");
  return std::make_shared<const SparseDataset>(
      synth_logistic_data(s.at("n").get<std::size_t>(), s.at("d").get<std::size_t>(),
                          s.at("separation").get<double>(), s.at("seed").get<std::uint64_t>()));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

const Json& experiment_schema() {
  static const Json schema = Json::parse(detail::kExperimentSchema);
  return schema;
}

void validate_against_schema(const Json& doc, const Json& schema) {
  std::vector<std::string> errs;
  check(doc, schema, "config", errs);
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError({"config file '" + path + "': " + e.what()});
  }
  if (doc.is_object() && doc.contains("resolved_config")) return doc["resolved_config"];
  return doc;
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError({"override '" + std::string(assignment) + "': expected key.path=value"});
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError({"override '" + key + "': empty path segment"});
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError({"override '" + key + "': '" + part + "' is not inside an object"});
      *node = Json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

Json resolve_config(Json doc) {
  if (!doc.is_object()) throw ConfigError({"config: top level must be an object"});
  doc.erase("threads");
  doc.erase("out_dir");
  validate_against_schema(doc);

  std::string kind;
  if (doc.contains("problem")) {
    Json& p = doc["problem"];
    kind = p["kind"].get<std::string>();
    if (kind == "quadratic") {
      std::size_t d = p.value("dimension", std::size_t{0});
      if (d == 0 && p.contains("spectrum")) d = p["spectrum"].size();
      if (d == 0 && p.contains("x_star")) d = p["x_star"].size();
      if (d == 0) d = 1;
      p["dimension"] = d;
      if (!p.contains("spectrum")) p["spectrum"] = std::vector<double>(d, 1.0);
      if (!p.contains("x_star")) p["x_star"] = std::vector<double>(d, 0.0);
      if (!p.contains("noise")) p["noise"] = Json{{"kind", "none"}};
      if (!p.contains("set")) p["set"] = Json{{"kind", "all"}};
    } else if (kind == "nonconvex") {
      if (!p.contains("dimension")) p["dimension"] = 1;
      if (!p.contains("V2")) p["V2"] = 1.0;
    } else if (kind == "logistic") {
      if (!p.contains("lambda")) p["lambda"] = 1e-4;
      if (!p.contains("batch_size")) p["batch_size"] = 1;
      if (!p.contains("set")) p["set"] = Json{{"kind", "all"}};
      if (!p.contains("data")) fail("config.problem.data: required for a logistic problem");
      Json& data = p["data"];
      if (data.contains("path") == data.contains("synth")) {
        fail("config.problem.data: give exactly one of 'path' or 'synth'");
      }
      if (data.contains("synth")) {
        Json& s = data["synth"];
        if (!s.contains("n")) s["n"] = 2000;
        if (!s.contains("d")) s["d"] = 20;
        if (!s.contains("separation")) s["separation"] = 2.0;
        if (!s.contains("seed")) s["seed"] = 0;
      }
    } else if (kind == "adversarial") {
      if (!p.contains("alpha")) {
        p["alpha"] = doc.contains("schedule") ? doc["schedule"].value("alpha", 2.0) : 2.0;
      }
    }
  }

  if (doc.contains("schedule")) {
    Json& s = doc["schedule"];
    const std::string v = s["variant"].get<std::string>();
    if (!s.contains("eta0")) fail("config.schedule.eta0: required key is missing");
    if (v == "step_decay") {
      if (!s.contains("alpha")) s["alpha"] = 2.0;
      if (!s.contains("S") && !s.contains("mode")) {
        s["mode"] = kind == "nonconvex" ? "nonconvex" : "strongly_convex";
      }
    } else if (v == "inverse_t" || v == "inverse_sqrt_t") {
      if (!s.contains("offset")) s["offset"] = 1.0;
      if (!s.contains("a0") && !s.contains("target_eta_T")) {
        fail("config.schedule: " + v + " needs a0 or target_eta_T");
      }
    } else if (v == "exp_decay") {
      if (!s.contains("beta") && !s.contains("target_eta_T")) {
        fail("config.schedule: exp_decay needs beta or target_eta_T");
      }
    } else if (v == "hazan_kale") {
      if (!s.contains("T0")) s["T0"] = 1;
    }
  }

  if (!doc.contains("x0") && !kind.empty()) {
    doc["x0"] = (kind == "adversarial" || kind == "logistic") ? 0.0 : 1.0;
  }
  if (!doc.contains("output_rules")) doc["output_rules"] = Json::array({"last"});
  if (!doc.contains("retention")) doc["retention"] = "final_phase_plus_sampled";
  if (!doc.contains("n_reps")) doc["n_reps"] = 1;
  if (!doc.contains("seed")) doc["seed"] = 0;
  if (!doc.contains("metric") && !kind.empty()) {
    doc["metric"] = kind == "quadratic"   ? "last_dist2"
                    : kind == "nonconvex" ? "grad_norm2_inv_eta"
                                          : "last_gap";
  }
  if (doc.value("metric", "") == "suffix_gap" && !doc.contains("suffix_mu")) {
    const Json& p = doc["problem"];
    if (kind == "quadratic") {
      const auto spec = doubles(p["spectrum"]);
      doc["suffix_mu"] = *std::min_element(spec.begin(), spec.end());
    } else if (kind == "logistic" && p["lambda"].get<double>() > 0.0) {
      doc["suffix_mu"] = p["lambda"];
    } else {
      fail("config.suffix_mu: required for suffix_gap on this problem");
    }
  }
  if (doc.contains("sweep")) {
    Json& s = doc["sweep"];
    if (!s.contains("eta0_grid")) s["eta0_grid"] = log10_grid(-2.0, 3.0, 11);
    if (!s.contains("families")) s["families"] = Json::array({"constant", "step_decay"});
    if (!s.contains("tolerance")) s["tolerance"] = 1.1;
  }
  if (doc.contains("lowerbound")) {
    Json& l = doc["lowerbound"];
    if (!l.contains("delta")) l["delta"] = 0.25;
    if (!l.contains("trials")) l["trials"] = 2000;
  }
  validate_against_schema(doc);
  return doc;
}

ProblemPtr build_problem(const Json& resolved, std::int64_t T) {
  if (!resolved.contains("problem")) fail("config.problem: required key is missing");
  const Json& p = resolved["problem"];
  const std::string kind = p["kind"].get<std::string>();
  try {
    if (kind == "quadratic") {
      const auto d = p["dimension"].get<std::size_t>();
      const auto spectrum = doubles(p["spectrum"]);
      const auto xs = doubles(p["x_star"]);
      if (spectrum.size() != d) fail("config.problem.spectrum: length must equal the dimension");
      if (xs.size() != d) fail("config.problem.x_star: length must equal the dimension");
      const Json& n = p["noise"];
      const std::string nk = n["kind"].get<std::string>();
      NoiseModel noise = NoiseModel::none();
      if (nk == "gaussian") {
        if (!n.contains("sigma2")) fail("config.problem.noise.sigma2: required for gaussian noise");
        noise = NoiseModel::gaussian(n["sigma2"].get<double>());
      } else if (nk == "sphere") {
        if (!n.contains("radius")) fail("config.problem.noise.radius: required for sphere noise");
        noise = NoiseModel::sphere(n["radius"].get<double>());
      }
      return make_quadratic(d, spectrum, to_vector(xs), noise, build_set(p["set"], d));
    }
    if (kind == "nonconvex") {
      return make_bounded_nonconvex(p["dimension"].get<std::size_t>(), p["V2"].get<double>());
    }
    if (kind == "logistic") {
      auto data = build_dataset(p["data"]);
      const std::size_t d = data->d;
      return make_logistic(std::move(data), p["lambda"].get<double>(),
                           p["batch_size"].get<std::size_t>(), build_set(p["set"], d));
    }
    return make_adversarial_lower_bound(T, p["alpha"].get<double>());
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("config.problem: ") + e.what()});
  } catch (const std::domain_error& e) {
    throw ConfigError({std::string("config.problem: ") + e.what()});
  }
}

ScheduleSpec build_schedule(const Json& resolved, std::int64_t T) {
  if (!resolved.contains("schedule")) fail("config.schedule: required key is missing");
  const Json& s = resolved["schedule"];
  const ScheduleKind kind = schedule_kind_from_string(s["variant"].get<std::string>());
  const double eta0 = s["eta0"].get<double>();
  ScheduleSpec spec;
  try {
    switch (kind) {
      case ScheduleKind::Constant:
        spec = ScheduleSpec::constant(eta0);
        break;
      case ScheduleKind::InverseT:
      case ScheduleKind::InverseSqrtT: {
        const double offset = s["offset"].get<double>();
        double a0 = 0.0;
        if (s.contains("target_eta_T")) {
          if (offset != 1.0) fail("config.schedule: target_eta_T assumes offset 1");
          a0 = solve_tail_coefficient(eta0, s["target_eta_T"].get<double>(), T, kind);
        } else {
          a0 = s["a0"].get<double>();
        }
        spec = kind == ScheduleKind::InverseT ? ScheduleSpec::inverse_t(eta0, a0, offset)
                                              : ScheduleSpec::inverse_sqrt_t(eta0, a0, offset);
        break;
      }
      case ScheduleKind::ExpDecay: {
        const double beta = s.contains("target_eta_T")
                                ? solve_tail_coefficient(eta0, s["target_eta_T"].get<double>(), T, kind)
                                : s["beta"].get<double>();
        spec = ScheduleSpec::exp_decay(eta0, beta);
        break;
      }
      case ScheduleKind::StepDecay: {
        const double alpha = s["alpha"].get<double>();
        if (s.contains("S")) {
          std::optional<std::int64_t> phases;
          if (s.contains("phases")) phases = s["phases"].get<std::int64_t>();
          spec = ScheduleSpec::step_decay(eta0, alpha, s["S"].get<std::int64_t>(), phases);
        } else {
          spec = step_decay_for(eta0, alpha, T, phase_mode_from_string(s["mode"].get<std::string>()));
        }
        break;
      }
      case ScheduleKind::HazanKale:
        spec = ScheduleSpec::hazan_kale(eta0, s["T0"].get<std::int64_t>());
        break;
    }
    validate(spec, T);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError({std::string("config.schedule: ") + e.what()});
  }
  return spec;
}

std::vector<OutputRule> build_output_rules(const Json& resolved) {
  std::vector<OutputRule> rules;
  const Json& arr = resolved.at("output_rules");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Json& r = arr[i];
    const std::string path = "config.output_rules[" + std::to_string(i) + "]";
    const std::string name = r.is_string() ? r.get<std::string>() : r.value("rule", "");
    if (name.empty()) fail(path + ".rule: required key is missing");
    OutputRuleKind kind{};
    try {
      kind = output_rule_kind_from_string(name);
    } catch (const std::invalid_argument& e) {
      fail(path + ": " + e.what());
    }
    OutputRule rule{kind, 0.0};
    if (kind == OutputRuleKind::SuffixWeightedAverage) {
      if (r.is_object() && r.contains("mu")) {
        rule.mu = r["mu"].get<double>();
      } else if (resolved.contains("suffix_mu")) {
        rule.mu = resolved["suffix_mu"].get<double>();
      } else {
        fail(path + ".mu: required for suffix_average");
      }
    }
    rules.push_back(rule);
  }
  return rules;
}

Vector build_x0(const Json& resolved, std::size_t dimension) {
  const Json& x0 = resolved.at("x0");
  if (x0.is_number()) return Vector::Constant(static_cast<Eigen::Index>(dimension), x0.get<double>());
  const auto v = doubles(x0);
  if (v.size() != dimension) {
    fail("config.x0: length " + std::to_string(v.size()) + " does not match dimension " +
         std::to_string(dimension));
  }
  return to_vector(v);
}

RunConfig build_run_config(const Json& resolved) {
  if (!resolved.contains("T")) fail("config.T: required key is missing");
  RunConfig cfg;
  cfg.T = resolved["T"].get<std::int64_t>();
  cfg.problem = build_problem(resolved, cfg.T);
  cfg.problem_id = kind_of(resolved);
  if (const auto* adv = dynamic_cast<const AdversarialLowerBound*>(cfg.problem.get())) {
    cfg.schedule = adv->schedule_spec();
  } else {
    cfg.schedule = build_schedule(resolved, cfg.T);
  }
  cfg.x0 = build_x0(resolved, cfg.problem->dimension());
  cfg.output_rules = build_output_rules(resolved);
  cfg.seed = resolved["seed"].get<std::uint64_t>();
  cfg.retention = retention_from_string(resolved["retention"].get<std::string>());
  return cfg;
}

BoundInputs bound_inputs_from(const Json& bound, const StochasticProblem* problem,
                              const ScheduleSpec* schedule, const Vector* x0) {
  BoundInputs in;
  if (problem) {
    const auto& k = problem->constants();
    in.L = k.L;
    in.mu = k.mu;
    in.V2 = k.V2;
    in.G2 = k.G2;
    in.f_max = k.f_max;
    in.D2 = k.D2;
    if (x0 && k.x_star) in.R = (*x0 - *k.x_star).squaredNorm();
    if (x0 && k.f_star) in.f1_gap = problem->value(*x0) - *k.f_star;
  }
  if (schedule) {
    in.eta0 = schedule->eta0;
    if (schedule->kind == ScheduleKind::StepDecay) in.alpha = schedule->alpha;
    if (schedule->kind == ScheduleKind::ExpDecay) in.beta = schedule->beta;
  }
  auto take = [&](const char* key, std::optional<double>& slot) {
    if (bound.contains(key)) slot = bound[key].get<double>();
  };
  take("eta0", in.eta0);
  take("alpha", in.alpha);
  take("beta", in.beta);
  take("L", in.L);
  take("mu", in.mu);
  take("V2", in.V2);
  take("G2", in.G2);
  take("f_max", in.f_max);
  take("D2", in.D2);
  take("R", in.R);
  take("f1_gap", in.f1_gap);
  take("delta", in.delta);
  return in;
}

RateExperiment build_rate_experiment(const Json& resolved) {
  if (!resolved.contains("T_grid")) fail("config.T_grid: required key is missing");
  RateExperiment exp;
  exp.T_grid = resolved["T_grid"].get<std::vector<std::int64_t>>();
  if (exp.T_grid.size() < 3) fail("config.T_grid: need at least 3 grid points");
  if (kind_of(resolved) == "adversarial") fail("config.problem.kind: grid does not support 'adversarial'; use lowerbound");
  exp.problem = build_problem(resolved, exp.T_grid.front());
  exp.problem_id = kind_of(resolved);
  exp.x0 = build_x0(resolved, exp.problem->dimension());
  exp.schedule = [resolved](std::int64_t T) { return build_schedule(resolved, T); };
  exp.metric = error_metric_from_string(resolved["metric"].get<std::string>());
  if (resolved.contains("suffix_mu")) exp.suffix_mu = resolved["suffix_mu"].get<double>();
  exp.n_reps = resolved["n_reps"].get<std::size_t>();
  exp.base_seed = resolved["seed"].get<std::uint64_t>();
  if (resolved.contains("bound")) {
    const Json& b = resolved["bound"];
    try {
      exp.bound = bound_id_from_string(b["id"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(std::string("config.bound.id: ") + e.what());
    }
    const ScheduleSpec first = exp.schedule(exp.T_grid.front());
    exp.bound_inputs = bound_inputs_from(b, exp.problem.get(), &first, &exp.x0);
  }
  return exp;
}

RobustnessSweep build_robustness_sweep(const Json& resolved) {
  if (!resolved.contains("T")) fail("config.T: required key is missing");
  const Json& s = resolved.at("sweep");
  RobustnessSweep sweep;
  sweep.T = resolved["T"].get<std::int64_t>();
  sweep.problem = build_problem(resolved, sweep.T);
  sweep.x0 = build_x0(resolved, sweep.problem->dimension());
  sweep.eta0_grid = s["eta0_grid"].get<std::vector<double>>();
  sweep.tolerance = s["tolerance"].get<double>();
  sweep.n_reps = resolved["n_reps"].get<std::size_t>();
  sweep.base_seed = resolved["seed"].get<std::uint64_t>();
  for (const auto& f : s["families"]) {
    const std::string name = f.get<std::string>();
    Json base = resolved;
    if (!base.contains("schedule")) base["schedule"] = Json::object();
    base["schedule"]["variant"] = name;
    base["schedule"]["eta0"] = 1.0;
    base.erase("sweep");
    base = resolve_config(base);
    // Fail early if the family cannot be built.
    build_schedule(base, sweep.T);
    sweep.families.push_back({name, [base, T = sweep.T](double eta0) {
                                Json b = base;
                                b["schedule"]["eta0"] = eta0;
                                return build_schedule(b, T);
                              }});
  }
  return sweep;
}

Json schedule_to_json(const ScheduleSpec& spec) {
  Json j;
  j["variant"] = std::string(to_string(spec.kind));
  j["eta0"] = spec.eta0;
  switch (spec.kind) {
    case ScheduleKind::Constant:
      break;
    case ScheduleKind::InverseT:
    case ScheduleKind::InverseSqrtT:
      j["a0"] = spec.a0;
      j["offset"] = spec.offset;
      break;
    case ScheduleKind::StepDecay:
      j["alpha"] = spec.alpha;
      j["S"] = spec.S;
      if (spec.phases) j["phases"] = *spec.phases;
      break;
    case ScheduleKind::ExpDecay:
      j["beta"] = spec.beta;
      break;
    case ScheduleKind::HazanKale:
      j["T0"] = spec.T0;
      break;
  }
  return j;
}

}  // namespace stepdecay
