#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stepdecay/bounds.hpp"
#include "stepdecay/cli.hpp"
#include "stepdecay/config.hpp"
#include "stepdecay/data_io.hpp"
#include "stepdecay/harness.hpp"
#include "stepdecay/optimizer.hpp"
#include "stepdecay/output_rules.hpp"
#include "stepdecay/schedules.hpp"

namespace py = pybind11;
using namespace stepdecay;

namespace {

py::dict report_to_dict(const BoundReport& r) {
  py::dict d;
  d["id"] = std::string(to_string(r.id));
  d["value"] = r.value;
  py::dict constants;
  for (const auto& [name, v] : r.constants) constants[py::str(name)] = v;
  d["constants"] = constants;
  d["notes"] = r.notes;
  return d;
}

template <class T>
void maybe(const py::dict& kw, const char* key, std::optional<T>& slot) {
  if (kw.contains(key) && !kw[key].is_none()) slot = kw[key].cast<T>();
}

BoundInputs inputs_from(std::int64_t T, const py::kwargs& kw) {
  static const char* known[] = {"eta0", "alpha", "beta", "L",  "mu", "V2",    "G2",
                                "f_max", "D2",   "R",    "f1_gap", "delta"};
  for (const auto& item : kw) {
    const auto key = item.first.cast<std::string>();
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw py::key_error("unknown bound input '" + key + "'");
  }
  BoundInputs in;
  in.T = T;
  maybe(kw, "eta0", in.eta0);
  maybe(kw, "alpha", in.alpha);
  maybe(kw, "beta", in.beta);
  maybe(kw, "L", in.L);
  maybe(kw, "mu", in.mu);
  maybe(kw, "V2", in.V2);
  maybe(kw, "G2", in.G2);
  maybe(kw, "f_max", in.f_max);
  maybe(kw, "D2", in.D2);
  maybe(kw, "R", in.R);
  maybe(kw, "f1_gap", in.f1_gap);
  maybe(kw, "delta", in.delta);
  return in;
}

py::array_t<double> to_numpy(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// config in, summary out; the JSON text crosses the boundary so Python never
// sees nlohmann types
py::dict run_json(const std::string& text) {
  const auto resolved = resolve_config(Json::parse(text));
  const auto cfg = build_run_config(resolved);
  const auto tr = sgd_run(cfg);
  const auto n = tr.records.size();
  py::array_t<double> eta(static_cast<py::ssize_t>(n)), f(static_cast<py::ssize_t>(n)),
      g(static_cast<py::ssize_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    eta.mutable_at(i) = tr.records[i].eta;
    f.mutable_at(i) = tr.records[i].f_value;
    g.mutable_at(i) = tr.records[i].grad_norm2;
  }
  py::dict d;
  d["T"] = tr.T;
  d["seed"] = tr.seed;
  d["final_iterate"] = tr.final_iterate;
  d["eta"] = eta;
  d["f_value"] = f;
  d["grad_norm2"] = g;
  d["diverged"] = tr.diverged;
  d["divergence_step"] = tr.divergence_step;
  d["notes"] = tr.notes;
  d["resolved_config"] = resolved.dump();
  return d;
}

py::dict dataset_to_dict(const SparseDataset& data) {
  py::list labels, rows;
  for (const auto& r : data.rows) {
    labels.append(r.label);
    py::list feats;
    for (const auto& e : r.features) feats.append(py::make_tuple(e.index, e.value));
    rows.append(feats);
  }
  py::dict d;
  d["n"] = data.n();
  d["d"] = data.d;
  d["labels"] = labels;
  d["rows"] = rows;
  d["planted"] = data.planted;
  d["libsvm"] = format_libsvm(data);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "step-decay SGD lab";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<ScheduleSpec>(m, "ScheduleSpec")
      .def_static("constant", &ScheduleSpec::constant, py::arg("eta0"))
      .def_static("inverse_t", &ScheduleSpec::inverse_t, py::arg("eta0"), py::arg("a0"), py::arg("offset") = 1.0)
      .def_static("inverse_sqrt_t", &ScheduleSpec::inverse_sqrt_t, py::arg("eta0"), py::arg("a0"),
                  py::arg("offset") = 1.0)
      .def_static("step_decay", &ScheduleSpec::step_decay, py::arg("eta0"), py::arg("alpha"), py::arg("S"),
                  py::arg("phases") = py::none())
      .def_static("exp_decay", &ScheduleSpec::exp_decay, py::arg("eta0"), py::arg("beta"))
      .def_static("hazan_kale", &ScheduleSpec::hazan_kale, py::arg("eta0"), py::arg("T0"))
      .def_static(
          "step_decay_for",
          [](double eta0, double alpha, std::int64_t T, const std::string& mode) {
            return step_decay_for(eta0, alpha, T, phase_mode_from_string(mode));
          },
          py::arg("eta0"), py::arg("alpha"), py::arg("T"), py::arg("mode"))
      .def_property_readonly("kind", [](const ScheduleSpec& s) { return std::string(to_string(s.kind)); })
      .def_readonly("eta0", &ScheduleSpec::eta0)
      .def_readonly("alpha", &ScheduleSpec::alpha)
      .def_readonly("S", &ScheduleSpec::S)
      .def_readonly("phases", &ScheduleSpec::phases)
      .def_readonly("beta", &ScheduleSpec::beta)
      .def("to_json", [](const ScheduleSpec& s) { return schedule_to_json(s).dump(); })
      .def("__repr__", [](const ScheduleSpec& s) { return "ScheduleSpec(" + schedule_to_json(s).dump() + ")"; });

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<ScheduleSpec, std::int64_t>(), py::arg("spec"), py::arg("T"))
      .def_property_readonly("T", &Schedule::horizon)
      .def("step_size", &Schedule::step_size, py::arg("t"))
      .def("phase", &Schedule::phase, py::arg("t"))
      .def("phase_count", &Schedule::phase_count)
      .def("phase_start", &Schedule::phase_start, py::arg("phase"))
      .def("phase_length", &Schedule::phase_length, py::arg("phase"))
      .def("step_sizes", [](const Schedule& s) {
        py::array_t<double> out(static_cast<py::ssize_t>(s.horizon()));
        for (std::int64_t t = 1; t <= s.horizon(); ++t) out.mutable_at(t - 1) = s.step_size(t);
        return out;
      });

  py::class_<PhasePlan>(m, "PhasePlan")
      .def_readonly("S", &PhasePlan::S)
      .def_readonly("N", &PhasePlan::N)
      .def_readonly("T", &PhasePlan::T)
      .def_readonly("ideal_phase_count", &PhasePlan::ideal_phase_count)
      .def_property_readonly("mode", [](const PhasePlan& p) { return std::string(to_string(p.mode)); })
      .def("phase_length", &PhasePlan::phase_length, py::arg("phase"));

  m.def(
      "phase_partition",
      [](double alpha, std::int64_t T, const std::string& mode) {
        return phase_partition(alpha, T, phase_mode_from_string(mode));
      },
      py::arg("alpha"), py::arg("T"), py::arg("mode"));

  m.def(
      "output_weights",
      [](const std::string& rule, const ScheduleSpec& spec, std::int64_t T) {
        return to_numpy(output_weights(output_rule_kind_from_string(rule), spec, T).probabilities());
      },
      py::arg("rule"), py::arg("spec"), py::arg("T"), "P_1..P_T as a float array (index 0 is t = 1).");

  m.def("suffix_start_phase", &suffix_start_phase, py::arg("mu"), py::arg("eta0"), py::arg("alpha"), py::arg("T"));

  m.def("bound_ids", [] {
    std::vector<std::string> ids;
    for (auto id : all_bound_ids()) ids.emplace_back(to_string(id));
    return ids;
  });
  m.def(
      "evaluate_bound",
      [](const std::string& id, std::int64_t T, const py::kwargs& kw) {
        return report_to_dict(evaluate_bound(bound_id_from_string(id), inputs_from(T, kw)));
      },
      py::arg("id"), py::arg("T"));
  m.def(
      "lower_bound_threshold",
      [](double delta, double alpha, std::int64_t T, bool strict) {
        const auto lb =
            lower_bound_threshold(delta, alpha, T, strict ? LemmaMode::Strict : LemmaMode::Empirical);
        py::dict d;
        d["threshold"] = lb.threshold;
        d["c"] = lb.c;
        d["K"] = lb.K;
        d["lemma_applicable"] = lb.lemma_applicable;
        d["lemma_note"] = lb.lemma_note;
        return d;
      },
      py::arg("delta"), py::arg("alpha"), py::arg("T"), py::arg("strict") = false);

  m.def(
      "lower_bound_trial",
      [](std::int64_t T, double alpha, double delta, std::size_t n_trials, std::uint64_t seed, unsigned threads) {
        ExceedanceResult r;
        {
          py::gil_scoped_release release;
          r = lower_bound_trial(T, alpha, delta, n_trials, seed, threads);
        }
        py::dict d;
        d["threshold"] = r.threshold;
        d["n_exceeding"] = r.n_exceeding;
        d["frequency"] = r.frequency;
        d["ci"] = py::make_tuple(r.ci.lower, r.ci.upper);
        d["final_values"] = to_numpy(r.final_values);
        return d;
      },
      py::arg("T"), py::arg("alpha"), py::arg("delta"), py::arg("n_trials"), py::arg("seed") = 0,
      py::arg("threads") = 1);

  m.def(
      "rate_fit",
      [](const std::vector<std::int64_t>& T, const std::vector<double>& errors) {
        const auto fit = rate_fit(T, errors);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["residual"] = fit.residual;
        return d;
      },
      py::arg("T"), py::arg("errors"));

  m.def("_run_json", &run_json, py::arg("config_json"));
  m.def(
      "_resolve_json", [](const std::string& text) { return resolve_config(Json::parse(text)).dump(); },
      py::arg("config_json"));
  m.def("experiment_schema_json", [] { return experiment_schema().dump(); });

  m.def(
      "parse_libsvm", [](const std::string& text) { return dataset_to_dict(parse_libsvm(std::string_view(text))); },
      py::arg("text"));
  m.def(
      "synth_logistic_data",
      [](std::size_t n, std::size_t d, double separation, std::uint64_t seed) {
        return dataset_to_dict(synth_logistic_data(n, d, separation, seed));
      },
      py::arg("n"), py::arg("d"), py::arg("separation"), py::arg("seed"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "stepdecay-lab");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
