#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stepdecay/bounds.hpp"
#include "stepdecay/harness.hpp"
#include "stepdecay/optimizer.hpp"

namespace stepdecay {

using Json = nlohmann::ordered_json;

/// Validation or resolution failure. what() carries one path-qualified
/// message per problem, e.g. "config.schedule.alpa: unknown key".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// The published schema (schema/experiment.schema.json), parsed.
const Json& experiment_schema();

/// Checks doc against the supported JSON-Schema subset: type, properties,
/// additionalProperties, required, items, enum, minimum, exclusiveMinimum.
void validate_against_schema(const Json& doc, const Json& schema = experiment_schema());

/// Reads a config file. A run manifest is accepted too: its
/// "resolved_config" member is used.
Json load_config(const std::string& path);

/// Applies "a.b.c=value". value is parsed as JSON when possible, otherwise
/// taken as a string.
void apply_override(Json& doc, std::string_view assignment);

/// Validates, then fills every default so the result describes the run
/// completely. Idempotent.
Json resolve_config(Json doc);

ProblemPtr build_problem(const Json& resolved, std::int64_t T);
/// Schedule for horizon T: step decay without S takes its partition from
/// schedule.mode; target_eta_T is solved into a0 or beta.
ScheduleSpec build_schedule(const Json& resolved, std::int64_t T);
std::vector<OutputRule> build_output_rules(const Json& resolved);
Vector build_x0(const Json& resolved, std::size_t dimension);
RunConfig build_run_config(const Json& resolved);
RateExperiment build_rate_experiment(const Json& resolved);
RobustnessSweep build_robustness_sweep(const Json& resolved);

/// Bound inputs from the "bound" object; fields it leaves out are taken from
/// the problem constants, the schedule and x0 when known.
BoundInputs bound_inputs_from(const Json& bound, const StochasticProblem* problem,
                              const ScheduleSpec* schedule, const Vector* x0);

Json schedule_to_json(const ScheduleSpec& spec);

}  // namespace stepdecay
