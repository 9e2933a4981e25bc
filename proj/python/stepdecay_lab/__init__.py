"""Step-decay SGD lab: Python front end over the C++ core."""

import json as _json

from ._core import (
    ConfigError,
    ParseError,
    PhasePlan,
    Schedule,
    ScheduleSpec,
    bound_ids,
    evaluate_bound,
    lower_bound_threshold,
    lower_bound_trial,
    output_weights,
    parse_libsvm,
    phase_partition,
    rate_fit,
    run_cli,
    suffix_start_phase,
    synth_logistic_data,
)
from . import _core

__all__ = [
    "ConfigError",
    "ParseError",
    "PhasePlan",
    "Schedule",
    "ScheduleSpec",
    "bound_ids",
    "evaluate_bound",
    "experiment_schema",
    "lower_bound_threshold",
    "lower_bound_trial",
    "output_weights",
    "parse_libsvm",
    "phase_partition",
    "rate_fit",
    "resolve_config",
    "run",
    "run_cli",
    "suffix_start_phase",
    "synth_logistic_data",
]


def experiment_schema():
    """The JSON schema experiment configs are validated against."""
    return _json.loads(_core.experiment_schema_json())


def resolve_config(config):
    """Validate a config dict and fill in every default."""
    return _json.loads(_core._resolve_json(_json.dumps(config)))


def run(config):
    """Single SGD run from a config dict.

    Returns a dict with final_iterate, per-step eta / f_value / grad_norm2
    arrays, the divergence flag and the resolved config.
    """
    out = _core._run_json(_json.dumps(config))
    out["resolved_config"] = _json.loads(out["resolved_config"])
    return out
