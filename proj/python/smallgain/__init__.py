"""Small-gain certificates for interconnected discrete-time systems."""

import json

from . import _core
from ._core import (
    ConfigError,
    ControllerDesign,
    Gain,
    LurePlant,
    assemble_lmi,
    assemble_lmi_reduced,
    esn_margin,
    experiment_kinds,
    fit_kl_bound,
    fpe,
    lambda_s,
    property_suite_names,
    qrc_margin,
    schatten1,
    search_lmi,
    small_gain_holds,
    sum_to_max_bound,
    trace_bound,
    train_readout,
)


def run_experiment(kind, preset="full", seed=1, out="out", threads=1, config=None):
    """Run one experiment; returns (report dict, summary lines, ok)."""
    text = json.dumps(config) if config is not None else ""
    report, summary, ok = _core._run_experiment(kind, preset, seed, str(out), threads, text)
    return json.loads(report), list(summary), ok


def run_property_suite(name, seed=1, scale=1.0):
    return json.loads(_core._run_property_suite(name, seed, scale))

