"""Dynamic average consensus with private reference masking.

Agent indices are 1-based throughout this package.
"""

import json

from ._core import (
    DacsimError,
    Graph,
    build_graph,
    compute_masks,
    draw_eta,
    eavesdrop,
    golden_eta,
)
from . import _core

__all__ = [
    "DacsimError",
    "Graph",
    "build_graph",
    "compute_masks",
    "compute_gamma",
    "draw_eta",
    "eavesdrop",
    "golden_config",
    "golden_eta",
    "simulate",
    "verify",
    "run",
    "compare",
]


def golden_config():
    """The six-agent ring scenario as a config dict."""
    return json.loads(_core.golden_config_json())


def compute_gamma(signals):
    return _core.compute_gamma(json.dumps(signals))


def simulate(graph, signals, masks=None, **engine):
    """Conventional run, or masked run when `masks` is given.

    `signals` is a list of dicts with keys kind, amplitude, omega, phase,
    offset. Engine keywords: beta, dt, t_final, record_every, steady_start.
    """
    return _core.simulate(graph, json.dumps(signals), masks, **engine)


def verify(config=None, checks=()):
    config = golden_config() if config is None else config
    return json.loads(_core.verify_json(json.dumps(config), list(checks)))


def run(config, out_dir, csv=True):
    _core.run_json(json.dumps(config), str(out_dir), csv)


def compare(config, out_dir):
    return json.loads(_core.compare_json(json.dumps(config), str(out_dir)))
