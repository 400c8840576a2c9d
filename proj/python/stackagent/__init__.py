"""Python bindings for the stackagent core."""

import json
import os
from pathlib import Path

from . import _core
from ._core import (
    Error,
    Simulator,
    canonical_action,
    estimate_tokens,
    gold_trace,
    is_page_operation,
    objective_for,
    parse_response,
    replay_trace,
    truncate_to_budget,
)


def data_dir():
    """Shipped policies, demos and suites. STACKAGENT_DATA_DIR overrides."""
    env = os.environ.get("STACKAGENT_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).with_name("data")


def generate_scenario(seed, kind=""):
    return json.loads(_core.generate_scenario(seed, kind))


def run_gold_episode(kind, seed, agent="stacked", library_dir=None):
    """Runs the scripted gold agent; returns (summary, trace events)."""
    library = library_dir or data_dir() / "policies"
    summary, steps = _core.run_gold_episode(kind, seed, agent, str(library))
    return json.loads(summary), [json.loads(s) for s in steps]


def label_prompts(demo, vocab):
    """One labeling prompt per demonstration step."""
    return _core.label_prompts(json.dumps(demo), json.dumps(vocab))


def synthesize_prompts(demos_dir=None):
    """Planner spec first, then one spec per skill."""
    return [json.loads(s) for s in _core.synthesize_prompts(str(demos_dir or data_dir() / "demos"))]
