"""Scenario files: YAML documents describing a field, a graph, a swarm and the run settings.

Every validation error names the offending key path, e.g. ``agents.count``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field as dc_field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .control import Gains
from .engine import ConfigurationError, SimConfig, box_positions
from .field import ScalarField, field_from_dict
from .graph import VisibilityGraph, graph_from_dict

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "name", "description", "field", "graph", "agents", "gains", "sim", "diagnostics", "expect", "bounds"}
_GAIN_KEYS = {"k1", "k2", "kf", "z_desired", "spacing", "kf_n", "formation_n", "max_speed"}
_SIM_KEYS = {"dt", "epsilon", "oja_substep", "t_max", "termination", "z_bar", "seed", "initial_frame", "initial_q"}
_AGENT_KEYS = {"count", "positions", "box"}
_DIAG_KEYS = {"enabled", "figures"}
_EXPECT_KEYS = {"level_error_threshold", "window"}
_BOUND_KEYS = {"d", "eps1", "eps2", "ell"}


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Scenario:
    name: str
    field: ScalarField
    graph: VisibilityGraph
    positions: np.ndarray
    config: SimConfig
    description: str = ""
    diagnostics: bool = True
    figures: bool = True
    expect: dict = dc_field(default_factory=dict)
    bounds: dict = dc_field(default_factory=dict)
    raw: dict = dc_field(default_factory=dict, repr=False)

    @property
    def gains(self) -> Gains:
        return self.config.gains

    def with_seed(self, seed: Optional[int]) -> "Scenario":
        """Re-resolve a box start with a different seed; explicit positions are unaffected."""
        if seed is None:
            return self
        raw = copy.deepcopy(self.raw)
        raw.setdefault("sim", {})["seed"] = int(seed)
        return scenario_from_dict(raw)


def _mapping(obj, path):
    if not isinstance(obj, dict):
        raise ScenarioError(path, "expected a mapping")
    return obj


def _no_extra(obj, allowed, path):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ScenarioError(f"{path}.{extra[0]}" if path else extra[0], "unknown key")


def _number(obj, key, path, default=None, integer=False):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{path}.{key}", "required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ScenarioError(f"{path}.{key}", f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _vec2(v, path):
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(path, "expected a pair of numbers") from None
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise ScenarioError(path, "expected a pair of finite numbers")
    return arr


def _gains(spec) -> Gains:
    spec = _mapping(spec or {}, "gains")
    _no_extra(spec, _GAIN_KEYS, "gains")
    kw = {k: _number(spec, k, "gains") for k in ("k1", "k2", "kf", "z_desired", "spacing") if k in spec}
    if spec.get("kf_n") is not None:
        kw["kf_n"] = _number(spec, "kf_n", "gains")
    if spec.get("max_speed") is not None:
        kw["max_speed"] = _number(spec, "max_speed", "gains")
    if "formation_n" in spec:
        if not isinstance(spec["formation_n"], bool):
            raise ScenarioError("gains.formation_n", "expected true or false")
        kw["formation_n"] = spec["formation_n"]
    try:
        return Gains(**kw)
    except ValueError as exc:
        raise ScenarioError("gains", str(exc)) from None


def _config(spec, gains) -> SimConfig:
    spec = _mapping(spec or {}, "sim")
    _no_extra(spec, _SIM_KEYS, "sim")
    kw = {}
    for k in ("dt", "epsilon", "oja_substep", "z_bar"):
        if k in spec:
            kw[k] = _number(spec, k, "sim")
    for k in ("t_max", "seed"):
        if k in spec:
            kw[k] = _number(spec, k, "sim", integer=True)
    for k in ("termination", "initial_frame"):
        if k in spec:
            kw[k] = str(spec[k])
    if "initial_q" in spec:
        q = _vec2(spec["initial_q"], "sim.initial_q")
        if not np.hypot(*q) > 0:
            raise ScenarioError("sim.initial_q", "must be non-zero")
        kw["initial_q"] = tuple(float(v) for v in q)
    try:
        return SimConfig(gains=gains, **kw)
    except ConfigurationError as exc:
        msg = str(exc)
        path = msg.split(":", 1)[0].replace("config.", "sim.") if ":" in msg else "sim"
        raise ScenarioError(path, msg.split(":", 1)[-1].strip()) from None


def _positions(spec, seed) -> np.ndarray:
    spec = _mapping(spec, "agents")
    _no_extra(spec, _AGENT_KEYS, "agents")
    count = _number(spec, "count", "agents", integer=True)
    if count < 2:
        raise ScenarioError("agents.count", f"need at least 2 agents, got {count}")
    has_pos, has_box = "positions" in spec, "box" in spec
    if has_pos == has_box:
        raise ScenarioError("agents", "give exactly one of 'positions' or 'box'")
    if has_pos:
        raw = spec["positions"]
        if not isinstance(raw, list):
            raise ScenarioError("agents.positions", "expected a list of [x, y] pairs")
        if len(raw) != count:
            raise ScenarioError("agents.positions", f"{len(raw)} positions for count {count}")
        return np.array([_vec2(p, f"agents.positions[{k}]") for k, p in enumerate(raw)])
    box = _mapping(spec["box"], "agents.box")
    _no_extra(box, {"center", "half_width"}, "agents.box")
    if "center" not in box:
        raise ScenarioError("agents.box.center", "required")
    center = _vec2(box["center"], "agents.box.center")
    hw = box.get("half_width", 0.5)
    hw = np.broadcast_to(np.asarray(hw, dtype=float), (2,)) if not isinstance(hw, list) else _vec2(hw, "agents.box.half_width")
    if np.any(hw <= 0):
        raise ScenarioError("agents.box.half_width", "must be positive")
    return box_positions(count, center, hw, seed)


def scenario_from_dict(doc) -> Scenario:
    doc = _mapping(doc, "<root>")
    _no_extra(doc, _TOP_KEYS, "")
    if "schema_version" not in doc:
        raise ScenarioError("schema_version", "required")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"unsupported version {doc['schema_version']!r} (expected {SCHEMA_VERSION})")
    for key in ("field", "graph", "agents"):
        if key not in doc:
            raise ScenarioError(key, "required")
    try:
        fld = field_from_dict(doc["field"])
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError("field", str(exc)) from None
    gains = _gains(doc.get("gains"))
    cfg = _config(doc.get("sim"), gains)
    P = _positions(doc["agents"], cfg.seed)
    try:
        graph = graph_from_dict(doc["graph"], P.shape[0])
    except ValueError as exc:
        raise ScenarioError("graph", str(exc)) from None
    diag = _mapping(doc.get("diagnostics", {}) or {}, "diagnostics")
    _no_extra(diag, _DIAG_KEYS, "diagnostics")
    expect = _mapping(doc.get("expect", {}) or {}, "expect")
    _no_extra(expect, _EXPECT_KEYS, "expect")
    bounds = _mapping(doc.get("bounds", {}) or {}, "bounds")
    _no_extra(bounds, _BOUND_KEYS, "bounds")
    return Scenario(
        name=str(doc.get("name", "scenario")),
        description=str(doc.get("description", "")),
        field=fld,
        graph=graph,
        positions=P,
        config=cfg,
        diagnostics=bool(diag.get("enabled", True)),
        figures=bool(diag.get("figures", True)),
        expect={k: float(v) for k, v in expect.items()},
        bounds={k: float(v) for k, v in bounds.items()},
        raw=copy.deepcopy(doc),
    )


def load_scenario(path) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("susdswarm.scenarios") / f"{path}.yaml"
        if bundled.is_file():
            text = bundled.read_text()
        else:
            raise FileNotFoundError(f"no scenario file or bundled scenario named {path!r}")
    else:
        text = p.read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("<root>", f"not valid YAML: {exc}") from None
    return scenario_from_dict(doc)


def bundled_scenarios() -> list:
    root = resources.files("susdswarm.scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def dump_scenario(scn: Scenario) -> str:
    return yaml.safe_dump(scn.raw, sort_keys=False)


def scenario_with_config(scn: Scenario, **changes) -> Scenario:
    return replace(scn, config=replace(scn.config, **changes))
