"""Scenario files: TOML with a model, its parameters, requested checks and optional tampering.

Example::

    model = "p1-glued"          # a preset name, or "p1", "curve", "recovering"
    seed = 0
    checks = ["support", "numericity"]

    [parameters]
    k = 0
    kappa = "exp(i*pi/4)"       # numbers, [re, im] pairs or constant expressions

    [t_grid]
    t_min = 1.0
    t_max = 40.0
    points = 200

    [[tamper]]
    family = "O(0)"
    component = "gamma"
    delta = [0.1, 0.0]
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .asymptotics import Germ
from .errors import BadKappa, ScenarioParseError
from .expr import parse
from . import models

TOP_KEYS = {"model", "seed", "checks", "parameters", "t_grid", "tolerances", "tamper", "plot"}
KIND_PARAMS = {
    "p1": {"k", "kappa", "N", "include_decay", "decay_c"},
    "curve": {"g", "theta", "N", "tau", "torsion_germ"},
    "recovering": {"n_blocks", "families_per_block", "seed", "amplitude"},
}
PRESET_KIND = {"p1-glued": "p1", "p1-geometric-plus": "p1", "p1-geometric-minus": "p1",
               "curve-genus-g": "curve", "recovering-sod-n3": "recovering"}
GRID_KEYS = {"t_min", "t_max", "points"}
TOLERANCE_KEYS = {"charge", "c_action"}
TAMPER_KEYS = {"family", "component", "delta"}
PLOT_KEYS = {"classes"}
COMPONENTS = ("alpha", "beta", "gamma")


@dataclass(frozen=True)
class TGrid:
    t_min: float = 1.0
    t_max: float = 40.0
    points: int = 200


@dataclass(frozen=True)
class Tamper:
    family: str
    component: str
    delta: complex


@dataclass(frozen=True)
class Scenario:
    model: str
    kind: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    checks: tuple[str, ...] | None = None
    t_grid: TGrid = TGrid()
    tolerances: dict = field(default_factory=dict)
    tamper: tuple[Tamper, ...] = ()
    plot_classes: tuple[str, ...] | None = None


def _complex(x: Any, key: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioParseError(f"{key}: expected a number")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    if isinstance(x, str):
        try:
            e = parse(x)
            v = complex(e(1.0))
            if v != complex(e(2.0)):
                raise ScenarioParseError(f"{key}: constant expected, got {x!r}")
            return v
        except ScenarioParseError:
            raise
        except Exception as exc:
            raise ScenarioParseError(f"{key}: cannot parse {x!r}: {exc}") from exc
    raise ScenarioParseError(f"{key}: expected a number, [re, im] or an expression")


def _int(x: Any, key: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioParseError(f"{key}: expected an integer")
    return x


def _real(x: Any, key: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioParseError(f"{key}: expected a real number")
    return float(x)


def _check_keys(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ScenarioParseError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parameters(kind: str, raw: dict) -> dict:
    _check_keys(raw, KIND_PARAMS[kind], "[parameters]")
    out: dict[str, Any] = {}
    for k, v in raw.items():
        if k == "kappa":
            out[k] = _complex(v, k)
        elif k in ("k", "N", "g", "n_blocks", "families_per_block", "seed", "amplitude"):
            out[k] = _int(v, k)
        elif k in ("theta", "decay_c"):
            out[k] = _real(v, k)
        elif k == "include_decay":
            if not isinstance(v, bool):
                raise ScenarioParseError("include_decay: expected a boolean")
            out[k] = v
        elif k == "tau":
            if not isinstance(v, str):
                raise ScenarioParseError("tau: expected an expression string")
            out[k] = v
        elif k == "torsion_germ":
            if not isinstance(v, list) or len(v) != 3:
                raise ScenarioParseError("torsion_germ: expected three components")
            out[k] = tuple(_complex(x, k) for x in v)
    return out


def parse_scenario(text: str) -> Scenario:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"invalid TOML: {exc}") from exc
    _check_keys(raw, TOP_KEYS, "scenario")
    name = raw.get("model")
    if not isinstance(name, str):
        raise ScenarioParseError("'model' must name a preset or one of p1, curve, recovering")
    if name in PRESET_KIND:
        kind = PRESET_KIND[name]
    elif name in KIND_PARAMS:
        kind = name
    else:
        raise ScenarioParseError(f"unknown model {name!r}")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ScenarioParseError("[parameters] must be a table")
    seed = _int(raw.get("seed", 0), "seed")
    checks = raw.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise ScenarioParseError("'checks' must be a list of names")
        checks = tuple(checks)
    g = raw.get("t_grid", {})
    if not isinstance(g, dict):
        raise ScenarioParseError("[t_grid] must be a table")
    _check_keys(g, GRID_KEYS, "[t_grid]")
    grid = TGrid(_real(g.get("t_min", 1.0), "t_min"), _real(g.get("t_max", 40.0), "t_max"),
                 _int(g.get("points", 200), "points"))
    if not (0 < grid.t_min < grid.t_max) or grid.points < 2:
        raise ScenarioParseError("t_grid needs 0 < t_min < t_max and points >= 2")
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ScenarioParseError("[tolerances] must be a table")
    _check_keys(tol, TOLERANCE_KEYS, "[tolerances]")
    tol = {k: _real(v, k) for k, v in tol.items()}
    tampers = []
    for t in raw.get("tamper", []):
        if not isinstance(t, dict):
            raise ScenarioParseError("[[tamper]] entries must be tables")
        _check_keys(t, TAMPER_KEYS, "[[tamper]]")
        if t.get("component") not in COMPONENTS or not isinstance(t.get("family"), str):
            raise ScenarioParseError("tamper needs 'family' and 'component' in alpha, beta, gamma")
        tampers.append(Tamper(t["family"], t["component"], _complex(t.get("delta", 0.1), "delta")))
    plot = raw.get("plot", {})
    if not isinstance(plot, dict):
        raise ScenarioParseError("[plot] must be a table")
    _check_keys(plot, PLOT_KEYS, "[plot]")
    classes = plot.get("classes")
    if classes is not None:
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise ScenarioParseError("plot.classes must be a list of family ids")
        classes = tuple(classes)
    return Scenario(name, kind, _parameters(kind, params), seed, checks, grid, tol, tuple(tampers), classes)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text)


def with_overrides(s: Scenario, seed: int | None = None, window: int | None = None,
                   t_max: float | None = None) -> Scenario:
    params = dict(s.parameters)
    if window is not None:
        if s.kind == "recovering":
            raise ScenarioParseError("--window does not apply to glued scenarios")
        params["N"] = window
    if seed is not None and s.kind == "recovering":
        params["seed"] = seed
    grid = s.t_grid if t_max is None else replace(s.t_grid, t_max=float(t_max))
    if grid.t_max <= grid.t_min:
        raise ScenarioParseError("t_max must exceed t_min")
    return replace(s, parameters=params, seed=s.seed if seed is None else seed, t_grid=grid)


def build_model(s: Scenario) -> models.Model:
    """Exactly one builder invocation; tampering is applied afterwards."""
    try:
        if s.model in models.PRESETS:
            m = models.build_preset(s.model, **s.parameters)
        elif s.kind == "p1":
            m = models.build_p1(models.P1Scenario(**s.parameters))
        elif s.kind == "curve":
            m = models.build_curve(models.CurveScenario(**s.parameters))
        else:
            m = models.build_recovering(models.RecoveringScenario(**s.parameters))
    except BadKappa:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"invalid parameters for {s.model}: {exc}") from exc
    return apply_tampering(m, s.tamper)


def apply_tampering(m: models.Model, tampers) -> models.Model:
    if not tampers:
        return m
    fams = list(m.families)
    ids = [f.id for f in fams]
    for t in tampers:
        if t.family not in ids:
            raise ScenarioParseError(f"tamper: unknown family {t.family!r}")
        i = ids.index(t.family)
        g = fams[i].logz_germ
        comps = {c: getattr(g, c) for c in COMPONENTS}
        comps[t.component] += t.delta
        fams[i] = fams[i].with_logz(Germ(comps["alpha"], comps["beta"], comps["gamma"]))
    return m.with_families(fams)

