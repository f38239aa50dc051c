"""Decomposition reports: a versioned JSON schema plus a plain-text rendering.

Floats are written with ``repr`` precision, so ``from_json(to_json(r)) == r``.
Complex numbers are ``[re, im]`` pairs; non-finite floats are the strings
``"inf"``, ``"-inf"``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

SCHEMA_VERSION = 1


def _num(x: float | None):
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def _unnum(x):
    if isinstance(x, str):
        return math.inf if x == "inf" else -math.inf
    return x


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _jsonable(x: Any):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return _num(x)
    if isinstance(x, complex):
        return {"re": _num(x.real), "im": _num(x.imag)}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items())}
    return str(x)


@dataclass
class FamilyRow:
    id: str
    cls: list[int]
    kind: str
    phase_germ: list[float]
    logz_germ: list[list[float]]


@dataclass
class StepRow:
    representative: str
    members: int
    lambda_rank: int
    generators: list[list[float]]
    support_epsilon: float
    support_passed: bool
    norm: str
    window: str
    analytic_epsilon: float | None


@dataclass
class CheckRow:
    name: str
    passed: bool
    value: float | None
    tolerance: float | None
    detail: str


@dataclass
class Report:
    schema_version: int
    scenario: str
    parameters: dict
    seed: int
    quasi_convergent: bool
    witness: list[str]
    message: str
    families: list[FamilyRow]
    p_isim: list[list[str]]
    p_sim: list[list[str]]
    sod: str
    filtration: str
    steps: list[StepRow]
    numericity: dict
    class_count_ok: bool
    checks: list[CheckRow]
    passed: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for s in d["steps"]:
            s["support_epsilon"] = _num(s["support_epsilon"])
            s["analytic_epsilon"] = _num(s["analytic_epsilon"])
        for c in d["checks"]:
            c["value"] = _num(c["value"])
            c["tolerance"] = _num(c["tolerance"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        d = dict(d)
        d["families"] = [FamilyRow(**f) for f in d["families"]]
        steps = []
        for s in d["steps"]:
            s = dict(s)
            s["support_epsilon"] = _unnum(s["support_epsilon"])
            s["analytic_epsilon"] = _unnum(s["analytic_epsilon"])
            steps.append(StepRow(**s))
        d["steps"] = steps
        checks = []
        for c in d["checks"]:
            c = dict(c)
            c["value"] = _unnum(c["value"])
            c["tolerance"] = _unnum(c["tolerance"])
            checks.append(CheckRow(**c))
        d["checks"] = checks
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"scenario: {self.scenario}  (schema {self.schema_version}, seed {self.seed})",
                 f"quasi-convergent: {'yes' if self.quasi_convergent else 'no'}"
                 + (f"  witness {self.witness}" if self.witness else ""),
                 f"families: {len(self.families)}",
                 f"#(P/~i) = {len(self.p_isim)}, #(P/~) = {len(self.p_sim)}",
                 f"SOD: {self.sod}",
                 f"filtration: {self.filtration}"]
        for k, s in enumerate(self.steps):
            gens = ", ".join(f"{g[0] + 0.0:.12g}{g[1] + 0.0:+.12g}i" for g in s.generators)
            lines.append(f"  step {k + 1}: rep {s.representative}, {s.members} members, "
                         f"rank Λ_E = {s.lambda_rank}, Z_E = [{gens}], support ε = {s.support_epsilon:.12g}")
        n = self.numericity
        lines.append(f"numericity: {'pass' if n['passed'] else 'fail'} (block ranks {n['block_ranks']})")
        lines.append(f"class-count bound: {'pass' if self.class_count_ok else 'fail'}")
        for c in self.checks:
            val = "" if c.value is None else f" value={c.value:.6g}"
            tol = "" if c.tolerance is None else f" tol={c.tolerance:.3g}"
            det = f"  ({c.detail})" if c.detail else ""
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}{val}{tol}{det}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _germ_row(f) -> FamilyRow:
    g = f.logz_germ
    return FamilyRow(f.id, list(f.cls), f.kind, [_num(x) for x in f.phase_germ.as_tuple()],
                     [_pair(g.alpha), _pair(g.beta), _pair(g.gamma)])


def build_report(analysis, scenario_name: str | None = None, seed: int = 0) -> Report:
    a = analysis
    m = a.model
    steps = []
    for s, p, sup, gens in zip(a.steps, a.prestability, a.support, a.generators):
        steps.append(StepRow(s.representative, len(s.members), s.lambda_E.rank, [_pair(g) for g in gens],
                             float(sup.epsilon), bool(sup.passed), sup.norm, sup.window, sup.analytic_epsilon))
    numer = {"independent": a.numericity.independent, "ranks_sum_to_total": a.numericity.ranks_sum_to_total,
             "finite": a.numericity.finite, "block_ranks": list(a.numericity.block_ranks),
             "passed": a.numericity.passed}
    checks = [CheckRow(c.name, bool(c.passed), None if c.value is None else float(c.value),
                       None if c.tolerance is None else float(c.tolerance), c.detail) for c in a.checks]
    class_ok = next((c.passed for c in a.checks if c.name == "class_count"), len(a.p_sim) <= m.rank)
    return Report(SCHEMA_VERSION, scenario_name or m.name, _jsonable(m.params), seed,
                  bool(a.verdict.passed), [str(w) for w in a.verdict.witness], a.verdict.message,
                  [_germ_row(f) for f in m.families],
                  [list(b) for b in a.p_isim.blocks], [list(b) for b in a.p_sim.blocks],
                  a.sod_string, a.filtration_string, steps, numer, bool(class_ok), checks, a.passed)
