"""Property suites run against a scenario (``stabpath check``).

Each property returns a :class:`PropertyResult`; failures carry a
counterexample.  Randomized properties take an explicit seed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .asymptotics import Germ, fit_germ, geometric_grid
from .charge import (Constituent, FormalObject, c_action, ell, log_Z, mass_and_phase, shift, snapshot,
                     validate_family)
from .decompose import build_filtration
from .errors import NotGluable, StabPathError
from .gluing import (BlockFamily, BlockStability, blockwise_d_slice, d_slice, d_slice_glued, glue,
                     r_gluable, uniform_amplitude, unglue)
from .hn import limit_hn
from .lattice import hermite_basis, span
from .models import Model, P1Scenario, curve_tau, p1_class
from .preorder import build_partitions, classify_pair

SNAPSHOT_TS = (10.0, 30.0, 100.0)
LOGZ_SPREAD_MAX = 0.2


@dataclass(frozen=True)
class PropertyResult:
    suite: str
    name: str
    passed: bool
    trials: int = 0
    counterexample: str = ""


@dataclass
class SuiteReport:
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            tag = "PASS" if r.passed else "FAIL"
            ce = f"  counterexample: {r.counterexample}" if r.counterexample else ""
            lines.append(f"[{tag}] {r.suite}.{r.name} ({r.trials} trials){ce}")
        return "\n".join(lines) + "\n"


def _result(suite, name, failures: list[str], trials: int) -> PropertyResult:
    return PropertyResult(suite, name, not failures, trials, failures[0] if failures else "")


# ---------------------------------------------------------------- asymptotics

def asymptotics_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    fails, n = [], 20
    ts = geometric_grid(1e3, 1e8)
    for _ in range(n):
        g = Germ(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        fitted, _ = fit_germ([(t, g.evaluate(t)) for t in ts])
        if not fitted.close_to(g, 1e-6):
            fails.append(f"{g} fitted as {fitted}")
    order_fails = []
    fams = list(model.families)[:40]
    for e in fams:
        for f in fams:
            if e.phase_germ.compare(f.phase_germ) != -f.phase_germ.compare(e.phase_germ):
                order_fails.append(f"({e.id}, {f.id})")
    return [_result("asymptotics", "fit_recovers_germ", fails, n),
            _result("asymptotics", "germ_order_antisymmetric", order_fails, len(fams) ** 2)]


# ---------------------------------------------------------------- lattice

def lattice_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    _, p_sim = build_partitions(model.families, verify=False)
    steps = build_filtration(p_sim, model.families)
    fails = []
    for s in steps:
        if s.lambda_E.rank != s.num.rank - s.den.rank:
            fails.append(f"rank of Λ_E at {s.representative}")
        for v in s.den.hermite_basis:
            if any(s.lambda_E.project(v)):
                fails.append(f"projection does not kill {v}")
    hnf = []
    for _ in range(20):
        vs = [tuple(int(x) for x in rng.integers(-6, 7, model.rank)) for _ in range(3)]
        h = hermite_basis(vs, model.rank)
        if hermite_basis(h, model.rank) != h or span(h, model.rank) != span(vs, model.rank):
            hnf.append(str(vs))
    return [_result("lattice", "quotient_rank_and_kernel", fails, len(steps)),
            _result("lattice", "hermite_idempotent", hnf, 20)]


# ---------------------------------------------------------------- charge

def germ_validation_property(model: Model) -> PropertyResult:
    fails = []
    for f in model.families:
        c = validate_family(model.path, f)
        if not c.ok:
            fails.append(f"{f.id}: {c.component} off by {c.deviation:.3g} (fit {c.fitted}, analytic {c.analytic})")
    return _result("charge", "germ_validation", fails, len(model.families))


def random_formal_objects(model: Model, snap, n: int, rng: np.random.Generator,
                          spread_max: float = LOGZ_SPREAD_MAX) -> list[FormalObject]:
    """Objects whose constituents' phases lie in one window of width ``spread_max``."""
    fams = list(model.families)
    out = []
    while len(out) < n:
        anchor = fams[int(rng.integers(len(fams)))]
        p0 = snap.phase(anchor) + float(rng.uniform(-0.1, 0.1))
        cands = []
        for f in fams:
            p = snap.phase(f)
            k = math.floor(p0 - p)
            for s in (k, k + 1):
                if 0 <= p + s - p0 + spread_max / 2 <= spread_max:
                    cands.append((f, s))
        if not cands:
            continue
        m = int(rng.integers(1, min(4, len(cands)) + 1))
        picks = rng.choice(len(cands), size=m, replace=False)
        cons = [Constituent(cands[int(i)][0], cands[int(i)][1], int(rng.integers(1, 6))) for i in picks]
        out.append(FormalObject(tuple(cons)))
    return out


def logz_bound_trials(model: Model, n: int, rng: np.random.Generator,
                      ts: Sequence[float] = SNAPSHOT_TS) -> tuple[int, int, str]:
    """``(trials, violations, first counterexample)`` for the ``ell`` vs ``log Z`` bounds."""
    trials, bad, ce = 0, 0, ""
    per = max(1, n // len(ts))
    for t in ts:
        snap = snapshot(model.path, model.families, t)
        for obj in random_formal_objects(model, snap, per, rng):
            mp = mass_and_phase(obj, snap)
            eps = mp.phi_plus - mp.phi_minus
            try:
                d = ell(obj, snap) - log_Z(obj, snap)
            except StabPathError as exc:
                bad += 1
                ce = ce or f"t={t}: {exc}"
                continue
            trials += 1
            slack = 1e-12
            if abs(d.real) > abs(math.log(math.cos(math.pi * eps / 2))) + slack or abs(d.imag) > math.pi * eps + slack:
                bad += 1
                ce = ce or f"t={t}, spread {eps}: ell - logZ = {d}"
    return trials, bad, ce


def charge_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    out = [germ_validation_property(model)]
    fails = []
    for f in model.families[:50]:
        for k in (-2, 1, 3):
            if shift(shift(f, k), -k) != f:
                fails.append(f"{f.id} shift {k}")
    out.append(_result("charge", "shift_round_trip", fails, 3 * min(50, len(model.families))))
    snap = snapshot(model.path, model.families, SNAPSHOT_TS[0])
    z = complex(0.3, 0.7)
    moved = c_action(z, snap)
    fails = [fid for fid in snap.logz if abs(moved.logz[fid].imag - snap.logz[fid].imag - z.imag) > 1e-12]
    out.append(_result("charge", "c_action_phase_shift", fails, len(snap.logz)))
    trials, bad, ce = logz_bound_trials(model, 300, rng)
    out.append(PropertyResult("charge", "logZ_bounds", bad == 0, trials, ce))
    return out


# ---------------------------------------------------------------- hn

def hn_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    fams = list(model.families)
    fails, n = [], 50
    for _ in range(n):
        m = int(rng.integers(1, 5))
        cons = tuple(Constituent(fams[int(rng.integers(len(fams)))], int(rng.integers(-2, 3)),
                                 int(rng.integers(1, 4))) for _ in range(m))
        filt = limit_hn(FormalObject(cons))
        ph = filt.phase_germs
        if any(a.compare(b) <= 0 for a, b in zip(ph, ph[1:])):
            fails.append(str([c.family.id for c in cons]))
        total = sum(c.mult for c in filt.constituents())
        if total != sum(c.mult for c in cons):
            fails.append(f"multiplicity lost in {[c.family.id for c in cons]}")
    return [_result("hn", "factors_strictly_decreasing", fails, n)]


# ---------------------------------------------------------------- preorder

def preorder_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    fams = list(model.families)
    fails, n = [], 40
    for _ in range(n):
        e, f = fams[int(rng.integers(len(fams)))], fams[int(rng.integers(len(fams)))]
        k, j = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
        v1, v2 = classify_pair(e, f), classify_pair(shift(e, k), shift(f, j))
        if (v1.imag, v1.real_within_isim) != (v2.imag, v2.real_within_isim):
            fails.append(f"({e.id}, {f.id}) shifts ({k}, {j})")
    trans = []
    try:
        build_partitions(fams, verify=True)
    except StabPathError as exc:
        trans.append(str(exc))
    return [_result("preorder", "shift_invariance", fails, n),
            _result("preorder", "transitive_partitions", trans, 1)]


# ---------------------------------------------------------------- decompose

def decompose_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    from .pipeline import analyze
    a = analyze(model, validate=False)
    names = ("numericity", "class_count", "refinement", "rank_identity", "support", "limit_charges_numeric",
             "c_action", "limit_charge_factorization")
    return [PropertyResult("decompose", c.name, c.passed, 1, "" if c.passed else f"value {c.value}: {c.detail}")
            for c in a.checks if c.name in names]


# ---------------------------------------------------------------- models

def models_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    out = []
    s = model.extras.get("scenario")
    if isinstance(s, P1Scenario):
        fails = []
        for n in range(s.k - s.N, s.k + s.N):
            a, b, c = p1_class(n - 1, s.k), p1_class(n, s.k), p1_class(n + 1, s.k)
            if any(x - 2 * y + z for x, y, z in zip(c, b, a)):
                fails.append(f"n={n}")
        out.append(_result("models", "p1_k_theory_relation", fails, 2 * s.N))
    elif "g" in model.params:
        tau = curve_tau(model.extras["scenario"])
        ts = np.array([0.0] + geometric_grid(1e-3, 1e8, 1.5))
        bad = ts[tau.evaluate(ts).imag <= 0]
        out.append(_result("models", "curve_lift_condition", [f"t={t}" for t in bad[:1]], len(ts)))
    return out


# ---------------------------------------------------------------- gluing

def random_glued_pair(rng: np.random.Generator, max_blocks: int = 4, max_fams: int = 6):
    """Two gluable glued snapshots over the same random block registry."""
    n = int(rng.integers(2, max_blocks + 1))
    sizes = [int(rng.integers(1, max_fams + 1)) for _ in range(n)]

    def blocks_with(phase_fn):
        out = []
        for i, k in enumerate(sizes):
            fams = []
            for j in range(k):
                ph, mass = phase_fn(i, j)
                cls = tuple(int(x == j) for x in range(k))
                fams.append(BlockFamily(f"B{i + 1}.{j + 1}", cls, mass * cmath.exp(1j * math.pi * ph), ph))
            out.append(BlockStability(i, tuple(f.charge for f in fams), tuple(fams)))
        return out

    base = {(i, j): (float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.5, 2.0)))
            for i, k in enumerate(sizes) for j in range(k)}

    def moved(i, j):
        ph, mass = base[(i, j)]
        return min(1.0, max(0.01, ph + float(rng.uniform(-0.3, 0.3)))), mass
    blocks_a = blocks_with(lambda i, j: base[(i, j)])
    blocks_b = blocks_with(moved)
    hom = uniform_amplitude(n)
    for scale in (10.0, 30.0, 100.0, 300.0):
        tw_a = [complex(float(rng.normal()), (i + 1) * scale) for i in range(n)]
        tw_b = [complex(float(rng.normal()), (i + 1) * scale + float(rng.uniform(-0.5, 0.5))) for i in range(n)]
        try:
            return glue(blocks_a, tw_a, 0.0, hom), glue(blocks_b, tw_b, 0.0, hom)
        except NotGluable:
            continue
    raise NotGluable("no gluable twist found")


def d_slice_law_trials(n: int, rng: np.random.Generator, tol: float = 1e-9) -> tuple[int, int, str]:
    bad, ce = 0, ""
    for _ in range(n):
        a, b = random_glued_pair(rng)
        whole = d_slice(a.stability_snapshot(), b.stability_snapshot())
        parts = d_slice_glued(blockwise_d_slice(a, b))
        if abs(whole - parts) > tol:
            bad += 1
            ce = ce or f"enumerated {whole} vs blockwise max {parts}"
    return n, bad, ce


def gluing_suite(model: Model, rng: np.random.Generator) -> list[PropertyResult]:
    trials, bad, ce = d_slice_law_trials(30, rng)
    out = [PropertyResult("gluing", "d_slice_law", bad == 0, trials, ce)]
    rt, mono = [], []
    for _ in range(10):
        a, _ = random_glued_pair(rng)
        back = unglue(a)
        for orig, got in zip(a.blocks, back):
            if [(f.id, f.cls, f.phase) for f in orig.families] != [(f.id, f.cls, f.phase) for f in got.families]:
                rt.append(f"block {orig.index}")
        blocks = back
        for r1, r2 in ((1.0, 2.0), (1.5, 3.0)):
            if r_gluable(blocks, [0] * len(blocks), r2, 0.0) and not r_gluable(blocks, [0] * len(blocks), r1, 0.0):
                mono.append(f"r={r1} vs {r2}")
    out.append(_result("gluing", "unglue_round_trip", rt, 10))
    out.append(_result("gluing", "r_monotone", mono, 20))
    if model.glued is not None:
        from .pipeline import analyze
        a = analyze(model, validate=False)
        for name in ("recovered_blocks", "recovered_charges", "recovered_phases", "gluable_thresholds"):
            c = a.check(name)
            out.append(PropertyResult("gluing", name, c.passed, 1, "" if c.passed else c.detail))
    return out


SUITES: dict[str, Callable[[Model, np.random.Generator], list[PropertyResult]]] = {
    "asymptotics": asymptotics_suite,
    "lattice": lattice_suite,
    "charge": charge_suite,
    "hn": hn_suite,
    "preorder": preorder_suite,
    "decompose": decompose_suite,
    "models": models_suite,
    "gluing": gluing_suite,
}


def run_suites(model: Model, seed: int = 0, suites: Sequence[str] | None = None) -> SuiteReport:
    rng = np.random.default_rng(seed)
    rep = SuiteReport()
    for name in suites or SUITES:
        rep.results.extend(SUITES[name](model, rng))
    return rep
