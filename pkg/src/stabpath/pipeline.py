"""End-to-end analysis of a model: germ validation, preorders, decomposition, checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .charge import GermCheck, VALIDATION_TOL, validate_family
from .decompose import (FiltrationStep, LimitPrestability, NumericityResult, SodBlock, SupportResult,
                        block_rank_identity, build_filtration, build_sod, c_action_compatibility,
                        class_count_bound, limit_prestability, numericity_check, refinement_check,
                        render_filtration, render_sod, support_check)
from .errors import GermValidationError
from .gluing import gluable_threshold, rho
from .asymptotics import geometric_grid
from .models import Model
from .preorder import OrderedPartition, Verdict, build_partitions, check_quasi_convergence

CHARGE_TOL = 1e-9
C_ACTION_TOL = 1e-9
GLUING_RADII = (1.0, 2.0, 4.0)
GLUING_T_GRID = (0.05, 400.0, 1.02)
# computed on request only: with every block twisted, rho(t) has a sawtooth (see README)
OPTIONAL_CHECKS = frozenset({"rho_monotone"})


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


@dataclass
class Analysis:
    model: Model
    germ_checks: list[GermCheck]
    verdict: Verdict
    p_isim: OrderedPartition
    p_sim: OrderedPartition
    sod: list[SodBlock]
    steps: list[FiltrationStep]
    prestability: list[LimitPrestability]
    support: list[SupportResult]
    numericity: NumericityResult
    generators: list[list[complex]]
    checks: list[CheckResult] = field(default_factory=list)
    sod_string: str = ""
    filtration_string: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)


def validate_germs(model: Model) -> list[GermCheck]:
    """Cross-check every analytic germ against a fit of the tracked charge."""
    out = []
    for f in model.families:
        c = validate_family(model.path, f)
        if not c.ok:
            raise GermValidationError(
                f"analytic germ of {f.id} disagrees with the fit ({c.component} off by {c.deviation:.3g})",
                witness=c)
        out.append(c)
    return out


def limit_generators(step: FiltrationStep, prestab: LimitPrestability,
                     classes: dict) -> tuple[list[complex], float]:
    """``Z_E`` on the basis of ``Λ_E``, solved from the members; also the factorization residual."""
    rows = [step.lambda_E.project(classes[m]) for m in step.members]
    a = np.array(rows, dtype=float).reshape(len(rows), step.lambda_E.rank)
    z = np.array([prestab.charges[m] for m in step.members], dtype=complex)
    if step.lambda_E.rank == 0:
        return [], float(np.abs(z).max(initial=0.0))
    sol, *_ = np.linalg.lstsq(a.astype(complex), z, rcond=None)
    res = float(np.abs(a @ sol - z).max() / max(1.0, float(np.abs(z).max())))
    return [complex(x) for x in sol], res


def analyze(model: Model, validate: bool = True, requested: Sequence[str] | None = None,
            tolerances: dict | None = None) -> Analysis:
    """Run the whole pipeline; ``requested`` restricts (or extends) the checks reported."""
    tolerances = tolerances or {}
    ctol = tolerances.get("charge", CHARGE_TOL)
    atol = tolerances.get("c_action", C_ACTION_TOL)
    germ_checks = validate_germs(model) if validate else []
    fams = list(model.families)
    verdict = check_quasi_convergence(fams)
    p_isim, p_sim = build_partitions(fams)
    sod = build_sod(p_isim, fams)
    steps = build_filtration(p_sim, fams)
    t_check = model.extras.get("numeric_t", 1e6)
    prestab = [limit_prestability(s.representative, p_sim, fams, model.path, t_check) for s in steps]
    support = [support_check(s, p, fams, analytic_epsilon=model.analytic_support_eps)
               for s, p in zip(steps, prestab)]
    numer = numericity_check(sod, model.rank)
    classes = {f.id: f.cls for f in fams}
    gens, fact_res = [], 0.0
    for s, p in zip(steps, prestab):
        g, r = limit_generators(s, p, classes)
        gens.append(g)
        fact_res = max(fact_res, r)
    checks = [
        CheckResult("quasi_convergence", verdict.passed, detail=verdict.message),
        CheckResult("germ_validation", True, max((c.deviation for c in germ_checks), default=0.0),
                    VALIDATION_TOL, f"{len(germ_checks)} families"),
        CheckResult("numericity", numer.passed, detail=f"block ranks {list(numer.block_ranks)}"),
        CheckResult("class_count", class_count_bound(p_sim, model.rank),
                    float(len(p_sim)), float(model.rank)),
        CheckResult("refinement", refinement_check(steps, sod, p_isim)),
        CheckResult("rank_identity", block_rank_identity(steps, sod, p_isim)),
        CheckResult("support", all(s.passed for s in support),
                    min((s.epsilon for s in support), default=math.inf)),
        CheckResult("limit_charge_factorization", fact_res <= ctol, fact_res, ctol),
    ]
    dev = max((p.numeric_deviation for p in prestab if p.numeric_deviation is not None), default=0.0)
    checks.append(CheckResult("limit_charges_numeric", dev <= ctol, dev, ctol, f"t = {t_check:g}"))
    cdev = c_action_deviation(p_sim, fams)
    checks.append(CheckResult("c_action", cdev < atol, cdev, atol))
    if model.glued is not None:
        want_rho = requested is not None and "rho_monotone" in requested
        checks.extend(gluing_checks(model, p_isim, p_sim, want_rho, ctol))
    if requested is not None:
        unknown = set(requested) - {c.name for c in checks} - OPTIONAL_CHECKS
        if unknown:
            raise KeyError(f"unknown checks: {sorted(unknown)}")
        checks = [c for c in checks if c.name in requested]
    labels = model.extras.get("filtration_labels")
    return Analysis(model, germ_checks, verdict, p_isim, p_sim, sod, steps, prestab, support, numer, gens,
                    checks, render_sod(sod), render_filtration(steps, labels))


def c_action_deviation(p_sim: OrderedPartition, fams) -> float:
    """Max ``σ_E`` vs ``(lim ℓ(E'/E)).σ_E'`` deviation over all pairs in each ``~`` class.

    Pairs are taken over distinct germ signatures (identical germs give identical data).
    """
    by_id = {f.id: f for f in fams}
    worst = 0.0
    for block in p_sim.blocks:
        reps = {}
        for fid in block:
            f = by_id[fid]
            reps.setdefault((f.log_mass.as_tuple(), f.phase_germ.as_tuple()), fid)
        ids = list(reps.values())
        for e in ids:
            for e2 in ids:
                if e != e2:
                    worst = max(worst, c_action_compatibility(e, e2, p_sim, fams))
    return worst


def gluing_grid() -> list[float]:
    lo, hi, ratio = GLUING_T_GRID
    return geometric_grid(lo, hi, ratio)


def gluing_checks(model: Model, p_isim: OrderedPartition, p_sim: OrderedPartition,
                  with_rho: bool = False, ctol: float = CHARGE_TOL) -> list[CheckResult]:
    gp = model.glued
    out = []
    got = tuple(frozenset(b) for b in p_isim.blocks)
    want = tuple(frozenset(b) for b in gp.expected_blocks)
    out.append(CheckResult("recovered_blocks", got == want, detail=f"{len(got)} blocks"))
    fams = list(model.families)
    cdev, exact = 0.0, True
    for rep, charges in gp.expected_charges.items():
        p = limit_prestability(rep, p_sim, fams)
        for fid, z in charges.items():
            cdev = max(cdev, abs(p.charges[fid] - z))
            exact = exact and p.phases[fid] == gp.expected_phases[rep][fid]
    out.append(CheckResult("recovered_charges", cdev <= ctol, cdev, ctol))
    out.append(CheckResult("recovered_phases", exact, detail="exact equality"))
    grid = gluing_grid()
    th = [gluable_threshold(gp.blocks, gp.twists, r, grid, gp.hom) for r in GLUING_RADII]
    ordered = all(x is not None for x in th) and all(a <= b for a, b in zip(th, th[1:]))
    flips = all(x is not None and x > grid[0] for x in th)
    out.append(CheckResult("gluable_thresholds", ordered and flips,
                           detail=", ".join(f"t({r:g})={x}" for r, x in zip(GLUING_RADII, th))))
    if with_rho:
        out.append(rho_monotone_check(gp, grid))
    return out


def rho_monotone_check(gp, grid: Sequence[float]) -> CheckResult:
    rs = [rho(gp.blocks, gp.twists, t, gp.hom) for t in grid]
    drops = [(grid[k + 1], rs[k], rs[k + 1]) for k in range(len(rs) - 1) if rs[k + 1] < rs[k] - 1e-6]
    detail = f"{len(grid)} grid points"
    if drops:
        t, a, b = drops[0]
        detail += f"; {len(drops)} drops, first at t={t:.6g}: {a:.6g} -> {b:.6g}"
    return CheckResult("rho_monotone", not drops, float(len(drops)), 0.0, detail)


def gluing_thresholds(model: Model, radii: Sequence[float] = GLUING_RADII) -> list[float | None]:
    gp = model.glued
    return [gluable_threshold(gp.blocks, gp.twists, r, gluing_grid(), gp.hom) for r in radii]
