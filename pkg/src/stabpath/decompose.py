"""Semiorthogonal blocks, the refining filtration and limit charges on subquotients."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .charge import ChargePath, FormalObject, SemistableFamily, shift, snapshot
from .errors import EmptyClass
from .lattice import (QuotientPresentation, Subgroup, independent_over_Q, quotient_torsion_free,
                      span)
from .preorder import OrderedPartition

NUMERIC_CHECK_T = 1e6
NUMERIC_CHECK_RTOL = 1e-4
SUPPORT_EPS_FLOOR = 1e-9
DEFAULT_MAX_SHIFT = 3


def _lookup(families: Sequence[SemistableFamily]) -> dict[str, SemistableFamily]:
    return {f.id: f for f in families}


@dataclass(frozen=True)
class SodBlock:
    representative: str
    members: tuple[str, ...]
    lattice_image: Subgroup


@dataclass(frozen=True)
class FiltrationStep:
    representative: str
    members: tuple[str, ...]
    num: Subgroup
    den: Subgroup
    lambda_E: QuotientPresentation


def build_sod(p_isim: OrderedPartition, families: Sequence[SemistableFamily]) -> list[SodBlock]:
    fam = _lookup(families)
    n = len(next(iter(fam.values())).cls0)
    return [SodBlock(b[0], tuple(b), span([fam[i].cls for i in b], n)) for b in p_isim.blocks]


def build_filtration(p_sim: OrderedPartition, families: Sequence[SemistableFamily]) -> list[FiltrationStep]:
    fam = _lookup(families)
    n = len(next(iter(fam.values())).cls0)
    steps = []
    below: list = []
    for b in p_sim.blocks:
        den = span(below, n)
        below = below + [fam[i].cls for i in b]
        num = span(below, n)
        steps.append(FiltrationStep(b[0], tuple(b), num, den, quotient_torsion_free(num, den)))
    return steps


def render_sod(blocks: Sequence[SodBlock]) -> str:
    return "⟨" + ", ".join(_block_label(b.members) for b in blocks) + "⟩"


def _block_label(members: Sequence[str]) -> str:
    return members[0] if len(members) == 1 else "⟨" + ", ".join(members[:3]) + (", …⟩" if len(members) > 3 else "⟩")


def render_filtration(steps: Sequence[FiltrationStep], labels: Sequence[str] | None = None) -> str:
    """``0 ⊊ ... ⊊ D``; each intermediate step is labeled by ``labels`` or its representative."""
    parts = ["0"]
    for j, s in enumerate(steps[:-1]):
        parts.append(labels[j] if labels else f"⟨{s.representative}⟩")
    parts.append("D")
    return " ⊊ ".join(parts)


@dataclass(frozen=True)
class LimitPrestability:
    base: str
    charges: Mapping[str, complex]
    phases: Mapping[str, float]
    numeric_deviation: float | None = None
    numeric_t: float | None = None


def _ell_limit(e: SemistableFamily, f: SemistableFamily) -> tuple[complex, float]:
    dm = f.log_mass - e.log_mass
    dp = f.phase_germ - e.phase_germ
    return complex(dm.c, math.pi * dp.c), dp.c


def limit_prestability(e_id: str, p_sim: OrderedPartition, families: Sequence[SemistableFamily],
                       path: ChargePath | None = None, t_check: float = NUMERIC_CHECK_T) -> LimitPrestability:
    """``Z_E(F) = exp(lim ell_t(F/E))`` and ``phi_E(F)`` for ``F`` in the class of ``E``."""
    fam = _lookup(families)
    block = next(b for b in p_sim.blocks if e_id in b)
    e = fam[e_id]
    charges, phases = {}, {}
    for fid in block:
        z, ph = _ell_limit(e, fam[fid])
        charges[fid] = complex(cmath.exp(z))
        phases[fid] = ph
    charges[e_id], phases[e_id] = 1 + 0j, 0.0
    dev = None
    if path is not None:
        dev = 0.0
        for fid in block:
            r = charge_ratio(path, fam[fid].cls, e.cls, t_check)
            dev = max(dev, abs(r - charges[fid]) / abs(charges[fid]))
    return LimitPrestability(e_id, charges, phases, dev, t_check if path is not None else None)


def charge_ratio(path: ChargePath, v: Sequence[int], w: Sequence[int], t: float) -> complex:
    """``Z_t(v) / Z_t(w)`` evaluated in log space (no overflow)."""
    sv, wv = path.scaled(v, [t])
    sw, ww = path.scaled(w, [t])
    return complex(np.exp(sv[0] - sw[0]) * wv[0] / ww[0])


def c_action_compatibility(e_id: str, e2_id: str, p_sim: OrderedPartition,
                           families: Sequence[SemistableFamily]) -> float:
    """Max deviation between ``sigma_E`` and ``(lim ell(E'/E)) . sigma_E'`` on the class."""
    fam = _lookup(families)
    a = limit_prestability(e_id, p_sim, families)
    b = limit_prestability(e2_id, p_sim, families)
    z, dph = _ell_limit(fam[e_id], fam[e2_id])
    ez = cmath.exp(z)
    dev = 0.0
    for fid in a.charges:
        dev = max(dev, abs(a.charges[fid] - ez * b.charges[fid]))
        dev = max(dev, abs(a.phases[fid] - (b.phases[fid] + dph)))
    return dev


@dataclass(frozen=True)
class NumericityResult:
    independent: bool
    ranks_sum_to_total: bool
    finite: bool
    block_ranks: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.independent and self.ranks_sum_to_total and self.finite


def numericity_check(blocks: Sequence[SodBlock], ambient_rank: int | None = None) -> NumericityResult:
    subs = [b.lattice_image for b in blocks]
    n = ambient_rank if ambient_rank is not None else (subs[0].ambient_rank if subs else 0)
    ranks = tuple(s.rank for s in subs)
    return NumericityResult(independent_over_Q(subs), sum(ranks) == n, len(blocks) < math.inf and len(blocks) <= max(n, 1), ranks)


@dataclass(frozen=True)
class SupportResult:
    epsilon: float
    passed: bool
    norm: str = "sup-norm in the Λ_E basis"
    window: str = ""
    analytic_epsilon: float | None = None


def class_objects(members: Sequence[str], families: Sequence[SemistableFamily],
                  max_shift: int = DEFAULT_MAX_SHIFT) -> list[SemistableFamily]:
    fam = _lookup(families)
    return [shift(fam[m], k) for m in members for k in range(-max_shift, max_shift + 1)]


def support_check(step: FiltrationStep, prestab: LimitPrestability, families: Sequence[SemistableFamily],
                  max_shift: int = DEFAULT_MAX_SHIFT, analytic_epsilon: float | None = None) -> SupportResult:
    if not step.members:
        raise EmptyClass(f"class of {step.representative} is empty")
    eps = math.inf
    for f in class_objects(step.members, families, max_shift):
        proj = step.lambda_E.project(f.cls)
        norm = max((abs(x) for x in proj), default=0)
        if norm == 0:
            eps = 0.0
            break
        eps = min(eps, abs(prestab.charges[f.base_id]) / norm)
    window = f"{len(step.members)} window families, shifts |k| <= {max_shift}"
    return SupportResult(float(eps), eps > SUPPORT_EPS_FLOOR, window=window, analytic_epsilon=analytic_epsilon)


def class_count_bound(p_sim: OrderedPartition, rank: int) -> bool:
    return len(p_sim) <= rank


def refinement_check(steps: Sequence[FiltrationStep], sod: Sequence[SodBlock],
                     p_isim: OrderedPartition) -> bool:
    """Each step sits between consecutive prefixes of the SOD at lattice level."""
    if not steps:
        return True
    n = steps[0].num.ambient_rank
    idx = p_isim.index_of()
    for s in steps:
        j = idx[s.representative]
        lower = span([v for b in sod[:j] for v in b.lattice_image.hermite_basis], n)
        upper = span([v for b in sod[:j + 1] for v in b.lattice_image.hermite_basis], n)
        if not (s.num.issubgroup(upper) and lower.issubgroup(s.num)):
            return False
    return True


def block_rank_identity(steps: Sequence[FiltrationStep], sod: Sequence[SodBlock],
                        p_isim: OrderedPartition) -> bool:
    """Within each ``~^i`` block, the ranks of the ``Λ_E`` add up to the block's rank."""
    idx = p_isim.index_of()
    totals = [0] * len(sod)
    for s in steps:
        totals[idx[s.representative]] += s.lambda_E.rank
    return all(t == b.lattice_image.rank for t, b in zip(totals, sod))


def abs_z_over_mass(obj: FormalObject, snap) -> float:
    logs = [math.log(c.mult) + snap.log_charge(c.effective) for c in obj.constituents]
    top = max(x.real for x in logs)
    terms = [complex(np.exp(x - top)) for x in logs]
    return abs(sum(terms)) / sum(abs(x) for x in terms)


def mass_proportionality_check(objects: Sequence[FormalObject], path: ChargePath,
                               families: Sequence[SemistableFamily], t_grid: Sequence[float]) -> float:
    """Min over the grid of ``|Z_t(X)| / m_t(X)``."""
    base = {}
    for obj in objects:
        for c in obj.constituents:
            base[c.family.base_id] = shift(c.family, -c.family.shift)
    fams = list(base.values())
    worst = math.inf
    for t in t_grid:
        snap = snapshot(path, fams, t)
        for obj in objects:
            worst = min(worst, abs_z_over_mass(obj, snap))
    return worst


@dataclass
class DecompositionReport:
    sod: list[SodBlock]
    steps: list[FiltrationStep]
    prestability: list[LimitPrestability]
    support: list[SupportResult]
    numericity: NumericityResult
    class_count_ok: bool
    refinement_ok: bool
    rank_identity_ok: bool
    extras: dict = field(default_factory=dict)
