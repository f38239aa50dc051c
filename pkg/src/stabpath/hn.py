"""Limit Harder-Narasimhan filtrations of formal objects."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .asymptotics import SYMBOLIC_TOL, RealGerm
from .charge import Constituent, FormalObject, SemistableFamily
from .errors import PhaseOverlap


@dataclass(frozen=True)
class HNFactor:
    obj: FormalObject
    phase_germ: RealGerm


@dataclass(frozen=True)
class LimitHNFiltration:
    """Factors with strictly decreasing phase germs."""

    factors: tuple[HNFactor, ...]

    @property
    def phase_germs(self) -> list[RealGerm]:
        return [f.phase_germ for f in self.factors]

    def constituents(self) -> list[Constituent]:
        return [c for f in self.factors for c in f.obj.constituents]


class SumOrder(enum.Enum):
    MERGED = "Merged"
    E_ON_TOP = "E_on_top"
    F_ON_TOP = "F_on_top"


def _key(c: Constituent):
    f = c.family
    return (f.base_id, f.shift + c.shift)


def _canonical(constituents: Sequence[Constituent]) -> list[Constituent]:
    """Combine equal (family, total shift) entries and sort deterministically."""
    acc: dict[tuple, Constituent] = {}
    for c in constituents:
        k = _key(c)
        eff = Constituent(c.effective, 0, c.mult)
        if k in acc:
            acc[k] = Constituent(acc[k].family, 0, acc[k].mult + c.mult)
        else:
            acc[k] = eff
    return [acc[k] for k in sorted(acc)]


def limit_hn(obj: FormalObject, tol: float = SYMBOLIC_TOL) -> LimitHNFiltration:
    cs = _canonical(obj.constituents)
    cs.sort(key=lambda c: tuple(-x for x in c.family.phase_germ.as_tuple()))
    groups: list[list[Constituent]] = []
    for c in cs:
        if groups and groups[-1][0].family.phase_germ.compare(c.family.phase_germ, tol) == 0:
            groups[-1].append(c)
        else:
            groups.append([c])
    factors = []
    for g in groups:
        g = sorted(g, key=_key)
        factors.append(HNFactor(FormalObject(tuple(g)), g[0].family.phase_germ))
    return LimitHNFiltration(tuple(factors))


def sum_trichotomy(e: SemistableFamily, f: SemistableFamily, tol: float = SYMBOLIC_TOL) -> SumOrder:
    c = e.phase_germ.compare(f.phase_germ, tol)
    if c == 0:
        return SumOrder.MERGED
    return SumOrder.E_ON_TOP if c > 0 else SumOrder.F_ON_TOP


def concatenate(filtrations: Sequence[LimitHNFiltration], tol: float = SYMBOLIC_TOL) -> LimitHNFiltration:
    out: list[HNFactor] = []
    for filt in filtrations:
        if out and filt.factors and out[-1].phase_germ.compare(filt.factors[0].phase_germ, tol) <= 0:
            raise PhaseOverlap("consecutive filtrations overlap in phase germ")
        out.extend(filt.factors)
    for a, b in zip(out, out[1:]):
        if a.phase_germ.compare(b.phase_germ, tol) <= 0:
            raise PhaseOverlap("factor phase germs are not strictly decreasing")
    return LimitHNFiltration(tuple(out))
