"""Pairwise asymptotic comparison of families and the induced preorders.

``E <^i F`` when the phase of ``F`` runs away from that of ``E``; within a
``~^i`` class, ``E < F`` when the log-mass ratio ``m(F)/m(E)`` diverges.
Both relations are computed from germs of ``ell(F) - ell(E)``.  Shifting a
family changes neither relation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .asymptotics import (DEFAULT_RESIDUAL_TOL, SYMBOLIC_TOL, FITTED_TOL, ConvergesTo,
                          ToMinusInfinity, ToPlusInfinity, normalized_limit, real_germ_sign)
from .charge import FormalObject, SemistableFamily, ell_germ
from .errors import InconclusiveGerm, NonTransitive
from .hn import limit_hn


class IRel(enum.Enum):
    IPREC = "IPrec"
    ISUCC = "ISucc"
    ISIM = "ISim"


class RRel(enum.Enum):
    PREC = "Prec"
    SUCC = "Succ"
    SIM = "Sim"
    NA = "NotApplicable"


@dataclass(frozen=True)
class PairVerdict:
    imag: IRel
    real_within_isim: RRel
    ell_limit: complex | None = None


def _tol_for(e: SemistableFamily, f: SemistableFamily, tol: float | None) -> float:
    if tol is not None:
        return tol
    return FITTED_TOL if (e.residual is not None or f.residual is not None) else SYMBOLIC_TOL


def classify_pair(e: SemistableFamily, f: SemistableFamily, tol: float | None = None,
                  residual_tol: float = DEFAULT_RESIDUAL_TOL) -> PairVerdict:
    d = ell_germ(f) - ell_germ(e)
    if d.inconclusive or (d.residual is not None and d.residual > residual_tol):
        raise InconclusiveGerm(f"germ of ell({f.id}/{e.id}) is inconclusive")
    tol = _tol_for(e, f, tol)
    dphase = f.phase_germ - e.phase_germ
    im = real_germ_sign(dphase, tol)
    if isinstance(im, ToPlusInfinity):
        return PairVerdict(IRel.IPREC, RRel.NA)
    if isinstance(im, ToMinusInfinity):
        return PairVerdict(IRel.ISUCC, RRel.NA)
    dmass = f.log_mass - e.log_mass
    re = real_germ_sign(dmass, tol)
    if isinstance(re, ToPlusInfinity):
        return PairVerdict(IRel.ISIM, RRel.PREC)
    if isinstance(re, ToMinusInfinity):
        return PairVerdict(IRel.ISIM, RRel.SUCC)
    assert isinstance(re, ConvergesTo) and isinstance(im, ConvergesTo)
    return PairVerdict(IRel.ISIM, RRel.SIM, complex(re.value, math.pi * im.value))


def ell_limit(e: SemistableFamily, f: SemistableFamily, tol: float | None = None) -> complex:
    """``lim ell_t(F/E)`` for ``F ~ E``."""
    v = classify_pair(e, f, tol)
    if v.ell_limit is None:
        raise ValueError(f"{f.id} and {e.id} are not in the same ~ class")
    return v.ell_limit


@dataclass(frozen=True)
class OrderedPartition:
    blocks: tuple[tuple[str, ...], ...]

    def index_of(self) -> dict[str, int]:
        return {fid: i for i, b in enumerate(self.blocks) for fid in b}

    def __len__(self):
        return len(self.blocks)


def _group(items: list, key, tol: float) -> list[list]:
    """Sort by ``key`` (a tuple) and split where consecutive keys differ by more than ``tol``."""
    items = sorted(items, key=lambda x: (key(x), x.id))
    groups: list[list] = []
    for x in items:
        if groups and all(abs(a - b) <= tol for a, b in zip(key(groups[-1][-1]), key(x))):
            groups[-1].append(x)
        else:
            groups.append([x])
    return groups


def _split_key_phase(f: SemistableFamily):
    p = f.phase_germ
    return (p.a, p.b)


def _split_key_mass(f: SemistableFamily):
    m = f.log_mass
    return (m.a, m.b)


def _member_key(f: SemistableFamily):
    """Members are listed smallest class first; the first member represents the block."""
    c = f.cls
    return (max(abs(x) for x in c), sum(abs(x) for x in c), f.id)


def build_partitions(families: Sequence[SemistableFamily], tol: float | None = None,
                     verify: bool = True) -> tuple[OrderedPartition, OrderedPartition]:
    """``(P/~^i, P/~)`` as ordered partitions, ascending in ``<^i`` and ``<``."""
    fams = [f for f in families]
    if not fams:
        return OrderedPartition(()), OrderedPartition(())
    ids = [f.id for f in fams]
    if len(set(ids)) != len(ids):
        raise ValueError("family ids must be unique")
    t = tol
    if t is None:
        t = FITTED_TOL if any(f.residual is not None for f in fams) else SYMBOLIC_TOL
    for f in fams:
        if f.inconclusive:
            raise InconclusiveGerm(f"germ of {f.id} is inconclusive")
    iblocks = _group(fams, _split_key_phase, t)
    sblocks = [g for ib in iblocks for g in _group(ib, _split_key_mass, t)]
    p_isim = OrderedPartition(tuple(tuple(f.id for f in sorted(b, key=_member_key)) for b in iblocks))
    p_sim = OrderedPartition(tuple(tuple(f.id for f in sorted(b, key=_member_key)) for b in sblocks))
    if verify:
        _verify(fams, p_isim, p_sim, tol)
    return p_isim, p_sim


def _expected(ia: int, ib: int, sa: int, sb: int) -> tuple[IRel, RRel]:
    if ia < ib:
        return IRel.IPREC, RRel.NA
    if ia > ib:
        return IRel.ISUCC, RRel.NA
    if sa < sb:
        return IRel.ISIM, RRel.PREC
    if sa > sb:
        return IRel.ISIM, RRel.SUCC
    return IRel.ISIM, RRel.SIM


def _verify(fams, p_isim: OrderedPartition, p_sim: OrderedPartition, tol):
    """Exhaustive pairwise check that the partitions agree with ``classify_pair``."""
    ii, si = p_isim.index_of(), p_sim.index_of()
    # distinct germ signatures suffice: families with identical (a, b) keys behave identically
    reps: dict[tuple, SemistableFamily] = {}
    for f in fams:
        reps.setdefault(_split_key_phase(f) + _split_key_mass(f), f)
    rep_list = list(reps.values())
    for x in range(len(rep_list)):
        for y in range(len(rep_list)):
            if x == y:
                continue
            e, f = rep_list[x], rep_list[y]
            v = classify_pair(e, f, tol)
            want = _expected(ii[e.id], ii[f.id], si[e.id], si[f.id])
            if (v.imag, v.real_within_isim) != want:
                witness = _find_triple(rep_list, e, f, tol)
                raise NonTransitive(
                    f"pairwise verdict for ({e.id}, {f.id}) contradicts the induced order",
                    witness)


def _find_triple(fams, e, f, tol):
    def rel(a, b):
        v = classify_pair(a, b, tol)
        return v.imag, v.real_within_isim
    for g in fams:
        if g is e or g is f:
            continue
        if rel(e, g) == rel(g, f) and rel(e, f) != rel(e, g):
            return (e.id, g.id, f.id)
    return (e.id, f.id, e.id)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witness: tuple = ()
    message: str = ""
    details: dict = field(default_factory=dict)


def check_quasi_convergence(families: Sequence[SemistableFamily],
                            formal_objects: Sequence[FormalObject] = (),
                            residual_tol: float = DEFAULT_RESIDUAL_TOL) -> Verdict:
    fams = list(families)
    for obj in formal_objects:
        try:
            limit_hn(obj)
        except Exception as exc:  # pragma: no cover - limit_hn never fails in germ mode
            return Verdict(False, (obj,), f"no limit HN filtration: {exc}")
    seen: dict[tuple, SemistableFamily] = {}
    for f in fams:
        key = (f.log_mass.as_tuple(), f.phase_germ.as_tuple(), f.residual, f.inconclusive)
        seen.setdefault(key, f)
    reps = list(seen.values())
    for i, e in enumerate(reps):
        for f in reps[i + 1:]:
            d = ell_germ(f) - ell_germ(e)
            try:
                normalized_limit(d, None, residual_tol)
            except InconclusiveGerm as exc:
                return Verdict(False, (e.id, f.id), str(exc))
    return Verdict(True, (), "quasi-convergent", {"pairs_checked": len(reps) * (len(reps) - 1) // 2})
