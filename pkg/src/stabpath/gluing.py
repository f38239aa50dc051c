"""Gluing block stability data along a semiorthogonal decomposition.

Blocks carry t-independent stability data (family charges with phases in
``(0, 1]``); a twist ``z_i(t)`` (a germ evaluated exactly) acts on block ``i``
through the C-action.  Hom data between blocks is a model input: either an
amplitude ``n_ij`` with ``Hom^{<= n_ij}(A_i, A_j) = 0`` or, per family pair,
the set of degrees where ``Hom^p(F, G)`` is nonzero.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import kernels
from .asymptotics import DivergesAlongRay, Germ, RealGerm, classify
from .charge import ChargePath, SemistableFamily, StabilitySnapshot
from .errors import BadTwistDirections, NotGluable, NotInGluedLocus
from .expr import Const, Expr, T
from .lattice import LatticeVector

DEFAULT_EPS = 1e-3
RHO_TOL = 1e-6
RHO_MAX = 1e6
PHASE_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class BlockFamily:
    """Representative of a semistable family in the heart: phase in ``(0, 1]``."""

    id: str
    cls: LatticeVector
    charge: complex
    phase: float


@dataclass(frozen=True)
class BlockStability:
    index: int
    basis_charges: tuple[complex, ...]
    families: tuple[BlockFamily, ...]

    def __post_init__(self):
        for f in self.families:
            if not 0 < f.phase <= 1:
                raise ValueError(f"phase of {f.id} must lie in (0, 1], got {f.phase}")
            if abs(f.charge) <= 0:
                raise ValueError(f"mass of {f.id} must be positive")

    @property
    def rank(self) -> int:
        return len(self.basis_charges)


@dataclass(frozen=True)
class HomAmplitude:
    """``amplitude[(i, j)] = n_ij``; ``support(F_id, G_id)`` overrides it per family pair."""

    amplitude: Mapping[tuple[int, int], int] = field(default_factory=dict)
    support: Callable[[str, str], frozenset] | None = None

    def margin(self, i: int, j: int, f: str, g: str) -> int | None:
        """Largest allowed ``b - a`` for ``F[a]``, ``G[b]`` (``None``: unconstrained)."""
        if self.support is not None:
            s = self.support(f, g)
            if s is not None:
                return min(s) - 1 if s else None
        return self.amplitude.get((i, j), 1)

    @property
    def per_pair(self) -> bool:
        return self.support is not None


def uniform_amplitude(n_blocks: int, n: int = 1) -> HomAmplitude:
    return HomAmplitude({(i, j): n for i in range(n_blocks) for j in range(i + 1, n_blocks)})


def p1_hom_degrees(a: int, b: int) -> frozenset:
    """Degrees ``k`` with ``Hom(O(a), O(b)[k]) != 0`` on the projective line."""
    if b >= a:
        return frozenset({0})
    if b <= a - 2:
        return frozenset({1})
    return frozenset()


def p1_line_bundle_support(ids: Mapping[str, tuple[int, int]]) -> Callable[[str, str], frozenset]:
    """Support function for families ``id -> (n, shift)`` standing for ``O(n)[shift]``."""
    def support(f: str, g: str) -> frozenset:
        (a, s), (b, u) = ids[f], ids[g]
        return frozenset(p + s - u for p in p1_hom_degrees(a, b))
    return support


HOM_PRESETS = {"p1-line-bundles": p1_line_bundle_support}


def twist_value(z: Germ | complex, t: float) -> complex:
    return z.evaluate(t) if isinstance(z, Germ) else complex(z)


def _rep_shift(phase: float) -> int:
    """Integer ``s`` with ``phase - s`` in ``(0, 1]``."""
    return math.ceil(phase) - 1


def twist_block(block: BlockStability, z: complex) -> BlockStability:
    """``z . sigma_i`` with each family re-represented inside ``(0, 1]``."""
    ez = cmath.exp(z)
    out = []
    for f in block.families:
        ph = f.phase + z.imag / math.pi
        s = _rep_shift(ph)
        sign = -1 if s % 2 else 1
        out.append(BlockFamily(f.id, tuple(sign * x for x in f.cls), sign * (ez * f.charge), ph - s))
    return BlockStability(block.index, tuple(ez * c for c in block.basis_charges), tuple(out))


@dataclass(frozen=True)
class GluedEntry:
    """A twisted block family: absolute phase, glued charge, ambient and local classes."""

    id: str
    block: int
    cls: LatticeVector
    local: LatticeVector
    charge: complex
    phase: float


@dataclass(frozen=True)
class GluedSnapshot:
    t: float
    blocks: tuple[BlockStability, ...]
    entries: tuple[GluedEntry, ...]
    mergeable: tuple[tuple[str, str, int], ...]

    def phases(self) -> dict[str, float]:
        return {e.id: e.phase for e in self.entries}

    def stability_snapshot(self) -> StabilitySnapshot:
        return StabilitySnapshot(self.t, {e.id: complex(math.log(abs(e.charge)), math.pi * e.phase)
                                          for e in self.entries})


def _offsets(blocks: Sequence[BlockStability]) -> list[int]:
    out, acc = [], 0
    for b in blocks:
        out.append(acc)
        acc += b.rank
    return out


def embed(blocks: Sequence[BlockStability], i: int, v: Sequence[int]) -> LatticeVector:
    """``iota_i`` on classes: block ``i`` occupies its own coordinate range."""
    offs = _offsets(blocks)
    n = sum(b.rank for b in blocks)
    out = [0] * n
    for k, x in enumerate(v):
        out[offs[i] + k] = x
    return tuple(out)


def _phases_of(block: BlockStability, z: complex) -> list[float]:
    return [f.phase + z.imag / math.pi for f in block.families]


def r_gluable(blocks: Sequence[BlockStability], twists: Sequence[Germ | complex], r: float, t: float,
              hom: HomAmplitude | None = None, eps: float = DEFAULT_EPS) -> bool:
    """Twisted blocks satisfy the widened Hom-vanishing condition at radius ``r``.

    For ``i < j`` every ``F[a]`` with twisted phase in ``(-eps-r, 1+r]`` and
    ``G[b]`` with twisted phase in ``(-r, 1+eps+r)`` must have ``b - a`` at
    most the Hom margin.  ``eps = 0`` evaluates the limit ``eps -> 0+``.
    """
    if len(blocks) <= 1:
        return True
    hom = hom if hom is not None else uniform_amplitude(len(blocks))
    zs = [twist_value(z, t) for z in twists]
    for i in range(len(blocks)):
        pi_ = _phases_of(blocks[i], zs[i])
        for j in range(i + 1, len(blocks)):
            pj = _phases_of(blocks[j], zs[j])
            if not hom.per_pair:
                n_ij = hom.amplitude.get((i, j), 1)
                if pi_ and pj and kernels.shift_gap(pi_, pj, r, eps) > n_ij:
                    return False
                continue
            for f, a in zip(blocks[i].families, pi_):
                for g, b in zip(blocks[j].families, pj):
                    m = hom.margin(i, j, f.id, g.id)
                    if m is not None and kernels.shift_gap([a], [b], r, eps) > m:
                        return False
    return True


def rho(blocks: Sequence[BlockStability], twists: Sequence[Germ | complex], t: float,
        hom: HomAmplitude | None = None, eps: float = DEFAULT_EPS, tol: float = RHO_TOL) -> float:
    """``sup{r - 1 : r-gluable}``; ``-inf`` if not 1-gluable, ``inf`` for one block."""
    if len(blocks) <= 1:
        return math.inf

    def ok(r):
        return r_gluable(blocks, twists, r, t, hom, eps)
    if not ok(1.0):
        return -math.inf
    lo, hi = 1.0, 2.0
    while ok(hi):
        lo, hi = hi, hi * 2
        if hi > RHO_MAX:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo - 1.0


def gluable_threshold(blocks, twists, r: float, t_grid: Sequence[float], hom=None,
                      eps: float = DEFAULT_EPS) -> float | None:
    """First ``t`` on the grid from which ``r_gluable`` holds for the rest of the grid."""
    flags = [r_gluable(blocks, twists, r, t, hom, eps) for t in t_grid]
    for k in range(len(t_grid)):
        if all(flags[k:]):
            return t_grid[k]
    return None


def glue(blocks: Sequence[BlockStability], twists: Sequence[Germ | complex], t: float,
         hom: HomAmplitude | None = None, r: float = 1.0, eps: float = DEFAULT_EPS,
         check: bool = True) -> GluedSnapshot:
    """Glued snapshot of the twisted blocks; ``check=False`` skips the gluability test."""
    if len(twists) != len(blocks):
        raise ValueError("one twist per block")
    if check and not r_gluable(blocks, twists, r, t, hom, eps):
        raise NotGluable(f"blocks are not {r}-gluable at t={t}")
    zs = [twist_value(z, t) for z in twists]
    tw = [twist_block(b, z) for b, z in zip(blocks, zs)]
    entries = []
    for i, (b, z) in enumerate(zip(blocks, zs)):
        ez = cmath.exp(z)
        for f in b.families:
            entries.append(GluedEntry(f.id, i, embed(blocks, i, f.cls), f.cls, ez * f.charge,
                                      f.phase + z.imag / math.pi))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise ValueError("family ids must be unique across blocks")
    return GluedSnapshot(float(t), tuple(tw), tuple(entries), _mergeable(entries))


def _mergeable(entries: Sequence[GluedEntry]) -> tuple[tuple[str, str, int], ...]:
    """Cross-block pairs whose phases agree up to an integer shift ``k`` (``F = G[k]`` in phase)."""
    out = []
    for x in range(len(entries)):
        for y in range(x + 1, len(entries)):
            a, b = entries[x], entries[y]
            if a.block != b.block:
                k = round(a.phase - b.phase)
                if abs(a.phase - b.phase - k) <= PHASE_MATCH_TOL:
                    out.append((a.id, b.id, int(k)))
    return tuple(out)


def unglue(snap: GluedSnapshot, blocks: Sequence[BlockStability] | None = None) -> list[BlockStability]:
    """Restrict a glued snapshot to each block: ``Z_i = Z o iota_i`` and ``Q_i = C_i ∩ Q``.

    Families are re-represented inside ``(0, 1]`` by an integer shift.
    """
    if not isinstance(snap, GluedSnapshot):
        raise NotInGluedLocus("unglue needs a snapshot from the glued locus")
    n = len(blocks) if blocks is not None else len(snap.blocks)
    if n != len(snap.blocks):
        raise NotInGluedLocus("block layout does not match the glued snapshot")
    out = []
    for i in range(n):
        fams = []
        for e in snap.entries:
            if e.block != i:
                continue
            s = _rep_shift(e.phase)
            sign = -1 if s % 2 else 1
            fams.append(BlockFamily(e.id, tuple(sign * x for x in e.local), sign * e.charge, e.phase - s))
        out.append(BlockStability(i, snap.blocks[i].basis_charges, tuple(fams)))
    return out


def glued_snapshot_from_path(path: ChargePath, snap: StabilitySnapshot,
                             layout: Sequence[tuple[Sequence[LatticeVector], Sequence[SemistableFamily]]],
                             hom: HomAmplitude, r: float = 0.0, eps: float = 0.0) -> GluedSnapshot:
    """Read a snapshot of a path as glued data.

    ``layout[i]`` gives the lattice basis of block ``i`` (as ambient vectors)
    and the path families lying in it.  Raises :class:`NotInGluedLocus` when
    the families fail the ``r``-gluing condition (``r = 0``: plain gluing).
    """
    for i in range(len(layout)):
        for j in range(i + 1, len(layout)):
            for f in layout[i][1]:
                for g in layout[j][1]:
                    m = hom.margin(i, j, f.id, g.id)
                    if m is not None and kernels.shift_gap([snap.phase(f)], [snap.phase(g)], r, eps) > m:
                        raise NotInGluedLocus(f"snapshot at t={snap.t} is outside the glued locus")
    blocks, entries = [], []
    for i, (basis, fams) in enumerate(layout):
        bc = tuple(complex(cmath.exp(_log_charge(path, v, snap))) for v in basis)
        reps = []
        for f in fams:
            local = _coords_in(basis, f.cls)
            ph = snap.phase(f)
            entries.append(GluedEntry(f.id, i, f.cls, local, snap.charge(f), ph))
            s = _rep_shift(ph)
            sign = -1 if s % 2 else 1
            reps.append(BlockFamily(f.id, tuple(sign * x for x in local), sign * snap.charge(f), ph - s))
        blocks.append(BlockStability(i, bc, tuple(reps)))
    return GluedSnapshot(snap.t, tuple(blocks), tuple(entries), _mergeable(entries))


def _log_charge(path: ChargePath, v, snap: StabilitySnapshot) -> complex:
    s, w = path.scaled(v, [snap.t])
    return complex(s[0] + cmath.log(w[0]))


def _coords_in(basis: Sequence[LatticeVector], v: Sequence[int]) -> tuple[int, ...]:
    """Integer coordinates of ``v`` in a block basis (given as ambient vectors)."""
    from fractions import Fraction
    k, n = len(basis), len(v)
    rows = [[Fraction(basis[c][r]) for c in range(k)] + [Fraction(v[r])] for r in range(n)]
    piv_cols, row = [], 0
    for c in range(k):
        p = next((x for x in range(row, n) if rows[x][c] != 0), None)
        if p is None:
            continue
        rows[row], rows[p] = rows[p], rows[row]
        pv = rows[row][c]
        rows[row] = [x / pv for x in rows[row]]
        for x in range(n):
            if x != row and rows[x][c] != 0:
                fct = rows[x][c]
                rows[x] = [a - fct * b for a, b in zip(rows[x], rows[row])]
        piv_cols.append(c)
        row += 1
    if any(rows[x][k] != 0 for x in range(row, n)):
        raise NotInGluedLocus(f"class {tuple(v)} is not in the block lattice")
    sol = [Fraction(0)] * k
    for r_, c in enumerate(piv_cols):
        sol[c] = rows[r_][k]
    if any(x.denominator != 1 for x in sol):
        raise NotInGluedLocus(f"class {tuple(v)} is not an integral combination of the block basis")
    return tuple(int(x) for x in sol)


def d_slice(snap_a: StabilitySnapshot, snap_b: StabilitySnapshot, max_shift: int = 3) -> float:
    """Enumerated slicing distance over single families and pairwise sums (with shifts)."""
    keys = sorted(snap_a.logz)
    if keys != sorted(snap_b.logz):
        raise ValueError("snapshots must cover the same registry")
    pa = [snap_a.logz[k].imag / math.pi for k in keys]
    pb = [snap_b.logz[k].imag / math.pi for k in keys]
    return kernels.slice_distance(pa, pb, max_shift)


def d_slice_glued(blockwise: Sequence[float]) -> float:
    return max(blockwise, default=0.0)


def blockwise_d_slice(snap_a: GluedSnapshot, snap_b: GluedSnapshot, max_shift: int = 3) -> list[float]:
    """Per-block slicing distances, from the absolute phases of each block's families."""
    out = []
    for i in range(len(snap_a.blocks)):
        ids = [e.id for e in snap_a.entries if e.block == i]
        pa = [e.phase for e in snap_a.entries if e.block == i]
        pb_map = {e.id: e.phase for e in snap_b.entries if e.block == i}
        out.append(kernels.slice_distance(pa, [pb_map[k] for k in ids], max_shift))
    return out


@dataclass(frozen=True)
class GluedPath:
    blocks: tuple[BlockStability, ...]
    twists: tuple[Germ, ...]
    path: ChargePath
    families: tuple[SemistableFamily, ...]
    hom: HomAmplitude
    expected_blocks: tuple[tuple[str, ...], ...]
    expected_charges: Mapping[str, Mapping[str, complex]]
    expected_phases: Mapping[str, Mapping[str, float]]


def default_twists(n: int) -> tuple[Germ, ...]:
    """``z_s(t) = i s t`` for ``s = 1..n``."""
    return tuple(Germ(1j * s, 0, 0) for s in range(1, n + 1))


def _germ_expr(z: Germ) -> Expr:
    e: Expr = Const(z.gamma)
    if z.alpha != 0:
        e = Const(z.alpha) * T() + e
    if z.beta != 0:
        from .expr import Log
        e = e + Const(z.beta) * Log(T())
    return e


def check_twist_directions(twists: Sequence[Germ]) -> None:
    for i in range(len(twists)):
        for j in range(i + 1, len(twists)):
            d = twists[j] - twists[i]
            c = classify(d)
            if not isinstance(c, DivergesAlongRay) or c.direction.imag <= 1e-12:
                raise BadTwistDirections(
                    f"z_{j + 1} - z_{i + 1} must diverge along a ray e^(i theta) with 0 < theta < pi")


def build_recovering_path(blocks: Sequence[BlockStability], hom: HomAmplitude | None = None,
                          twists: Sequence[Germ] | None = None, seed_t: float = 1.0) -> GluedPath:
    n = len(blocks)
    twists = tuple(twists) if twists is not None else default_twists(n)
    if len(twists) != n:
        raise ValueError("one twist per block")
    check_twist_directions(twists)
    hom = hom if hom is not None else uniform_amplitude(n)
    basis, scales, fams = [], [], []
    for i, (b, z) in enumerate(zip(blocks, twists)):
        ze = _germ_expr(z)
        for c in b.basis_charges:
            basis.append(Const(c))
            scales.append(ze)
    rank = len(basis)
    path = ChargePath(rank, tuple(basis), tuple(scales), domain_start=0.0)
    exp_blocks, exp_charges, exp_phases = [], {}, {}
    for i, (b, z) in enumerate(zip(blocks, twists)):
        ids = []
        for f in b.families:
            lm = RealGerm(z.alpha.real, z.beta.real, math.log(abs(f.charge)) + z.gamma.real)
            ph = RealGerm(z.alpha.imag / math.pi, z.beta.imag / math.pi, f.phase + z.gamma.imag / math.pi)
            seed = f.phase + twist_value(z, seed_t).imag / math.pi
            fams.append(SemistableFamily(f.id, embed(blocks, i, f.cls), lm, ph, (i,), seed, seed_t,
                                         kind=f"block{i + 1}"))
            ids.append(f.id)
        exp_blocks.append(tuple(ids))
        rep = b.families[0]
        exp_charges[rep.id] = {f.id: f.charge / rep.charge for f in b.families}
        exp_phases[rep.id] = {f.id: f.phase - rep.phase for f in b.families}
    return GluedPath(tuple(blocks), twists, path, tuple(fams), hom, tuple(exp_blocks),
                     exp_charges, exp_phases)


def uniform_spread_check(path: ChargePath, families: Sequence[SemistableFamily], t_grid: Sequence[float],
                         objects: Sequence | None = None) -> float:
    """Max phase spread over the grid of the registered limit-semistable objects."""
    from .charge import FormalObject, mass_and_phase, snapshot
    objs = list(objects) if objects is not None else [FormalObject.of(f) for f in families]
    worst = 0.0
    for t in t_grid:
        snap = snapshot(path, families, t)
        for o in objs:
            mp = mass_and_phase(o, snap)
            worst = max(worst, mp.phi_plus - mp.phi_minus)
    return worst
