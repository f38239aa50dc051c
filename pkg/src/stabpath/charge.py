"""Central-charge paths, semistable families, formal objects and snapshots.

A :class:`ChargePath` stores each basis charge as ``exp(s_i(t)) * b_i(t)``
with an optional log scale ``s_i``, so charges that grow like ``e^{ct}`` can
be handled in log space far beyond the double-precision range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from .asymptotics import Germ, RealGerm, fit_germ, geometric_grid
from .errors import EvalDomain, GridTooCoarse, SpreadTooLarge, ZeroCharge
from .expr import Expr, wrap
from .lattice import LatticeVector, as_vector

VALIDATION_T_RANGE = (1e3, 1e8)
VALIDATION_TOL = 1e-6
# held-out error of the fit is dominated by extrapolating the decaying tail
# down to t ~ 1e3, so the inconclusive threshold is looser than the germ tolerance
VALIDATION_RESIDUAL_TOL = 1e-3
VALIDATION_DECAY_TERMS = 3


@dataclass(frozen=True)
class ChargePath:
    """``Z_t(v) = sum_i c_i * exp(s_i(t)) * b_i(t)`` on ``Z^n``.

    ``c`` are the coordinates of ``v`` in ``frame`` (a unimodular basis of
    the lattice, the standard one by default); ``b_i`` and ``s_i`` describe
    the charge of the ``i``-th frame vector.
    """

    ambient_rank: int
    basis: tuple[Expr, ...]
    log_scales: tuple[Expr | None, ...] | None = None
    domain_start: float = 0.0
    frame: tuple[LatticeVector, ...] | None = None
    _frame_inv: tuple[tuple[int, ...], ...] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        basis = tuple(wrap(b) for b in self.basis)
        if len(basis) != self.ambient_rank:
            raise ValueError("need one basis charge per lattice coordinate")
        object.__setattr__(self, "basis", basis)
        if self.log_scales is not None:
            scales = tuple(None if s is None else wrap(s) for s in self.log_scales)
            if len(scales) != self.ambient_rank:
                raise ValueError("log_scales must match the ambient rank")
            if all(s is None for s in scales):
                scales = None
            object.__setattr__(self, "log_scales", scales)
        if self.frame is not None:
            frame = tuple(as_vector(f) for f in self.frame)
            object.__setattr__(self, "frame", frame)
            object.__setattr__(self, "_frame_inv", _unimodular_inverse(frame))

    def coords(self, v: Sequence[int]) -> LatticeVector:
        """Coordinates of ``v`` in the frame."""
        v = as_vector(v)
        if len(v) != self.ambient_rank:
            raise ValueError(f"class {v} does not have length {self.ambient_rank}")
        if self._frame_inv is None:
            return v
        n = self.ambient_rank
        return tuple(sum(v[i] * self._frame_inv[i][j] for i in range(n)) for j in range(n))

    def _check_t(self, ts: np.ndarray):
        if np.any(ts < self.domain_start):
            raise EvalDomain(f"t below the path domain start {self.domain_start}")

    def components(self, ts) -> tuple[np.ndarray, np.ndarray]:
        """``(S, B)`` arrays of shape ``(n, len(ts))``."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        self._check_t(ts)
        b = np.stack([e.evaluate(ts) for e in self.basis]) if self.basis else np.zeros((0, len(ts)))
        if self.log_scales is None:
            s = np.zeros_like(b)
        else:
            s = np.stack([np.zeros(len(ts), dtype=complex) if e is None else e.evaluate(ts)
                          for e in self.log_scales])
        return s, b

    def scaled(self, v: Sequence[int], ts, ref: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(s, w)`` with ``Z_t(v) = exp(s) * w``; ``s`` is one of the log scales."""
        s, b = self.components(ts)
        return _scaled_from(self.coords(v), s, b, ref)

    def eval_Z(self, v: Sequence[int], t: float) -> complex:
        ss, ww = self.scaled(v, [t])
        with np.errstate(over="ignore", invalid="ignore"):
            z = complex(np.exp(ss[0]) * ww[0])
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise EvalDomain(f"Z_t({tuple(v)}) overflows at t={t}; use log evaluation")
        return z

    def log_abs_Z(self, v: Sequence[int], t: float) -> float:
        ss, ww = self.scaled(v, [t])
        if ww[0] == 0:
            raise ZeroCharge(f"Z_t({tuple(v)}) = 0 at t={t}")
        return float(ss[0].real + math.log(abs(ww[0])))

    def shifted_by(self, z: complex) -> ChargePath:
        """The path ``e^z * Z_t``."""
        z = complex(z)
        if self.log_scales is None:
            scales = tuple(wrap(z) for _ in self.basis)
        else:
            scales = tuple(wrap(z) if s is None else s + z for s in self.log_scales)
        return replace(self, log_scales=scales)


def _unimodular_inverse(rows):
    from fractions import Fraction
    n = len(rows)
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if p is None:
            raise ValueError("frame is singular")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    inv = [r[n:] for r in aug]
    if any(x.denominator != 1 for r in inv for x in r):
        raise ValueError("frame must be a unimodular basis of the lattice")
    return tuple(tuple(int(x) for x in r) for r in inv)


def _scaled_from(v, s, b, ref=None):
    if ref is None:
        ref = _ref_of(v, s)
    if ref < 0:
        return np.zeros(s.shape[1], dtype=complex), np.zeros(s.shape[1], dtype=complex)
    s_ref = s[ref]
    w = np.zeros(s.shape[1], dtype=complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for i, x in enumerate(v):
                if x:
                    w = w + x * np.exp(s[i] - s_ref) * b[i]
        except FloatingPointError as exc:
            raise EvalDomain("rescaled evaluation overflowed") from exc
    return s_ref, w


def _ref_of(v, s):
    nz = [i for i, x in enumerate(v) if x]
    if not nz:
        return -1
    return max(nz, key=lambda i: (s[i, -1].real, -i))


def _midpoints(ts: np.ndarray) -> np.ndarray:
    return 0.5 * (ts[:-1] + ts[1:])


def track_log_charge(path: ChargePath, v: Sequence[int], ts: Sequence[float],
                     seed_phase: float) -> np.ndarray:
    """Branch-tracked ``log Z_t(v)`` along ``ts``, with phase ``seed_phase`` at ``ts[0]``."""
    ts = np.asarray(ts, dtype=float)
    v = path.coords(v)
    s, b = path.components(ts)
    ref = _ref_of(v, s)
    ss, ww = _scaled_from(v, s, b, ref)
    if np.any(ww == 0):
        raise ZeroCharge(f"Z_t({v}) vanishes on the grid")
    if len(ts) > 1:
        sm, bm = path.components(_midpoints(ts))
        _, wm = _scaled_from(v, sm, bm, ref)
        incr, bad = kernels.unwrap_increments(np.angle(ww), np.angle(wm), np.diff(ss.imag))
        if bad >= 0:
            raise GridTooCoarse(f"phase of {v} jumps too far between t={ts[bad]} and t={ts[bad + 1]}")
        theta = math.pi * seed_phase + np.concatenate([[0.0], np.cumsum(incr)])
    else:
        theta = np.array([math.pi * seed_phase])
    return ss.real + np.log(np.abs(ww)) + 1j * theta


def unwrap_phases(path: ChargePath, family_class: Sequence[int], t_grid: Sequence[float],
                  seed_phase: float) -> list[float]:
    """Continuous phase track ``arg Z_t / pi`` starting from ``seed_phase``."""
    return [float(x) for x in track_log_charge(path, family_class, t_grid, seed_phase).imag / math.pi]


def _grid_between(t0: float, t1: float, ratio: float = 2.0) -> list[float]:
    if t0 <= 0 or t1 <= 0:
        raise ValueError("tracking grids need positive endpoints")
    if t1 >= t0:
        return geometric_grid(t0, t1, ratio)
    return geometric_grid(t1, t0, ratio)[::-1]


@dataclass(frozen=True)
class SemistableFamily:
    """A limit-semistable family with its analytic germs.

    The log-mass and phase germs are stored separately; ``logz_germ`` is
    ``log_mass + i*pi*phase`` so its imaginary part is ``pi`` times the phase
    germ by construction.  ``shift`` counts applications of ``[1]``.
    """

    base_id: str
    cls0: LatticeVector
    log_mass: RealGerm
    phase0: RealGerm
    discrete_params: tuple[int, ...] = ()
    seed_phase0: float = 0.0
    seed_t: float = 1.0
    shift: int = 0
    kind: str = ""
    residual: float | None = None
    inconclusive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cls0", as_vector(self.cls0))
        object.__setattr__(self, "discrete_params", tuple(int(x) for x in self.discrete_params))

    @classmethod
    def from_logz(cls, base_id: str, cls0, logz: Germ, **kw) -> SemistableFamily:
        lm = RealGerm(logz.alpha.real, logz.beta.real, logz.gamma.real)
        ph = RealGerm(logz.alpha.imag / math.pi, logz.beta.imag / math.pi, logz.gamma.imag / math.pi)
        return cls(base_id, cls0, lm, ph, **kw)

    @property
    def id(self) -> str:
        return self.base_id if self.shift == 0 else f"{self.base_id}[{self.shift}]"

    @property
    def cls(self) -> LatticeVector:
        return self.cls0 if self.shift % 2 == 0 else tuple(-x for x in self.cls0)

    @property
    def phase_germ(self) -> RealGerm:
        return self.phase0 if self.shift == 0 else self.phase0.shifted(self.shift)

    @property
    def seed_phase(self) -> float:
        return self.seed_phase0 + self.shift

    @property
    def logz_germ(self) -> Germ:
        p = self.phase_germ
        m = self.log_mass
        return Germ(complex(m.a, math.pi * p.a), complex(m.b, math.pi * p.b),
                    complex(m.c, math.pi * p.c), self.residual, self.inconclusive)

    def with_logz(self, logz: Germ) -> SemistableFamily:
        """Same family with its (shift-0) log-charge germ replaced."""
        base = SemistableFamily.from_logz(self.base_id, self.cls0, logz.shifted(-1j * math.pi * self.shift))
        return replace(self, log_mass=base.log_mass, phase0=base.phase0)


def shift(f: SemistableFamily, k: int) -> SemistableFamily:
    return replace(f, shift=f.shift + int(k))


def ell_germ(f: SemistableFamily, multiplicity: int = 1) -> Germ:
    g = f.logz_germ
    return g if multiplicity == 1 else g.shifted(math.log(multiplicity))


@dataclass(frozen=True)
class Constituent:
    family: SemistableFamily
    shift: int = 0
    mult: int = 1

    def __post_init__(self):
        if self.mult < 1:
            raise ValueError("multiplicities must be positive")

    @property
    def effective(self) -> SemistableFamily:
        return self.family if self.shift == 0 else shift(self.family, self.shift)


@dataclass(frozen=True)
class FormalObject:
    constituents: tuple[Constituent, ...]

    def __post_init__(self):
        cs = tuple(c if isinstance(c, Constituent) else Constituent(*c) for c in self.constituents)
        if not cs:
            raise ValueError("a formal object needs at least one constituent")
        object.__setattr__(self, "constituents", cs)

    @classmethod
    def of(cls, *items) -> FormalObject:
        """Convenience: families, ``(family, shift)`` or ``(family, shift, mult)`` tuples."""
        out = []
        for it in items:
            if isinstance(it, SemistableFamily):
                out.append(Constituent(it))
            else:
                out.append(Constituent(*it))
        return cls(tuple(out))

    @property
    def cls(self) -> LatticeVector:
        n = len(self.constituents[0].family.cls0)
        acc = [0] * n
        for c in self.constituents:
            for i, x in enumerate(c.effective.cls):
                acc[i] += c.mult * x
        return tuple(acc)

    def direct_sum(self, other: FormalObject) -> FormalObject:
        return FormalObject(self.constituents + other.constituents)


@dataclass(frozen=True)
class StabilitySnapshot:
    """Branch-consistent log-charges of shift-0 families at a fixed ``t``."""

    t: float
    logz: Mapping[str, complex] = field(default_factory=dict)

    def log_charge(self, f: SemistableFamily) -> complex:
        return self.logz[f.base_id] + 1j * math.pi * f.shift

    def phase(self, f: SemistableFamily) -> float:
        return self.logz[f.base_id].imag / math.pi + f.shift

    def charge(self, f: SemistableFamily) -> complex:
        z = np.exp(self.logz[f.base_id])
        return complex(-z if f.shift % 2 else z)


def snapshot(path: ChargePath, families: Iterable[SemistableFamily], t: float,
             ratio: float = 2.0) -> StabilitySnapshot:
    """Snapshot at ``t``, tracking every family's branch from its seed."""
    fams = [f for f in families]
    by_seed: dict[float, list[SemistableFamily]] = {}
    for f in fams:
        by_seed.setdefault(f.seed_t, []).append(f)
    out: dict[str, complex] = {}
    for seed_t, group in sorted(by_seed.items()):
        ts = _grid_between(seed_t, t, ratio)
        for f in group:
            if f.base_id in out:
                continue
            track = track_log_charge(path, f.cls0, ts, f.seed_phase0)
            out[f.base_id] = complex(track[-1])
    return StabilitySnapshot(float(t), dict(sorted(out.items())))


class MassPhase(NamedTuple):
    m: float
    phi_avg: float
    phi_plus: float
    phi_minus: float


def _logsumexp(xs: Sequence[float]) -> float:
    top = max(xs)
    return top + math.log(sum(math.exp(x - top) for x in xs))


def log_mass(obj: FormalObject, snap: StabilitySnapshot) -> float:
    return _logsumexp([math.log(c.mult) + snap.log_charge(c.effective).real for c in obj.constituents])


def mass_and_phase(obj: FormalObject, snap: StabilitySnapshot) -> MassPhase:
    lm = log_mass(obj, snap)
    phases = [snap.phase(c.effective) for c in obj.constituents]
    weights = [math.exp(math.log(c.mult) + snap.log_charge(c.effective).real - lm)
               for c in obj.constituents]
    avg = sum(w * p for w, p in zip(weights, phases))
    return MassPhase(math.exp(lm) if lm < 709 else math.inf, avg, max(phases), min(phases))


def ell(obj: FormalObject, snap: StabilitySnapshot) -> complex:
    mp = mass_and_phase(obj, snap)
    return complex(log_mass(obj, snap), math.pi * mp.phi_avg)


def log_Z(obj: FormalObject, snap: StabilitySnapshot) -> complex:
    """The branch of ``log Z(class(obj))`` with imaginary part in ``pi*[phi_-, phi_+]``."""
    mp = mass_and_phase(obj, snap)
    if mp.phi_plus - mp.phi_minus >= 1:
        raise SpreadTooLarge(f"phase spread {mp.phi_plus - mp.phi_minus} is at least 1")
    logs = [math.log(c.mult) + snap.log_charge(c.effective) for c in obj.constituents]
    top = max(x.real for x in logs)
    terms = [complex(np.exp(x - top)) for x in logs]
    w = sum(terms)
    if abs(w) <= 1e-13 * sum(abs(x) for x in terms):
        raise ZeroCharge("the object's class has zero charge")
    theta = math.atan2(w.imag, w.real) / math.pi
    # choose the representative of theta mod 2 inside [phi_-, phi_+]
    lo = mp.phi_minus - 1e-12
    k = math.ceil((lo - theta) / 2)
    theta += 2 * k
    return complex(top + math.log(abs(w)), math.pi * theta)


def c_action(z: complex, x):
    """``z . (Z, P) = (e^z Z, P shifted by Im z / pi)`` on families, snapshots or paths."""
    z = complex(z)
    if isinstance(x, SemistableFamily):
        return replace(x, log_mass=x.log_mass.shifted(z.real),
                       phase0=x.phase0.shifted(z.imag / math.pi),
                       seed_phase0=x.seed_phase0 + z.imag / math.pi)
    if isinstance(x, StabilitySnapshot):
        return StabilitySnapshot(x.t, {k: v + z for k, v in x.logz.items()})
    if isinstance(x, ChargePath):
        return x.shifted_by(z)
    if isinstance(x, (list, tuple)):
        return type(x)(c_action(z, y) for y in x)
    raise TypeError(f"c_action does not apply to {type(x).__name__}")


@dataclass(frozen=True)
class GermCheck:
    family_id: str
    fitted: Germ
    analytic: Germ
    deviation: float
    component: str
    residual: float

    @property
    def ok(self) -> bool:
        return self.deviation <= VALIDATION_TOL and not self.fitted.inconclusive


def validation_grid(seed_t: float, t_range=VALIDATION_T_RANGE) -> tuple[list[float], int]:
    """Tracking grid from ``seed_t`` through ``t_range``; returns the grid and the fit start index."""
    lo, hi = t_range
    fit_part = geometric_grid(lo, hi)
    if seed_t < lo:
        head = _grid_between(seed_t, lo)[:-1]
    elif seed_t > lo:
        raise ValueError("families must be seeded at or below the validation range")
    else:
        head = []
    return head + fit_part, len(head)


def validate_family(path: ChargePath, f: SemistableFamily, t_range=VALIDATION_T_RANGE,
                    residual_tol: float = VALIDATION_RESIDUAL_TOL) -> GermCheck:
    """Fit the tracked ``log Z`` of ``f`` and compare with its analytic germ."""
    ts, start = validation_grid(f.seed_t, t_range)
    track = track_log_charge(path, f.cls0, ts, f.seed_phase0)
    samples = list(zip(ts[start:], track[start:]))
    fitted, residual = fit_germ(samples, residual_tol, decay_terms=VALIDATION_DECAY_TERMS)
    target = shift(f, -f.shift).logz_germ
    worst, comp = 0.0, "alpha"
    for name in ("alpha", "beta", "gamma"):
        d = getattr(fitted, name) - getattr(target, name)
        for part, x in (("re", d.real), ("im", d.imag)):
            if abs(x) > worst:
                worst, comp = abs(x), f"{name}.{part}"
    return GermCheck(f.id, fitted, target, worst, comp, residual)
