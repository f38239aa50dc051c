"""Asymptotic germs ``alpha*t + beta*log(t) + gamma + o(1)`` at ``t = +inf``.

Germs are the currency of every limit computation in the package: log-charges,
phases and log-mass ratios of limit semistable families are all stored as
germs, and every asymptotic verdict is read off from their leading terms.

Two flavours exist.  *Symbolic* germs come from closed-form derivations and are
classified with a tight tolerance.  *Fitted* germs come out of
:func:`fit_germ`; they carry the held-out residual of the fit and are reported
as :class:`Inconclusive` whenever that residual is too large.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateSamples, InconclusiveGerm

SYMBOLIC_TOL = 1e-9
FITTED_TOL = 1e-6
DEFAULT_RESIDUAL_TOL = 1e-6


def _snap(x: complex, tol: float) -> complex:
    return 0j if abs(x) <= tol else x


@dataclass(frozen=True)
class RealGerm:
    """Real germ ``a*t + b*log(t) + c``; ordered lexicographically."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"RealGerm component {name} is not finite: {v}")
            object.__setattr__(self, name, v)

    def __add__(self, other: RealGerm) -> RealGerm:
        return RealGerm(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: RealGerm) -> RealGerm:
        return RealGerm(self.a - other.a, self.b - other.b, self.c - other.c)

    def __neg__(self) -> RealGerm:
        return RealGerm(-self.a, -self.b, -self.c)

    def __truediv__(self, k: float) -> RealGerm:
        return RealGerm(self.a / k, self.b / k, self.c / k)

    def __mul__(self, k: float) -> RealGerm:
        return RealGerm(self.a * k, self.b * k, self.c * k)

    def __lt__(self, other: RealGerm) -> bool:
        return self.as_tuple() < other.as_tuple()

    def __le__(self, other: RealGerm) -> bool:
        return self.as_tuple() <= other.as_tuple()

    def __gt__(self, other: RealGerm) -> bool:
        return self.as_tuple() > other.as_tuple()

    def __ge__(self, other: RealGerm) -> bool:
        return self.as_tuple() >= other.as_tuple()

    def shifted(self, dc: float) -> RealGerm:
        return RealGerm(self.a, self.b, self.c + dc)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def evaluate(self, t: float) -> float:
        return self.a * t + self.b * math.log(t) + self.c

    def compare(self, other: RealGerm, tol: float = SYMBOLIC_TOL) -> int:
        """Lexicographic comparison treating differences within ``tol`` as ties."""
        for x, y in zip(self.as_tuple(), other.as_tuple()):
            d = x - y
            if d > tol:
                return 1
            if d < -tol:
                return -1
        return 0


@dataclass(frozen=True)
class Germ:
    """Complex germ ``alpha*t + beta*log(t) + gamma``.

    ``residual`` is ``None`` for symbolic germs and the held-out fit residual
    for fitted ones; ``inconclusive`` is sticky under arithmetic.
    """

    alpha: complex = 0j
    beta: complex = 0j
    gamma: complex = 0j
    residual: float | None = None
    inconclusive: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"Germ component {name} is not finite: {v}")
            object.__setattr__(self, name, v)

    def _combine(self, other: Germ) -> tuple[float | None, bool]:
        if self.residual is None and other.residual is None:
            res = None
        else:
            res = (self.residual or 0.0) + (other.residual or 0.0)
        return res, self.inconclusive or other.inconclusive

    def __add__(self, other: Germ) -> Germ:
        res, inc = self._combine(other)
        return Germ(self.alpha + other.alpha, self.beta + other.beta,
                    self.gamma + other.gamma, res, inc)

    def __sub__(self, other: Germ) -> Germ:
        res, inc = self._combine(other)
        return Germ(self.alpha - other.alpha, self.beta - other.beta,
                    self.gamma - other.gamma, res, inc)

    def __neg__(self) -> Germ:
        return Germ(-self.alpha, -self.beta, -self.gamma, self.residual, self.inconclusive)

    def shifted(self, dz: complex) -> Germ:
        """Add a constant to the constant term."""
        return Germ(self.alpha, self.beta, self.gamma + dz, self.residual, self.inconclusive)

    @property
    def is_fitted(self) -> bool:
        return self.residual is not None

    def components(self) -> tuple[complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma)

    def evaluate(self, t: float) -> complex:
        # the log term is skipped when absent so that t = 0 is allowed
        lt = self.beta * math.log(t) if self.beta else 0j
        return self.alpha * t + lt + self.gamma

    def snapped(self, tol: float) -> Germ:
        return Germ(_snap(self.alpha, tol), _snap(self.beta, tol), self.gamma,
                    self.residual, self.inconclusive)

    def close_to(self, other: Germ, tol: float) -> bool:
        return all(abs(x - y) <= tol for x, y in zip(self.components(), other.components()))


@dataclass(frozen=True)
class Converges:
    value: complex


@dataclass(frozen=True)
class DivergesAlongRay:
    direction: complex


@dataclass(frozen=True)
class Inconclusive:
    residual: float | None = None


GermClassification = Union[Converges, DivergesAlongRay, Inconclusive]


@dataclass(frozen=True)
class ToPlusInfinity:
    pass


@dataclass(frozen=True)
class ToMinusInfinity:
    pass


@dataclass(frozen=True)
class ConvergesTo:
    value: float


TO_PLUS_INFINITY = ToPlusInfinity()
TO_MINUS_INFINITY = ToMinusInfinity()
RealTrend = Union[ToPlusInfinity, ToMinusInfinity, ConvergesTo]


def germ_sub(g1: Germ, g2: Germ) -> Germ:
    return g1 - g2


def default_tol(g: Germ) -> float:
    return FITTED_TOL if g.is_fitted else SYMBOLIC_TOL


def classify(g: Germ, tol: float | None = None,
             residual_tol: float = DEFAULT_RESIDUAL_TOL) -> GermClassification:
    if tol is None:
        tol = default_tol(g)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if g.inconclusive or (g.residual is not None and g.residual > residual_tol):
        return Inconclusive(g.residual)
    s = g.snapped(tol)
    if s.alpha != 0:
        return DivergesAlongRay(s.alpha / abs(s.alpha))
    if s.beta != 0:
        return DivergesAlongRay(s.beta / abs(s.beta))
    return Converges(g.gamma)


def real_part(g: Germ) -> RealGerm:
    return RealGerm(g.alpha.real, g.beta.real, g.gamma.real)


def imag_part(g: Germ) -> RealGerm:
    return RealGerm(g.alpha.imag, g.beta.imag, g.gamma.imag)


def real_germ_sign(rg: RealGerm, tol: float = SYMBOLIC_TOL) -> RealTrend:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if rg.a > tol:
        return TO_PLUS_INFINITY
    if rg.a < -tol:
        return TO_MINUS_INFINITY
    if rg.b > tol:
        return TO_PLUS_INFINITY
    if rg.b < -tol:
        return TO_MINUS_INFINITY
    return ConvergesTo(rg.c)


def normalized_limit(g: Germ, tol: float | None = None,
                     residual_tol: float = DEFAULT_RESIDUAL_TOL) -> complex:
    """Limit of ``f/(1+|f|)`` for a function ``f`` with germ ``g``."""
    cls = classify(g, tol, residual_tol)
    if isinstance(cls, Converges):
        c = cls.value
        return c / (1 + abs(c))
    if isinstance(cls, DivergesAlongRay):
        return cls.direction
    raise InconclusiveGerm(f"germ {g} is inconclusive (residual {g.residual})")


def geometric_grid(t0: float, t_max: float, ratio: float = 2.0) -> list[float]:
    """``t0 * ratio**j`` for all ``j`` with value at most ``t_max`` (endpoint appended)."""
    out = []
    j = 0
    while True:
        t = t0 * ratio ** j
        if t > t_max * (1 + 1e-12):
            break
        out.append(t)
        j += 1
    if out and out[-1] < t_max * (1 - 1e-12):
        out.append(float(t_max))
    return out


def _lstsq_fit(ts: np.ndarray, vs: np.ndarray, fit: slice, extra: int):
    cols = [ts, np.log(ts), np.ones_like(ts)] + [ts ** -(k + 1) for k in range(extra)]
    a = np.stack(cols, axis=1)
    scale = np.abs(a[fit]).max(axis=0)
    if np.any(scale == 0):
        raise DegenerateSamples("design matrix has a zero column")
    # rounding in a sample is proportional to its size, so weight rows by 1/max(1, |v|)
    w = 1.0 / np.maximum(1.0, np.abs(vs[fit]))
    a_fit = a[fit] / scale * w[:, None]
    if np.linalg.matrix_rank(a_fit) < a_fit.shape[1]:
        raise DegenerateSamples("design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(a_fit, vs[fit] * w, rcond=None)
    # iterative refinement with extended-precision residuals
    a_ld = a[fit].astype(np.clongdouble)
    v_ld = vs[fit].astype(np.clongdouble)
    for _ in range(2):
        c_ld = (coef / scale).astype(np.clongdouble)
        r = (v_ld - a_ld @ c_ld).astype(complex) * w
        delta, *_ = np.linalg.lstsq(a_fit, r, rcond=None)
        coef = coef + delta
    coef = coef / scale
    return coef, np.abs(a @ coef - vs)


def fit_germ(samples: Sequence[tuple[float, complex]],
             residual_tol: float = DEFAULT_RESIDUAL_TOL,
             decay_terms: int = 1) -> tuple[Germ, float]:
    """Least-squares germ through sampled values of a function of ``t``.

    The fit uses the largest-``t`` half of the samples (never fewer than
    three).  Up to ``decay_terms`` nuisance columns ``t**-1, t**-2, ...``
    absorb the decaying tail and are discarded afterwards.  The number of
    nuisance columns actually used (0 up to ``decay_terms``, capped so a spare
    degree of freedom remains) is the one with the smallest residual, the
    max absolute error on the held-out samples (in-sample when nothing is
    held out).  A residual above ``residual_tol``
    marks the germ inconclusive.
    """
    if len(samples) < 4:
        raise DegenerateSamples("fit_germ needs at least 4 samples")
    ts = np.array([float(s[0]) for s in samples])
    vs = np.array([complex(s[1]) for s in samples])
    if np.any(np.diff(ts) <= 0):
        raise DegenerateSamples("sample abscissae must be strictly increasing")
    if ts[-1] < 1e3:
        raise DegenerateSamples("largest sample must have t >= 1e3")
    if np.any(ts <= 0):
        raise DegenerateSamples("sample abscissae must be positive")
    n = len(ts)
    n_fit = max((n + 1) // 2, 3)
    max_extra = max(0, min(decay_terms, n_fit - 4))
    fit = slice(n - n_fit, n)
    held = slice(0, n - n_fit)
    best = None
    for extra in range(max_extra + 1):
        coef, err = _lstsq_fit(ts, vs, fit, extra)
        residual = float(err[held].max()) if n - n_fit > 0 else float(err.max())
        if best is None or residual < best[1]:
            best = (coef, residual)
    coef, residual = best
    germ = Germ(complex(coef[0]), complex(coef[1]), complex(coef[2]),
                residual=residual, inconclusive=residual > residual_tol)
    return germ, residual


def phase(z: complex) -> float:
    """Principal phase ``arg(z)/pi`` in ``(-1, 1]``."""
    return cmath.phase(z) / math.pi
