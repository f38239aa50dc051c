"""Scenario builders: the projective line, curves of genus g >= 2, glued blocks.

Every builder returns a :class:`Model`: a charge path plus a registry of
families whose germs are derived in closed form.  The engine cross-checks
those germs numerically before using them.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .asymptotics import Germ, geometric_grid
from .charge import ChargePath, Constituent, FormalObject, SemistableFamily
from .errors import BadKappa
from .expr import Const, Expr, T, exp, parse
from .gluing import (BlockFamily, BlockStability, GluedPath, HomAmplitude, build_recovering_path,
                     p1_line_bundle_support, uniform_amplitude)

WALL_TOL = 1e-9


@dataclass(frozen=True)
class Model:
    name: str
    path: ChargePath
    families: tuple[SemistableFamily, ...]
    rank: int
    params: dict = field(default_factory=dict)
    basis_labels: tuple[str, ...] = ()
    analytic_support_eps: float | None = None
    glued: GluedPath | None = None
    extras: dict = field(default_factory=dict)

    def family(self, fid: str) -> SemistableFamily:
        for f in self.families:
            if f.id == fid:
                return f
        raise KeyError(fid)

    def with_families(self, families: Sequence[SemistableFamily]) -> Model:
        from dataclasses import replace
        return replace(self, families=tuple(families))


def _seed(path: ChargePath, v, t0: float) -> float:
    s, w = path.scaled(v, [t0])
    return (s[0].imag + cmath.phase(w[0])) / math.pi


def _seed_principal(path: ChargePath, v, t0: float) -> float:
    s, w = path.scaled(v, [t0])
    ph = (s[0].imag + cmath.phase(w[0])) / math.pi
    return ph - 2 * math.ceil((ph - 1) / 2)


def _fam(fid, cls, germ: Germ, params, seed, t0, kind) -> SemistableFamily:
    return SemistableFamily.from_logz(fid, cls, germ, discrete_params=params, seed_phase0=seed,
                                      seed_t=t0, kind=kind)


# ---------------------------------------------------------------- projective line

@dataclass(frozen=True)
class P1Scenario:
    k: int = 0
    kappa: complex = 1.0
    N: int = 12
    include_decay: bool = False
    decay_c: float = 0.5
    t0: float = 1.0


class Region(enum.Enum):
    GEOMETRIC = "Geometric"
    GLUED = "Glued"
    WALL = "Wall"


def okada_expr(s: P1Scenario) -> Expr:
    """``phi_k(t) = 2 kappa t + i pi / 2`` (plus ``c / t`` when decay is enabled)."""
    e = Const(2 * complex(s.kappa)) * T() + Const(0.5j * math.pi)
    if s.include_decay:
        e = e + Const(s.decay_c) / T()
    return e


def p1_path(s: P1Scenario) -> ChargePath:
    """Frame ``([O(k-1)], [O(k)]) = ((1,0), (1,1))`` with charges ``1`` and ``e^{phi_k}``."""
    return ChargePath(2, (Const(1), Const(1)), (None, okada_expr(s)), domain_start=s.t0,
                      frame=((1, 0), (1, 1)))


def p1_class(n: int, k: int) -> tuple[int, int]:
    return (1, n - k + 1)


def _check_kappa(kappa: complex):
    kappa = complex(kappa)
    if kappa == 0:
        raise BadKappa("kappa must be nonzero")
    if kappa.imag < 0:
        raise BadKappa("kappa must have nonnegative imaginary part")
    return kappa


def build_p1(s: P1Scenario) -> Model:
    kappa = _check_kappa(s.kappa)
    path = p1_path(s)
    two_k = 2 * kappa
    k, t0 = s.k, s.t0
    fams = []
    if kappa.imag > 0:
        fams.append(_fam(f"O({k - 1})", p1_class(k - 1, k), Germ(), (k - 1,), 0.0, t0, "line"))
        seed = okada_expr(s)(t0).imag / math.pi
        fams.append(_fam(f"O({k})", p1_class(k, k), Germ(two_k, 0, 0.5j * math.pi), (k,), seed, t0, "line"))
        regime = "glued"
    else:
        for n in range(k - s.N, k + s.N + 1):
            m = n - k + 1
            if kappa.real > 0:
                if m >= 1:
                    g = Germ(two_k, 0, math.log(m) + 0.5j * math.pi)
                elif m == 0:
                    g = Germ()
                else:
                    g = Germ(two_k, 0, math.log(-m) - 0.5j * math.pi)
            else:
                if m == 1:
                    g = Germ(two_k, 0, 0.5j * math.pi)
                elif m >= 2:
                    g = Germ(0, 0, math.log(m - 1) + 1j * math.pi)
                elif m == 0:
                    g = Germ()
                else:
                    g = Germ(0, 0, math.log(1 - m))
            cls = p1_class(n, k)
            fams.append(_fam(f"O({n})", cls, g, (n,), _seed_principal(path, cls, t0), t0, "line"))
        for d in range(1, s.N + 1):
            if kappa.real > 0:
                g = Germ(two_k, 0, math.log(d) + 0.5j * math.pi)
            else:
                g = Germ(0, 0, math.log(d) + 1j * math.pi)
            cls = (0, d)
            fams.append(_fam(f"torsion({d})", cls, g, (d,), _seed_principal(path, cls, t0), t0, "torsion"))
        regime = "geometric-plus" if kappa.real > 0 else "geometric-minus"
    params = {"k": k, "kappa": kappa, "N": s.N, "include_decay": s.include_decay, "regime": regime}
    return Model(f"p1-{regime}", path, tuple(fams), 2, params, ("[O(k-1)]", "[O_p]"), 1.0,
                 extras={"scenario": s})


def region_of(s: P1Scenario, t: float) -> Region:
    im = okada_expr(s)(t).imag
    if abs(im - math.pi) <= WALL_TOL:
        return Region.WALL
    return Region.GLUED if im > math.pi else Region.GEOMETRIC


def wall_time(s: P1Scenario) -> float | None:
    """The ``t`` with ``Im phi_k(t) = pi`` (decay terms are real and do not move it)."""
    kappa = complex(s.kappa)
    if kappa.imag <= 0:
        return None
    return math.pi / (4 * kappa.imag)


def decompose_nonstable_p1_object(n: int, model: Model) -> FormalObject:
    """Glued-region constituents of ``O(n)`` in terms of ``O(k-1)`` and ``O(k)``."""
    k = model.params["k"]
    if model.params["regime"] != "glued":
        raise ValueError("decomposition is only defined in the glued regime")
    lo, hi = model.family(f"O({k - 1})"), model.family(f"O({k})")
    if n == k:
        return FormalObject((Constituent(hi),))
    if n == k - 1:
        return FormalObject((Constituent(lo),))
    if n > k:
        return FormalObject((Constituent(hi, 0, n - k + 1), Constituent(lo, 1, n - k)))
    return FormalObject((Constituent(lo, 0, k - n), Constituent(hi, 1, k - n - 1)))


def p1_glued_layout(model: Model):
    """Block layout ``<O(k-1)>, <O(k)>`` and the line-bundle Hom table."""
    k = model.params["k"]
    lo, hi = model.family(f"O({k - 1})"), model.family(f"O({k})")
    layout = [([p1_class(k - 1, k)], [lo]), ([p1_class(k, k)], [hi])]
    hom = HomAmplitude({}, p1_line_bundle_support({lo.id: (k - 1, 0), hi.id: (k, 0)}))
    return layout, hom


# ---------------------------------------------------------------- curves

@dataclass(frozen=True)
class CurveScenario:
    g: int = 2
    theta: float = 0.0
    N: int = 12
    tau: str | None = None
    torsion_germ: tuple[complex, complex, complex] | None = None
    t0: float = 1.0


def curve_tau(s: CurveScenario) -> Expr:
    if s.tau is not None:
        return parse(s.tau)
    c = 2 * (s.g - 1)
    return Const(2j * math.pi) / (exp(Const(1j * s.theta)) * T() + Const(c) * Const(0.57721566490153286060651209))


def build_curve(s: CurveScenario) -> Model:
    if s.tau is None and s.g < 2:
        raise ValueError("genus below 2 needs a user-supplied tau path")
    if not -math.pi / 2 < s.theta < math.pi / 2:
        raise ValueError("theta must lie in (-pi/2, pi/2)")
    if s.tau is not None and s.torsion_germ is None:
        raise ValueError("a custom tau path needs the torsion(1) germ")
    tau = curve_tau(s)
    path = ChargePath(2, (Const(1), tau), domain_start=0.0)
    check = np.array([0.0] + geometric_grid(1e-3, 1e8, 2.0))
    if np.any(tau.evaluate(check).imag <= 0):
        raise ValueError("Im tau(t) must stay positive")
    if s.torsion_germ is not None:
        tg = Germ(*[complex(x) for x in s.torsion_germ])
    else:
        tg = Germ(0, -1, math.log(2 * math.pi) + 1j * (math.pi / 2 - s.theta))
    t0 = s.t0
    fams = []
    for d in range(1, s.N + 1):
        cls = (0, d)
        fams.append(_fam(f"torsion({d})", cls, tg.shifted(math.log(d)), (d,),
                         _seed_principal(path, cls, t0), t0, "torsion"))
    for r in range(1, s.N + 1):
        for d in range(-s.N, s.N + 1):
            cls = (r, d)
            fams.append(_fam(f"bundle({r},{d})", cls, Germ(0, 0, math.log(r)), (r, d),
                             _seed_principal(path, cls, t0), t0, "bundle"))
    params = {"g": s.g, "theta": s.theta, "N": s.N}
    # Z(r, d) / Z(1, 0) = r + d tau(t) converges like 1/t, so check the limit far out
    return Model(f"curve-genus-{s.g}", path, tuple(fams), 2, params, ("rank", "degree"), 1.0,
                 extras={"scenario": s, "numeric_t": 1e13, "filtration_labels": ("T",)})


# ---------------------------------------------------------------- glued blocks

@dataclass(frozen=True)
class RecoveringScenario:
    n_blocks: int = 3
    families_per_block: int = 2
    seed: int = 0
    amplitude: int = 1
    twists: tuple[Germ, ...] | None = None


def random_unit_blocks(n_blocks: int, per_block: int, rng: np.random.Generator) -> list[BlockStability]:
    """Quiver-style blocks: simple objects with unit mass and random phases in ``(0, 1]``."""
    blocks = []
    for i in range(n_blocks):
        fams = []
        charges = []
        for k in range(per_block):
            ph = float(rng.uniform(0.05, 1.0))
            z = cmath.exp(1j * math.pi * ph)
            cls = tuple(int(j == k) for j in range(per_block))
            fams.append(BlockFamily(f"S{i + 1}.{k + 1}", cls, z, ph))
            charges.append(z)
        blocks.append(BlockStability(i, tuple(charges), tuple(fams)))
    return blocks


def build_recovering(s: RecoveringScenario) -> Model:
    rng = np.random.default_rng(s.seed)
    blocks = random_unit_blocks(s.n_blocks, s.families_per_block, rng)
    hom = uniform_amplitude(s.n_blocks, s.amplitude)
    gp = build_recovering_path(blocks, hom, s.twists)
    params = {"n_blocks": s.n_blocks, "families_per_block": s.families_per_block, "seed": s.seed,
              "amplitude": s.amplitude}
    labels = tuple(f"[{f.id}]" for b in blocks for f in b.families)
    return Model(f"recovering-sod-n{s.n_blocks}", gp.path, gp.families, gp.path.ambient_rank,
                 params, labels, 1.0, glued=gp)


# ---------------------------------------------------------------- presets

PRESETS: dict[str, Any] = {
    "p1-glued": lambda **kw: build_p1(P1Scenario(**{"kappa": cmath.exp(0.25j * math.pi), **kw})),
    "p1-geometric-plus": lambda **kw: build_p1(P1Scenario(**{"kappa": 1.0, **kw})),
    "p1-geometric-minus": lambda **kw: build_p1(P1Scenario(**{"kappa": -1.0, **kw})),
    "curve-genus-g": lambda **kw: build_curve(CurveScenario(**kw)),
    "recovering-sod-n3": lambda **kw: build_recovering(RecoveringScenario(**{"n_blocks": 3, **kw})),
}


def build_preset(name: str, **params) -> Model:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return PRESETS[name](**params)
