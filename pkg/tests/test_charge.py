import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpath.asymptotics import Germ, RealGerm, geometric_grid
from stabpath.charge import (ChargePath, Constituent, FormalObject, SemistableFamily, StabilitySnapshot,
                             c_action, ell, ell_germ, log_Z, mass_and_phase, shift, snapshot,
                             unwrap_phases, validate_family)
from stabpath.errors import EvalDomain, GridTooCoarse, SpreadTooLarge
from stabpath.expr import EULER_GAMMA, Const, T, exp
from stabpath.models import P1Scenario, build_p1

ZERO = RealGerm(0, 0, 0)


def _fam(fid, cls=(1, 0), phase=0.0):
    return SemistableFamily(fid, cls, ZERO, RealGerm(0, 0, phase))


def test_eval_z_curve(curve):
    want = 1 + 2 * (2j * math.pi / (1 + 2 * EULER_GAMMA))
    got = curve.path.eval_Z((1, 2), 1.0)
    assert abs(got - want) < 1e-12
    assert abs(got - (1 + 5.8328016j)) < 1e-6
    assert curve.path.eval_Z((0, 0), 3.0) == 0
    mags = [abs(curve.path.eval_Z((0, 1), t)) for t in (1e2, 1e4, 1e6)]
    assert mags[0] > mags[1] > mags[2] and mags[2] < 1e-5


def test_eval_z_overflow_and_domain(p1_plus):
    with pytest.raises(EvalDomain):
        p1_plus.path.eval_Z((1, 1), 1e4)
    with pytest.raises(EvalDomain):
        p1_plus.path.eval_Z((1, 1), 0.5)
    assert p1_plus.path.log_abs_Z((1, 1), 1e4) == pytest.approx(2e4)


def test_shift_examples(curve):
    f = curve.family("torsion(1)")
    assert shift(f, 0) == f
    assert shift(shift(f, 1), -1) == f
    g = shift(f, 1)
    assert g.cls == (0, -1)
    assert g.logz_germ.gamma - f.logz_germ.gamma == pytest.approx(1j * math.pi)
    assert g.id == "torsion(1)[1]"


def test_mass_and_phase_examples(p1_glued):
    f = _fam("a", phase=0.3)
    snap = StabilitySnapshot(1.0, {"a": complex(math.log(2.5), 0.3 * math.pi)})
    mp = mass_and_phase(FormalObject.of(f), snap)
    assert mp.m == pytest.approx(2.5)
    assert mp.phi_avg == mp.phi_plus == mp.phi_minus == pytest.approx(0.3)
    a, b = _fam("a"), _fam("b", (0, 1), 0.5)
    snap = StabilitySnapshot(1.0, {"a": 0j, "b": 0.5j * math.pi})
    mp = mass_and_phase(FormalObject.of(a, b), snap)
    assert mp.m == pytest.approx(2) and mp.phi_avg == pytest.approx(0.25)
    lo, hi = p1_glued.family("O(-1)"), p1_glued.family("O(0)")
    s = snapshot(p1_glued.path, p1_glued.families, 2.0)
    mp = mass_and_phase(FormalObject.of(lo, hi), s)
    want = abs(p1_glued.path.eval_Z(lo.cls, 2.0)) + abs(p1_glued.path.eval_Z(hi.cls, 2.0))
    assert mp.m == pytest.approx(want, rel=1e-12)


def test_log_z_examples():
    f = _fam("a", phase=0.3)
    snap = StabilitySnapshot(1.0, {"a": complex(math.log(2.5), 0.3 * math.pi)})
    assert log_Z(FormalObject.of(f), snap) == pytest.approx(complex(math.log(2.5), 0.3 * math.pi))
    a, b = _fam("a"), _fam("b", (0, 1), 0.5)
    snap = StabilitySnapshot(1.0, {"a": 0j, "b": 0.5j * math.pi})
    obj = FormalObject.of(a, b)
    lz = log_Z(obj, snap)
    assert lz == pytest.approx(cmath.log(1 + 1j))
    assert 0 <= lz.imag / math.pi <= 0.5
    diff = ell(obj, snap) - lz
    assert abs(diff.real) == pytest.approx(abs(math.log(math.cos(math.pi / 4))), abs=1e-15)
    wide = FormalObject.of(a, (b, 1))
    with pytest.raises(SpreadTooLarge):
        log_Z(wide, StabilitySnapshot(1.0, {"a": 0j, "b": 0.5j * math.pi}))


def test_c_action_examples(curve):
    f = curve.family("torsion(2)")
    assert c_action(0, f) == f
    g = c_action(1j * math.pi, f)
    assert g.phase_germ == f.phase_germ.shifted(1.0)
    assert g.log_mass == f.log_mass
    assert g.phase_germ == shift(f, 1).phase_germ
    h = c_action(1, f)
    assert h.log_mass == f.log_mass.shifted(1.0) and h.phase_germ == f.phase_germ
    s = snapshot(curve.path, [f], 10.0)
    g2 = c_action(1j * math.pi, f)
    s2 = snapshot(c_action(1j * math.pi, curve.path), [g2], 10.0)
    assert s2.charge(g2) == pytest.approx(-s.charge(f))
    assert s2.phase(g2) == pytest.approx(s.phase(f) + 1)
    p = c_action(1, curve.path)
    assert abs(p.eval_Z((1, 3), 5.0)) == pytest.approx(math.e * abs(curve.path.eval_Z((1, 3), 5.0)))
    with pytest.raises(TypeError):
        c_action(1, "x")


def test_ell_germ(curve):
    f = curve.family("torsion(1)")
    assert ell_germ(f) == f.logz_germ
    g3 = ell_germ(f, 3)
    assert g3.gamma == pytest.approx(math.log(2 * math.pi) + 0.5j * math.pi + math.log(3))
    # numeric mass of O_p^3 at t = 1e6 against the germ
    s = snapshot(curve.path, [f], 1e6)
    m = mass_and_phase(FormalObject((Constituent(f, 0, 3),)), s).m
    assert math.log(m) == pytest.approx(g3.evaluate(1e6).real, abs=1e-5)


def test_unwrap_examples(p1_glued):
    const = ChargePath(1, (Const(2 + 1j),))
    ph = unwrap_phases(const, (1,), [1, 2, 3], 0.1)
    assert ph == pytest.approx([0.1] * 3)
    rot = ChargePath(1, (exp(Const(2j) * T()),))
    ts = np.linspace(0, 10, 2001)
    ph = unwrap_phases(rot, (1,), ts, 0.0)
    np.testing.assert_allclose(ph, 2 * ts / math.pi, atol=1e-12)
    f = p1_glued.family("O(0)")
    ts = np.linspace(1, 20, 400)
    ph = np.array(unwrap_phases(p1_glued.path, f.cls, ts, f.seed_phase))
    slope = np.diff(ph) / np.diff(ts)
    np.testing.assert_allclose(slope, 2 * math.sin(math.pi / 4) / math.pi, rtol=1e-9)


def test_unwrap_grid_too_coarse():
    rot = ChargePath(1, (exp(Const(2j) * T()),))
    with pytest.raises(GridTooCoarse):
        unwrap_phases(rot, (1,), [0, 3, 6], 0.0)


def test_validate_family_matches_analytic(curve):
    for fid in ("torsion(1)", "bundle(2,3)", "bundle(1,-5)"):
        c = validate_family(curve.path, curve.family(fid))
        assert c.ok, c
    bundle = validate_family(curve.path, curve.family("bundle(2,3)"))
    assert bundle.fitted.close_to(Germ(0, 0, math.log(2)), 1e-6)


@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
       st.floats(1, 200))
def test_additivity(v1, v2, t):
    path = build_p1(P1Scenario(kappa=cmath.exp(0.3j))).path
    z1, z2 = path.eval_Z(v1, t), path.eval_Z(v2, t)
    z12 = path.eval_Z(tuple(a + b for a, b in zip(v1, v2)), t)
    assert abs(z12 - (z1 + z2)) <= 1e-12 * max(1.0, abs(z1) + abs(z2))


def test_branch_consistency_all_presets(analyses):
    for a in analyses.values():
        assert all(c.deviation <= 1e-6 for c in a.germ_checks)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_c_action_composition(a, b, c, d):
    z1, z2 = complex(a, b), complex(c, d)
    f = SemistableFamily("x", (1, 0), RealGerm(1, 2, 3), RealGerm(0.5, 0, 0.1), seed_phase0=0.1)
    lhs = c_action(z1, c_action(z2, f))
    rhs = c_action(z1 + z2, f)
    for x, y in zip(lhs.log_mass.as_tuple() + lhs.phase0.as_tuple(), rhs.log_mass.as_tuple() + rhs.phase0.as_tuple()):
        assert x == pytest.approx(y, abs=1e-12)
    snap = StabilitySnapshot(1.0, {"x": 0.3 + 0.2j})
    l2 = c_action(z1, c_action(z2, snap)).logz["x"]
    assert l2 == pytest.approx(c_action(z1 + z2, snap).logz["x"], abs=1e-12)


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0, 0.2), st.integers(1, 4)), min_size=1, max_size=5),
       st.floats(-2, 2))
def test_ell_log_z_bounds(parts, base):
    fams, logz = [], {}
    for k, (lm, dph, _) in enumerate(parts):
        fams.append(_fam(f"f{k}", (1, k)))
        logz[f"f{k}"] = complex(lm, math.pi * (base + dph))
    snap = StabilitySnapshot(1.0, logz)
    obj = FormalObject(tuple(Constituent(f, 0, m) for f, (_, _, m) in zip(fams, parts)))
    mp = mass_and_phase(obj, snap)
    eps = mp.phi_plus - mp.phi_minus
    d = ell(obj, snap) - log_Z(obj, snap)
    assert abs(d.real) <= abs(math.log(math.cos(math.pi * eps / 2))) + 1e-12
    assert abs(d.imag) <= math.pi * eps + 1e-12
