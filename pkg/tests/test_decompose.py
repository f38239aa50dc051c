import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpath.charge import FormalObject, snapshot
from stabpath.decompose import (SodBlock, block_rank_identity, build_filtration, build_sod,
                                c_action_compatibility, charge_ratio, class_count_bound,
                                limit_prestability, mass_proportionality_check, numericity_check,
                                refinement_check, render_filtration, render_sod, support_check)
from stabpath.errors import EmptyClass
from stabpath.lattice import full_lattice, span, zero_subgroup
from stabpath.preorder import OrderedPartition, build_partitions


def _decomp(model):
    p_isim, p_sim = build_partitions(model.families)
    return p_isim, p_sim, build_sod(p_isim, model.families), build_filtration(p_sim, model.families)


def test_sod_glued(p1_glued):
    _, _, sod, _ = _decomp(p1_glued)
    assert [b.members for b in sod] == [("O(-1)",), ("O(0)",)]
    assert render_sod(sod) == "⟨O(-1), O(0)⟩"


def test_sod_curve_single_block(curve):
    _, _, sod, _ = _decomp(curve)
    assert len(sod) == 1 and sod[0].lattice_image == full_lattice(2)


def test_sod_recovering(recovering):
    p_isim, _, sod, _ = _decomp(recovering)
    assert [set(b.members) for b in sod] == [set(b) for b in recovering.glued.expected_blocks]


def test_filtration_curve(curve):
    _, _, _, steps = _decomp(curve)
    assert len(steps) == 2
    assert steps[0].num == span([(0, 1)]) and steps[0].den == zero_subgroup(2)
    assert steps[1].num == full_lattice(2) and steps[1].den == span([(0, 1)])
    assert [s.lambda_E.rank for s in steps] == [1, 1]
    assert render_filtration(steps, ("T",)) == "0 ⊊ T ⊊ D"


def test_filtration_p1(p1_plus, p1_minus):
    assert render_filtration(_decomp(p1_plus)[3]) == "0 ⊊ ⟨O(-1)⟩ ⊊ D"
    assert render_filtration(_decomp(p1_minus)[3]) == "0 ⊊ ⟨O(0)⟩ ⊊ D"


def test_limit_prestability_curve(curve):
    _, p_sim, _, _ = _decomp(curve)
    pt = limit_prestability("torsion(1)", p_sim, curve.families)
    assert pt.charges["torsion(1)"] == 1
    for d in range(1, 13):
        assert pt.charges[f"torsion({d})"] == pytest.approx(d, abs=1e-12)
    pb = limit_prestability("bundle(1,0)", p_sim, curve.families, curve.path, 1e13)
    for r in range(1, 13):
        for d in (-12, 0, 7):
            assert pb.charges[f"bundle({r},{d})"] == pytest.approx(r, abs=1e-12)
    assert pb.numeric_deviation < 1e-9
    # independent oracle: the raw ratio (r + d tau) / 1 at t = 1e8
    assert abs(charge_ratio(curve.path, (3, 5), (1, 0), 1e8) - 3) < 1e-6


def test_c_action_compatibility(curve, p1_plus):
    _, p_sim, _, _ = _decomp(curve)
    assert c_action_compatibility("torsion(1)", "torsion(1)", p_sim, curve.families) == 0
    assert c_action_compatibility("torsion(1)", "torsion(2)", p_sim, curve.families) < 1e-12
    _, p_sim, _, _ = _decomp(p1_plus)
    assert c_action_compatibility("O(0)", "O(1)", p_sim, p1_plus.families) <= 1e-9
    pp = limit_prestability("O(0)", p_sim, p1_plus.families)
    for n in range(0, 13):
        assert pp.charges[f"O({n})"] == pytest.approx(n + 1, abs=1e-12)
        r = charge_ratio(p1_plus.path, (1, n + 1), (1, 1), 40.0)
        assert abs(r - (n + 1)) <= 1e-9 * (n + 1)


def test_numericity(p1_glued, curve):
    assert numericity_check(_decomp(p1_glued)[2]).passed
    assert numericity_check(_decomp(curve)[2]).passed
    bad = [SodBlock("a", ("a",), span([(1, 0)])), SodBlock("b", ("b",), span([(2, 0)]))]
    r = numericity_check(bad, 2)
    assert not r.passed and not r.independent


def test_support(curve, p1_glued):
    _, p_sim, _, steps = _decomp(curve)
    for s in steps:
        p = limit_prestability(s.representative, p_sim, curve.families)
        res = support_check(s, p, curve.families)
        assert res.passed and res.epsilon == pytest.approx(1.0)
    _, p_sim, _, steps = _decomp(p1_glued)
    for s in steps:
        p = limit_prestability(s.representative, p_sim, p1_glued.families)
        assert support_check(s, p, p1_glued.families).epsilon == 1.0


def test_support_rescales_with_base(curve):
    _, p_sim, _, steps = _decomp(curve)
    step = steps[0]
    p1 = limit_prestability("torsion(1)", p_sim, curve.families)
    p2 = limit_prestability("torsion(2)", p_sim, curve.families)
    e1 = support_check(step, p1, curve.families).epsilon
    e2 = support_check(step, p2, curve.families).epsilon
    assert e1 == pytest.approx(e2 / abs(p2.charges["torsion(1)"]), abs=1e-12)


def test_support_empty_class(curve):
    _, p_sim, _, steps = _decomp(curve)
    from dataclasses import replace
    empty = replace(steps[0], members=())
    with pytest.raises(EmptyClass):
        support_check(empty, limit_prestability("torsion(1)", p_sim, curve.families), curve.families)


def test_class_count(curve, p1_glued, p1_plus, p1_minus):
    for m in (curve, p1_glued, p1_plus, p1_minus):
        assert class_count_bound(_decomp(m)[1], 2)
    assert not class_count_bound(OrderedPartition((("a",), ("b",), ("c",))), 2)


def test_refinement_and_rank_identity(analyses):
    for a in analyses.values():
        assert refinement_check(a.steps, a.sod, a.p_isim)
        assert block_rank_identity(a.steps, a.sod, a.p_isim)
        assert all(s.lambda_E.rank >= 1 for s in a.steps)


def test_mass_proportionality(curve, p1_plus):
    t1 = curve.family("torsion(1)")
    assert mass_proportionality_check([FormalObject.of(t1)], curve.path, [t1], [10, 100]) == pytest.approx(1)
    a, b = p1_plus.family("O(0)"), p1_plus.family("O(1)")
    obj = FormalObject.of(a, b)
    early = mass_proportionality_check([obj], p1_plus.path, [a, b], [1.0])
    late = mass_proportionality_check([obj], p1_plus.path, [a, b], [20.0, 40.0])
    assert early < late and late > 1 - 1e-9


@given(st.floats(0.01, 0.95), st.floats(-1, 1))
def test_mass_proportionality_cosine_bound(spread, base):
    from stabpath.asymptotics import RealGerm
    from stabpath.charge import SemistableFamily, StabilitySnapshot
    from stabpath.decompose import abs_z_over_mass
    f = SemistableFamily("a", (1, 0), RealGerm(0, 0, 0), RealGerm(0, 0, 0))
    g = SemistableFamily("b", (0, 1), RealGerm(0, 0, 0), RealGerm(0, 0, 0))
    snap = StabilitySnapshot(1.0, {"a": 1j * math.pi * base, "b": 1j * math.pi * (base + spread)})
    ratio = abs_z_over_mass(FormalObject.of(f, g), snap)
    assert ratio >= math.cos(math.pi * spread / 2) - 1e-12


def test_c_action_deviation_all_classes(analyses):
    from stabpath.pipeline import c_action_deviation
    for a in analyses.values():
        assert c_action_deviation(a.p_sim, a.model.families) < 1e-9
