import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpath.asymptotics import Germ, geometric_grid
from stabpath.charge import FormalObject, SemistableFamily, StabilitySnapshot, snapshot
from stabpath.checks import random_glued_pair
from stabpath.errors import BadTwistDirections, NotGluable, NotInGluedLocus
from stabpath.gluing import (BlockFamily, BlockStability, HomAmplitude, build_recovering_path, d_slice,
                             embed, gluable_threshold, glue, glued_snapshot_from_path, p1_hom_degrees, rho,
                             r_gluable, twist_block, unglue, uniform_amplitude, uniform_spread_check)
from stabpath.models import p1_glued_layout, random_unit_blocks, wall_time


def _block(i, phases, masses=None):
    masses = masses or [1.0] * len(phases)
    fams = tuple(BlockFamily(f"B{i}.{k}", tuple(int(j == k) for j in range(len(phases))),
                             m * cmath.exp(1j * math.pi * p), p)
                 for k, (p, m) in enumerate(zip(phases, masses)))
    return BlockStability(i, tuple(f.charge for f in fams), fams)


def _oracle_gluable(blocks, zs, r, n_ij=1, eps=1e-3, kmax=12):
    """Exhaustive shift scan of the widened Hom-vanishing windows."""
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            for f in blocks[i].families:
                for g in blocks[j].families:
                    pf = f.phase + zs[i].imag / math.pi
                    pg = g.phase + zs[j].imag / math.pi
                    for a in range(-kmax, kmax + 1):
                        if not -eps - r < pf + a <= 1 + r:
                            continue
                        for b in range(-kmax, kmax + 1):
                            if -r < pg + b < 1 + eps + r and b - a > n_ij:
                                return False
    return True


def test_glue_single_block():
    b = _block(0, [0.3, 0.8])
    snap = glue([b], [0.5j], 0.0)
    assert snap.blocks[0] == twist_block(b, 0.5j)
    assert r_gluable([b], [0], 7.0, 0.0)
    assert rho([b], [0], 0.0) == math.inf


def test_glue_disjoint_union():
    b1, b2 = _block(0, [0.2, 0.4]), _block(1, [0.6])
    snap = glue([b1, b2], [0, 10j * math.pi], 0.0)
    assert {e.id for e in snap.entries} == {"B0.0", "B0.1", "B1.0"}
    assert snap.mergeable == ()
    assert embed([b1, b2], 1, (1,)) == (0, 0, 1)


def test_mergeable_equal_phase():
    b1, b2 = _block(0, [0.5]), _block(1, [0.5])
    snap = glue([b1, b2], [0, 20j * math.pi], 0.0)
    assert snap.mergeable == (("B0.0", "B1.0", -20),)


def test_r_gluable_two_blocks_large_t():
    b1, b2 = _block(0, [0.3, 0.9]), _block(1, [0.1, 0.6])
    tw = [Germ(), Germ(1j * math.pi, 0, 0)]
    grid = geometric_grid(0.05, 200, 1.05)
    for r in (1.0, 2.0, 4.0, 8.0):
        th = gluable_threshold([b1, b2], tw, r, grid)
        assert th is not None
        assert all(r_gluable([b1, b2], tw, r, t) for t in grid if t >= th)


def test_not_gluable_at_zero():
    b1, b2 = _block(0, [0.3, 0.9]), _block(1, [0.1, 0.6])
    tw = [Germ(), Germ(1j * math.pi, 0, 0)]
    assert not r_gluable([b1, b2], tw, 2.0, 0.0)
    assert not _oracle_gluable([b1, b2], [0j, 0j], 2.0)
    with pytest.raises(NotGluable):
        glue([b1, b2], tw, 0.0, r=2.0)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3), st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3),
       st.floats(-4, 4), st.floats(-4, 4), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_r_gluable_matches_scan(pa, pb, ya, yb, r):
    blocks = [_block(0, pa), _block(1, pb)]
    zs = [1j * math.pi * ya, 1j * math.pi * yb]
    assert r_gluable(blocks, zs, r, 0.0) == _oracle_gluable(blocks, zs, r)


def test_rho_monotone_two_blocks():
    b1, b2 = _block(0, [0.3, 0.9]), _block(1, [0.1, 0.6])
    tw = [Germ(), Germ(1j * math.pi, 0, 0)]
    grid = geometric_grid(0.05, 100, 1.05)
    rs = [rho([b1, b2], tw, t) for t in grid]
    assert all(b >= a for a, b in zip(rs, rs[1:]))
    assert rs[-1] > 40
    t2 = gluable_threshold([b1, b2], tw, 2.0, grid)
    assert rho([b1, b2], tw, t2) >= 1


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3), st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3),
       st.floats(0, 6), st.floats(1, 4), st.floats(0, 4))
def test_r_gluable_monotone_in_r(pa, pb, y, r1, dr):
    blocks = [_block(0, pa), _block(1, pb)]
    zs = [0j, 1j * math.pi * y]
    if r_gluable(blocks, zs, r1 + dr, 0.0):
        assert r_gluable(blocks, zs, r1, 0.0)


def test_d_slice_examples():
    s = StabilitySnapshot(1.0, {"a": 0.2j, "b": 1 + 2j})
    assert d_slice(s, s) == 0
    moved = StabilitySnapshot(1.0, {k: v + 0.5j * math.pi for k, v in s.logz.items()})
    assert d_slice(s, moved) == pytest.approx(0.5)


def test_d_slice_gluing_law():
    from stabpath.gluing import blockwise_d_slice, d_slice_glued
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = random_glued_pair(rng)
        whole = d_slice(a.stability_snapshot(), b.stability_snapshot())
        assert abs(whole - d_slice_glued(blockwise_d_slice(a, b))) <= 1e-9


phase_maps = st.lists(st.floats(-2, 2), min_size=3, max_size=3)


@given(phase_maps, phase_maps, phase_maps)
def test_d_slice_pseudometric(x, y, z):
    def snap(ps):
        return StabilitySnapshot(1.0, {f"f{k}": 1j * math.pi * p for k, p in enumerate(ps)})
    a, b, c = snap(x), snap(y), snap(z)
    assert d_slice(a, b) == pytest.approx(d_slice(b, a), abs=1e-12)
    assert d_slice(a, c) <= d_slice(a, b) + d_slice(b, c) + 1e-12


def test_unglue_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, _ = random_glued_pair(rng)
        back = unglue(a)
        assert list(back) == list(a.blocks)
        # on the glued locus, re-gluing the restrictions with zero twists changes nothing
        assert glue(back, [0] * len(back), a.t, check=False).blocks == tuple(back)
        for e in a.entries:
            f = next(x for x in back[e.block].families if x.id == e.id)
            s = round(e.phase - f.phase)
            assert f.charge == (-1) ** s * e.charge
            assert f.cls == tuple((-1) ** s * x for x in e.local)
    with pytest.raises(NotInGluedLocus):
        unglue("not a snapshot")


def test_glue_respects_charges():
    rng = np.random.default_rng(11)
    blocks = random_unit_blocks(3, 2, rng)
    gp = build_recovering_path(blocks)
    for t in (0.5, 3.0, 17.0):
        for i, b in enumerate(blocks):
            ez = cmath.exp(gp.twists[i].evaluate(t))
            for f in b.families:
                z = gp.path.eval_Z(embed(blocks, i, f.cls), t)
                assert abs(z - ez * f.charge) <= 1e-12 * abs(z)


def test_p1_glued_region(p1_glued):
    layout, hom = p1_glued_layout(p1_glued)
    tw = wall_time(p1_glued.extras["scenario"])
    t = 3 * tw
    snap = snapshot(p1_glued.path, p1_glued.families, t)
    g = glued_snapshot_from_path(p1_glued.path, snap, layout, hom)
    lo, hi = g.blocks
    assert lo.basis_charges[0] == pytest.approx(1)
    phi = 2 * p1_glued.params["kappa"] * t + 0.5j * math.pi
    assert hi.basis_charges[0] == pytest.approx(cmath.exp(phi), rel=1e-12)
    assert g.entries[1].charge == pytest.approx(p1_glued.path.eval_Z((1, 1), t), rel=1e-12)
    early = snapshot(p1_glued.path, p1_glued.families, 1.0)
    assert 1.0 < tw
    with pytest.raises(NotInGluedLocus):
        glued_snapshot_from_path(p1_glued.path, early, layout, hom)


def test_p1_hom_table_against_cohomology():
    def h0(m):
        return m + 1 if m >= 0 else 0

    def h1(m):
        return h0(-m - 2)
    for a in range(-4, 5):
        for b in range(-4, 5):
            degs = p1_hom_degrees(a, b)
            assert (0 in degs) == (h0(b - a) > 0)
            assert (1 in degs) == (h1(b - a) > 0)


def test_recovering_path_directions():
    blocks = random_unit_blocks(2, 2, np.random.default_rng(0))
    gp = build_recovering_path(blocks)
    d = gp.twists[1] - gp.twists[0]
    assert d.alpha == 1j
    with pytest.raises(BadTwistDirections):
        build_recovering_path(blocks, twists=[Germ(1j, 0, 0), Germ(1j, 0, 0)])
    with pytest.raises(BadTwistDirections):
        build_recovering_path(blocks, twists=[Germ(2j, 0, 0), Germ(1j, 0, 0)])


def test_uniform_spread(p1_glued):
    blocks = random_unit_blocks(2, 2, np.random.default_rng(0))
    gp = build_recovering_path(blocks)
    assert uniform_spread_check(gp.path, gp.families, [1.0, 5.0]) == 0
    tw = wall_time(p1_glued.extras["scenario"])
    grid = [2 * tw, 5 * tw, 10 * tw]
    assert uniform_spread_check(p1_glued.path, p1_glued.families, grid) == 0
    lo, hi = p1_glued.families
    mixed = [FormalObject.of(lo, hi)]
    assert uniform_spread_check(p1_glued.path, p1_glued.families, grid, mixed) > 0


def test_per_pair_support_margin():
    sup = lambda f, g: frozenset({2}) if (f, g) == ("B0.0", "B1.0") else None
    hom = HomAmplitude({}, sup)
    assert hom.margin(0, 1, "B0.0", "B1.0") == 1
    assert hom.margin(0, 1, "B0.0", "x") == 1
    assert uniform_amplitude(3, 2).amplitude[(0, 2)] == 2
