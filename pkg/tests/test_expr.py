import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpath.expr import EULER_GAMMA, Const, T, exp, log, parse


def test_parse_and_evaluate():
    e = parse("2*pi*i/(t + 2*C_eu)")
    assert e(1.0) == pytest.approx(2j * math.pi / (1 + 2 * EULER_GAMMA))
    assert parse("exp(i*pi/4)")(3.0) == pytest.approx(cmath.exp(0.25j * math.pi))
    assert parse("t**2 - 1")(3.0) == pytest.approx(8)
    assert parse("-log(t)")(math.e) == pytest.approx(-1)


@pytest.mark.parametrize("bad", ["import os", "t.real", "foo(t)", "t ** 0.5", "x + 1", "'a'"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse(bad)


def test_vectorized():
    e = Const(2) * T() + exp(Const(1j) * T())
    ts = np.array([1.0, 2.0])
    np.testing.assert_allclose(e(ts), 2 * ts + np.exp(1j * ts))


@given(st.floats(0.1, 50), st.floats(-3, 3), st.floats(-3, 3))
def test_round_trip_text(t, a, b):
    e = Const(complex(a, b)) * T() + log(T()) - Const(a) / T()
    e2 = parse(e.to_str())
    assert abs(e(t) - e2(t)) <= 1e-12 * max(1.0, abs(e(t)))
