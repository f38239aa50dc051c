import cmath
import math
from pathlib import Path

import pytest

from stabpath.errors import BadKappa, ScenarioParseError
from stabpath.scenario import apply_tampering, build_model, load_scenario, parse_scenario, with_overrides

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_parse_full():
    s = parse_scenario('''
model = "p1"
seed = 4
checks = ["support"]
[parameters]
k = 1
kappa = "exp(i*pi/4)"
N = 5
[t_grid]
t_min = 2.0
t_max = 30.0
points = 10
[tolerances]
charge = 1e-8
[[tamper]]
family = "O(1)"
component = "alpha"
delta = [0.0, 0.1]
[plot]
classes = ["O(0)"]
''')
    assert s.kind == "p1" and s.seed == 4 and s.checks == ("support",)
    assert s.parameters["kappa"] == pytest.approx(cmath.exp(0.25j * math.pi))
    assert s.t_grid.points == 10 and s.tolerances == {"charge": 1e-8}
    assert s.tamper[0].delta == 0.1j and s.plot_classes == ("O(0)",)


@pytest.mark.parametrize("text", [
    'model = "p1"\nbogus = 1\n',
    'model = "nowhere"\n',
    'model = "p1"\n[parameters]\ng = 2\n',
    'model = "p1"\n[parameters]\nkappa = "t"\n',
    'model = "p1"\n[parameters]\nk = 1.5\n',
    'model = "p1"\n[t_grid]\nt_min = 5.0\nt_max = 1.0\n',
    'model = "p1"\n[[tamper]]\nfamily = "O(0)"\ncomponent = "delta"\n',
    'model = = "p1"\n',
    'seed = 1\n',
])
def test_parse_errors(text):
    with pytest.raises(ScenarioParseError):
        parse_scenario(text)


def test_kappa_forms():
    for val in ("[0.0, 1.0]", "1", '"2*i"'):
        s = parse_scenario(f'model = "p1"\n[parameters]\nkappa = {val}\n')
        assert isinstance(s.parameters["kappa"], complex)


def test_bad_kappa_surfaces():
    s = parse_scenario('model = "p1"\n[parameters]\nkappa = [1.0, -1.0]\n')
    with pytest.raises(BadKappa):
        build_model(s)


def test_overrides():
    s = parse_scenario('model = "p1-glued"\n')
    s2 = with_overrides(s, seed=3, window=4, t_max=10.0)
    assert s2.seed == 3 and s2.parameters["N"] == 4 and s2.t_grid.t_max == 10.0
    with pytest.raises(ScenarioParseError):
        with_overrides(s, t_max=0.5)
    r = parse_scenario('model = "recovering-sod-n3"\n')
    assert with_overrides(r, seed=9).parameters["seed"] == 9
    with pytest.raises(ScenarioParseError):
        with_overrides(r, window=3)


def test_tampering_changes_one_component():
    s = parse_scenario('model = "p1-glued"\n[[tamper]]\nfamily = "O(0)"\ncomponent = "beta"\ndelta = 0.1\n')
    m = build_model(s)
    clean = build_model(parse_scenario('model = "p1-glued"\n'))
    d = m.family("O(0)").logz_germ - clean.family("O(0)").logz_germ
    assert d.beta == pytest.approx(0.1) and d.alpha == 0 and d.gamma == 0
    with pytest.raises(ScenarioParseError):
        apply_tampering(clean, parse_scenario(
            'model = "p1-glued"\n[[tamper]]\nfamily = "X"\ncomponent = "beta"\n').tamper)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_scenarios_load(path):
    s = load_scenario(str(path))
    assert build_model(s).families


def test_missing_file():
    with pytest.raises(ScenarioParseError):
        load_scenario("/nonexistent/scenario.toml")
