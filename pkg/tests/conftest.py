import cmath
import math

import pytest
from hypothesis import settings

from stabpath import models
from stabpath.pipeline import analyze

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GLUED_KAPPA = cmath.exp(0.25j * math.pi)


@pytest.fixture(scope="session")
def p1_glued():
    return models.build_p1(models.P1Scenario(k=0, kappa=GLUED_KAPPA))


@pytest.fixture(scope="session")
def p1_plus():
    return models.build_p1(models.P1Scenario(k=0, kappa=1.0))


@pytest.fixture(scope="session")
def p1_minus():
    return models.build_p1(models.P1Scenario(k=0, kappa=-1.0))


@pytest.fixture(scope="session")
def curve():
    return models.build_curve(models.CurveScenario(g=2, theta=0.0, N=12))


@pytest.fixture(scope="session")
def recovering():
    return models.build_recovering(models.RecoveringScenario(n_blocks=3, seed=0))


@pytest.fixture(scope="session")
def analyses(p1_glued, p1_plus, p1_minus, curve, recovering):
    return {m.name: analyze(m) for m in (p1_glued, p1_plus, p1_minus, curve, recovering)}


# one pass/fail line per acceptance criterion, printed in the terminal summary
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "parts": []})
    if rep.when == "call":
        status = "xfail" if hasattr(rep, "wasxfail") and rep.skipped else rep.outcome
        entry["parts"].append((item.name, status))
    elif rep.when == "setup" and rep.outcome != "passed":
        entry["parts"].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        bad = [(name, s) for name, s in e["parts"] if s != "passed"]
        line = f"criterion {n}: {'PASS' if not bad else 'FAIL'}  {e['title']}"
        if bad:
            line += "  [" + ", ".join(f"{name}: {s}" for name, s in bad) + "]"
        tr.write_line(line)
