import math

import pytest

from stabpath.errors import GermValidationError
from stabpath.models import build_preset
from stabpath.pipeline import OPTIONAL_CHECKS, analyze, gluing_thresholds
from stabpath.report import Report, build_report
from stabpath.scenario import build_model, parse_scenario


def test_analyses_pass(analyses):
    for name, a in analyses.items():
        assert a.passed, (name, [(c.name, c.detail) for c in a.failed()])
        assert a.verdict.passed


def test_requested_subset(p1_glued):
    a = analyze(p1_glued, requested=["support", "numericity"])
    assert [c.name for c in a.checks] == ["numericity", "support"]
    with pytest.raises(KeyError):
        analyze(p1_glued, requested=["nonsense"])


def test_tolerance_override(p1_plus):
    c = analyze(p1_plus, tolerances={"charge": 1e-30}).check("limit_charges_numeric")
    assert c.tolerance == 1e-30 and c.passed == (c.value <= 1e-30)


def test_tampered_raises():
    m = build_model(parse_scenario('model = "p1-glued"\n[[tamper]]\nfamily = "O(0)"\n'
                                   'component = "gamma"\ndelta = [0.1, 0.0]\n'))
    with pytest.raises(GermValidationError) as exc:
        analyze(m)
    assert exc.value.witness.family_id == "O(0)"
    assert analyze(m, validate=False).verdict.passed


def test_rho_is_optional(recovering):
    assert "rho_monotone" in OPTIONAL_CHECKS
    a = analyze(recovering, validate=False)
    assert "rho_monotone" not in [c.name for c in a.checks]
    b = analyze(recovering, validate=False, requested=["rho_monotone", "recovered_blocks"])
    assert [c.name for c in b.checks] == ["recovered_blocks", "rho_monotone"]


def test_thresholds_ordered(recovering):
    th = gluing_thresholds(recovering)
    assert all(x is not None for x in th)
    assert th == sorted(th)


def test_report_round_trip(analyses):
    for a in analyses.values():
        rep = build_report(a, a.model.name, 0)
        assert Report.from_json(rep.to_json()) == rep
        assert rep.to_json() == build_report(a, a.model.name, 0).to_json()
        text = rep.to_text()
        assert "overall: PASS" in text and "-0 " not in text


def test_report_schema_guard(analyses):
    d = build_report(next(iter(analyses.values()))).to_dict()
    d["schema_version"] = 99
    with pytest.raises(ValueError):
        Report.from_dict(d)


def test_report_infinities(p1_glued):
    a = analyze(p1_glued)
    rep = build_report(a)
    rep.checks[0].value = math.inf
    back = Report.from_json(rep.to_json())
    assert back.checks[0].value == math.inf
