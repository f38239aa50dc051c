import json
from pathlib import Path

import pytest

from stabpath.cli import main
from stabpath.plot import CSV_HEADER, plot
from stabpath.report import Report

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_run_json(tmp_path):
    assert main(["run", "--scenario", str(SCENARIOS / "p1-glued.toml"), "--out", str(tmp_path)]) == 0
    rep = Report.from_json((tmp_path / "report.json").read_text())
    assert rep.sod == "⟨O(-1), O(0)⟩" and rep.passed


def test_run_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--scenario", "recovering-sod-n3", "--seed", "5", "--out", str(d), "--plot"]) == 0
    for name in ("report.json", "plot.csv", "plot.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_text_to_stdout(capsys):
    assert main(["run", "--scenario", "curve-genus-g", "--format", "text", "--window", "4"]) == 0
    out = capsys.readouterr().out
    assert "filtration: 0 ⊊ T ⊊ D" in out


def test_exit_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('model = "p1"\nwat = 3\n')
    assert main(["run", "--scenario", str(bad)]) == 2
    assert main(["run", "--scenario", str(tmp_path / "missing.toml")]) == 2
    neg = tmp_path / "neg.toml"
    neg.write_text('model = "p1"\n[parameters]\nkappa = [0.0, -1.0]\n')
    assert main(["run", "--scenario", str(neg)]) == 2
    unknown = tmp_path / "unknown.toml"
    unknown.write_text('model = "p1-glued"\nchecks = ["nope"]\n')
    assert main(["run", "--scenario", str(unknown)]) == 2
    assert main([]) == 2


def test_exit_inconsistent(capsys):
    assert main(["run", "--scenario", str(SCENARIOS / "tampered-p1.toml")]) == 3
    assert "O(0)" in capsys.readouterr().err


def test_exit_check_failure(tmp_path):
    s = tmp_path / "tight.toml"
    s.write_text('model = "p1-geometric-plus"\n[tolerances]\ncharge = 1e-30\n')
    assert main(["run", "--scenario", str(s), "--out", str(tmp_path)]) == 1


def test_plot_outputs(tmp_path):
    assert main(["plot", "--scenario", str(SCENARIOS / "p1-glued.toml"), "--out", str(tmp_path)]) == 0
    csv = (tmp_path / "plot.csv").read_text().splitlines()
    assert csv[0] == CSV_HEADER and len(csv) == 1 + 2 * 200
    svg = (tmp_path / "plot.svg").read_text()
    assert svg.startswith("<?xml") and 'class="wall"' in svg


def test_plot_empty_class_list(p1_glued):
    csv, svg = plot(p1_glued, [], 1.0, 10.0, 5)
    assert csv == CSV_HEADER + "\n"
    assert "<svg" in svg
    with pytest.raises(KeyError):
        plot(p1_glued, ["nope"], 1.0, 10.0, 5)


def test_check_command(tmp_path):
    assert main(["check", "--scenario", "p1-glued", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert "FAIL" not in (tmp_path / "checks.txt").read_text()


@pytest.mark.parametrize("name", ["p1-geometric-plus", "p1-geometric-minus", "recovering-sod-n3"])
def test_shipped_scenarios_run(name, tmp_path):
    assert main(["run", "--scenario", str(SCENARIOS / f"{name}.toml"), "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["schema_version"] == 1 and d["passed"]
