"""Command line: ``stabpath {run,plot,check} --scenario FILE``.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 the scenario
could not be parsed or built, 3 the scenario is inconsistent (an analytic
germ failed validation, or the preorder is not transitive).
"""
from __future__ import annotations

import argparse
import os
import sys

from . import models
from .checks import run_suites
from .errors import BadKappa, GermValidationError, ScenarioParseError, StabPathError
from .pipeline import analyze
from .plot import plot
from .report import build_report
from .scenario import Scenario, build_model, load_scenario, parse_scenario, with_overrides

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_INCONSISTENT = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabpath", description="Limits of Bridgeland stability paths.")
    sub = p.add_subparsers(dest="command")
    for name, text in (("run", "analyze a scenario and write a report"),
                       ("plot", "write Z_t trajectories as CSV and SVG"),
                       ("check", "run the property suites against a scenario")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--scenario", required=True, help="scenario TOML file or a preset name")
        s.add_argument("--out", help="output directory (default: print to stdout)")
        s.add_argument("--seed", type=int, help="seed for randomized properties and random blocks")
        s.add_argument("--t-max", type=float, help="upper end of the plotted t range")
        s.add_argument("--window", type=int, help="window size N for the family registry")
        s.add_argument("--format", choices=("json", "text"), default="json")
        s.add_argument("--plot", action="store_true", help="also write plot.csv and plot.svg")
        s.add_argument("--check", action="store_true", help="also run the property suites")
    return p


def _load(arg: str) -> Scenario:
    if not os.path.exists(arg) and arg in models.PRESETS:
        return parse_scenario(f'model = "{arg}"\n')
    return load_scenario(arg)


def _emit(out_dir: str | None, name: str, text: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _plot(model, s: Scenario, out_dir: str | None):
    g = s.t_grid
    csv, svg = plot(model, s.plot_classes, g.t_min, g.t_max, g.points)
    if out_dir is None:
        sys.stdout.write(csv)
    else:
        _emit(out_dir, "plot.csv", csv)
        _emit(out_dir, "plot.svg", svg)


def _check(model, s: Scenario, out_dir: str | None) -> bool:
    rep = run_suites(model, s.seed)
    _emit(out_dir, "checks.txt", rep.to_text())
    return rep.passed


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command is None:
        _parser().print_help(sys.stderr)
        return EXIT_PARSE
    try:
        s = with_overrides(_load(args.scenario), args.seed, args.window, args.t_max)
        model = build_model(s)
    except (ScenarioParseError, BadKappa, KeyError) as exc:
        print(f"stabpath: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StabPathError as exc:
        print(f"stabpath: cannot build scenario: {exc}", file=sys.stderr)
        return EXIT_PARSE
    ok = True
    try:
        if args.command == "run":
            a = analyze(model, requested=s.checks, tolerances=s.tolerances)
            rep = build_report(a, s.model, s.seed)
            text = rep.to_json() if args.format == "json" else rep.to_text()
            _emit(args.out, "report.json" if args.format == "json" else "report.txt", text)
            ok = rep.passed
            if args.plot:
                _plot(model, s, args.out)
            if args.check:
                ok = _check(model, s, args.out) and ok
        elif args.command == "plot":
            _plot(model, s, args.out)
        else:
            ok = _check(model, s, args.out)
    except GermValidationError as exc:
        w = exc.witness
        print(f"stabpath: germ validation failed: {exc}", file=sys.stderr)
        if w is not None:
            print(f"  family {w.family_id}: fitted {w.fitted}, analytic {w.analytic}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except KeyError as exc:
        print(f"stabpath: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StabPathError as exc:
        print(f"stabpath: scenario inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK if ok else EXIT_CHECK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
