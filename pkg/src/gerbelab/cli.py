"""
Command line entry point.

    gerbelab <suite> [--seed S] [--samples N] [--resolution R] [--tol name=value] [--json PATH]
    gerbelab list
    gerbelab cohomology --complex FILE --degree K
    gerbelab class-info --complex FILE --cochain NAME
    gerbelab dd --gerbe FILE [--cochain NAME]

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from math import isinf

from . import cech, gerbe
from .cech import Ring
from .homology import class_info, class_order, cohomology
from .intlinalg import IntMatrix
from .suites import DEFAULT_TOLS, SUITES, RunConfig

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITE_ORDER = [name for name in SUITES if name != "all"]


class UsageError(Exception):
    pass


def list_suites():
    return [{"name": name, "description": desc} for name, (_, desc) in SUITES.items()]


def run(config):
    """Run a suite and return its report as a dict."""
    if config.suite not in SUITES:
        raise UsageError(f"unknown suite {config.suite!r}")
    for name, value in config.tolerances.items():
        if name not in DEFAULT_TOLS:
            raise UsageError(f"unknown tolerance {name!r}")
        if not value > 0:
            raise UsageError(f"tolerance {name} must be positive")
    t0 = time.perf_counter()
    if config.suite == "all":
        parts = [run(RunConfig(**{**config.__dict__, "suite": name})) for name in SUITE_ORDER]
        report = {"suite": "all", "config": config.to_json(), "suites": parts,
                  "verdict": "pass" if all(p["verdict"] == "pass" for p in parts) else "fail"}
    else:
        checks = SUITES[config.suite][0](config)
        report = {"suite": config.suite, "config": config.to_json(),
                  "checks": [c.to_json() for c in checks],
                  "verdict": "pass" if all(c.passed for c in checks) else "fail"}
    report["wall_time"] = round(time.perf_counter() - t0, 6)
    return report


def _print_table(report, out):
    parts = report.get("suites", [report])
    for part in parts:
        for c in part["checks"]:
            mark = "PASS" if c["pass"] else "FAIL"
            print(f"{mark}  {part['suite']:<20} {c['name']:<36} {c['value']}", file=out)
    print(f"verdict: {report['verdict']}", file=out)


def _parse_tol(items):
    tols = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects name=value, got {item!r}")
        try:
            tols[name] = float(value)
        except ValueError:
            raise UsageError(f"tolerance {name} is not a number") from None
    return tols


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _emit(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from None
    return text


def _order(o):
    return "infinite" if isinf(o) else int(o)


def cmd_cohomology(args):
    nerve, _ = cech.from_json(_load_json(args.complex))
    try:
        G = cohomology(nerve, args.degree)
    except cech.NerveError as exc:
        raise UsageError(str(exc)) from None
    return {"degree": args.degree, "free_rank": G.free_rank,
            "torsion_factors": list(G.torsion_factors)}


def cmd_class_info(args):
    obj = _load_json(args.complex)
    if "matrix" in obj:
        try:
            A = IntMatrix.from_json(obj["matrix"])
            return {"order": _order(class_order(A, obj["vector"]))}
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed matrix file: {exc}") from None
    nerve, cochains = cech.from_json(obj)
    if args.cochain not in cochains:
        raise UsageError(f"no cochain named {args.cochain!r}")
    return class_info(cochains[args.cochain], nerve).to_json()


def cmd_dd(args):
    nerve, cochains = cech.from_json(_load_json(args.gerbe))
    name = args.cochain
    if name is None:
        names = [k for k, c in cochains.items() if c.ring is Ring.CIRCLE and c.degree == 2]
        if not names:
            raise UsageError("the file holds no CIRCLE 2-cochain")
        name = names[0]
    if name not in cochains:
        raise UsageError(f"no cochain named {name!r}")
    G = gerbe.from_cocycle(nerve, cochains[name])
    return gerbe.dd(G).to_json(nerve)


def build_parser():
    parser = argparse.ArgumentParser(prog="gerbelab", description="Bundle gerbe verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the verification suites")
    for name, (_, desc) in SUITES.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=0, help="sample count (0: suite default)")
        p.add_argument("--resolution", type=int, default=3, help="arcs per circle for T^3 covers")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE")
        p.add_argument("--json", metavar="PATH")
        p.add_argument("--n", type=int, action="append", help="matrix size for the spectral suite")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("cohomology", help="integral cohomology of a complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--degree", type=int, required=True)
    p = sub.add_parser("class-info", help="order of an integral cocycle's class")
    p.add_argument("--complex", required=True)
    p.add_argument("--cochain")
    p = sub.add_parser("dd", help="Dixmier-Douady class of a gerbe file")
    p.add_argument("--gerbe", required=True)
    p.add_argument("--cochain")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            for entry in list_suites():
                print(f"{entry['name']:<20} {entry['description']}")
            return EXIT_PASS
        if args.command in ("cohomology", "class-info", "dd"):
            handler = {"cohomology": cmd_cohomology, "class-info": cmd_class_info,
                       "dd": cmd_dd}[args.command]
            print(_emit(handler(args), None))
            return EXIT_PASS
        if args.resolution < 3 or args.samples < 0 or args.trials < 1:
            raise UsageError("resolution must be >= 3, samples >= 0 and trials >= 1")
        if args.n and any(not 2 <= n <= 6 for n in args.n):
            raise UsageError("--n must lie in 2..6")
        config = RunConfig(args.command, args.seed, args.samples, args.resolution,
                           _parse_tol(args.tol), tuple(args.n or ()), args.trials, args.json)
        report = run(config)
        _emit(report, args.json)
        if not args.quiet:
            _print_table(report, sys.stdout)
        return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL
    except (UsageError, cech.CocycleError) as exc:
        print(f"gerbelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
