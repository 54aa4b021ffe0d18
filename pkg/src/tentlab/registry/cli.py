"""Command line entry point.

    tentlab validate SCENARIO
    tentlab run SCENARIO [--seed N] [--out PATH] [--format csv|jsonl] [--strict]
    tentlab list-checks
    tentlab list-fixtures

Exit codes: 0 all exact checks pass, 1 an exact check failed,
2 configuration error, 3 numerical error (only with --strict).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..semigroup import fixture_names
from .checks import FAMILIES
from .config import ConfigError, load_config
from .runner import exit_code, execute, serialise

EXIT_OK, EXIT_EXACT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tentlab", description="Numerical checks for tent spaces of semigroups")
    sub = p.add_subparsers(dest="verb", required=True)
    v = sub.add_parser("validate", help="parse a scenario file and report problems")
    v.add_argument("scenario")
    r = sub.add_parser("run", help="run a scenario and write its reports")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, help="output file, '-' for stdout")
    r.add_argument("--format", choices=("csv", "jsonl"), default=None)
    r.add_argument("--strict", action="store_true", help="exit 3 when a check errors numerically")
    sub.add_parser("list-checks", help="list check families")
    sub.add_parser("list-fixtures", help="list fixtures")
    return p


def _summary(reports) -> str:
    n_fail = sum(not r.passed for r in reports)
    n_err = sum(r.errored for r in reports)
    lines = [f"{len(reports)} reports, {n_fail} failing, {n_err} errored"]
    for r in reports:
        if not r.passed:
            tag = "ERROR" if r.errored else ("FAIL exact" if r.exact else "FAIL")
            lines.append(f"  {tag} {r.check_id} [{r.fixture}] {r.sweep_key} ratio={r.ratio:.6g} {r.notes}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "list-checks":
        for fam in FAMILIES.values():
            flag = "exact" if fam.exact else "     "
            print(f"{fam.name:24s} {flag} {fam.scope:8s} {fam.policy:40s} {fam.description}")
        return EXIT_OK
    if args.verb == "list-fixtures":
        for name in fixture_names():
            print(name)
        return EXIT_OK
    try:
        cfg = load_config(args.scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verb == "validate":
        print(f"ok: {len(cfg.checks)} check families, fixtures {', '.join(cfg.fixtures) or '-'}")
        return EXIT_OK
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.format = args.format
    try:
        reports = execute(cfg)
    except TypeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = serialise(reports, cfg.format)
    out = args.out if args.out is not None else str(Path(cfg.output) / f"reports.{cfg.format}")
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    print(_summary(reports), file=sys.stderr)
    return exit_code(reports, args.strict)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
