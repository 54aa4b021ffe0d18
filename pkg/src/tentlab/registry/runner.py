"""Execute a scenario and serialise its reports deterministically."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..report import CheckReport, errored_report
from ..semigroup import fixture as make_fixture
from .checks import FAMILIES, FixtureRun
from .config import ScenarioConfig

COLUMNS = ("checkId", "fixture", "sweepKey", "lhs", "rhs", "ratio", "budget", "pass", "seed")
NUMERIC_ERRORS = (FloatingPointError, ArithmeticError, np.linalg.LinAlgError, RuntimeError, ValueError)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TENTLAB_THREADS", "1")))
    except ValueError:
        return 1


def _run_family(run: FixtureRun, fam, overrides: dict) -> list:
    try:
        reps = fam.runner(run, **overrides)
    except TypeError as exc:
        if "unexpected keyword" in str(exc):
            raise
        reps = [errored_report(fam.name, f"{type(exc).__name__}: {exc}")]
    except NUMERIC_ERRORS as exc:
        reps = [errored_report(fam.name, f"{type(exc).__name__}: {exc}")]
    out = []
    for r in reps:
        fx = r.fixture if fam.scope == "line" and r.fixture else run.name
        key = r.sweep_key
        if r.check_id != fam.name:
            key = f"{r.check_id}:{key}" if key else r.check_id
        out.append(r.with_(check_id=fam.name, fixture=fx, sweep_key=key, seed=run.seed, exact=fam.exact))
    return out


def _fixture_task(cfg: ScenarioConfig, name: str, family_names: list) -> list:
    families = [FAMILIES[f] for f in family_names]
    run = FixtureRun(name, make_fixture(name), cfg.time_grid(), cfg.seed)
    out = []
    # the L^(1/2) value feeds the H^S ~ H^G hypotheses, so it goes first when both are requested
    order = sorted(families, key=lambda f: 0 if f.name == "lhalf" else 1)
    for fam in order:
        out += _run_family(run, fam, cfg.overrides.get(fam.name, {}))
    return out


def _line_task(cfg: ScenarioConfig, name: str) -> list:
    fam = FAMILIES[name]
    run = FixtureRun("LINE", None, cfg.time_grid(), cfg.seed)
    return _run_family(run, fam, cfg.overrides.get(fam.name, {}))


def execute(cfg: ScenarioConfig, threads: int | None = None) -> list:
    """Run every requested check.

    Fixtures and line families are independent jobs; with more than one
    worker they run in separate processes. Every job seeds its own RNG, so
    the reports do not depend on the worker count.
    """
    threads = thread_count() if threads is None else threads
    per_fixture: dict = {name: [] for name in cfg.fixtures}
    line = []
    for req in cfg.checks:
        fam = FAMILIES[req.family]
        if fam.scope == "line":
            line.append(fam.name)
            continue
        targets = cfg.fixtures if req.fixtures is None else req.fixtures
        for name in targets:
            per_fixture.setdefault(name, []).append(fam.name)
    jobs = [(_fixture_task, (cfg, n, fams)) for n, fams in per_fixture.items() if fams]
    jobs += [(_line_task, (cfg, fam)) for fam in line]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            futures = [pool.submit(fn, *args) for fn, args in jobs]
            results = [f.result() for f in futures]
    else:
        results = [fn(*args) for fn, args in jobs]
    reports = [r for chunk in results for r in chunk]
    return sort_reports(reports)


def sort_reports(reports) -> list:
    return sorted(reports, key=lambda r: (r.check_id, r.fixture, r.sweep_key))


def exit_code(reports, strict: bool = False) -> int:
    if any(r.exact and not r.passed and not r.errored for r in reports):
        return 1
    if strict and any(r.errored for r in reports):
        return 3
    return 0


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------
def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _row(r: CheckReport) -> dict:
    return {"checkId": r.check_id, "fixture": r.fixture, "sweepKey": r.sweep_key, "lhs": fmt(r.lhs),
            "rhs": fmt(r.rhs), "ratio": fmt(r.ratio), "budget": fmt(r.budget),
            "pass": "true" if r.passed else "false", "seed": str(r.seed)}


def to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in sort_reports(reports):
        w.writerow(_row(r))
    return buf.getvalue()


def to_jsonl(reports) -> str:
    lines = []
    for r in sort_reports(reports):
        row = _row(r)
        row.update(exact=r.exact, errored=r.errored, notes=r.notes)
        lines.append(json.dumps(row, sort_keys=False))
    return "\n".join(lines) + ("\n" if lines else "")


def serialise(reports, fmt_name: str) -> str:
    return to_csv(reports) if fmt_name == "csv" else to_jsonl(reports)
