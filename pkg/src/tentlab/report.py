"""Check reports shared by every module."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    fixture: str = ""
    sweep_key: str = ""
    lhs: float = float("nan")
    rhs: float = float("nan")
    ratio: float = float("nan")
    budget: float = float("nan")
    passed: bool = False
    seed: int = 0
    notes: str = ""
    errored: bool = False
    exact: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def with_(self, **kw) -> "CheckReport":
        return replace(self, **kw)


def _f(x) -> float:
    x = complex(x) if np.iscomplexobj(x) else x
    if isinstance(x, complex):
        x = abs(x) if abs(x.imag) > 1e-12 * max(1.0, abs(x.real)) else x.real
    return float(x)


def safe_ratio(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


def bound_report(check_id, lhs, rhs, budget, *, rtol=1e-9, atol=1e-14, **kw) -> CheckReport:
    """Pass iff lhs <= budget * rhs (up to a relative slack)."""
    lhs, rhs = _f(lhs), _f(rhs)
    ratio = safe_ratio(lhs, rhs)
    ok = lhs <= budget * rhs * (1 + rtol) + atol
    return CheckReport(check_id, lhs=lhs, rhs=rhs, ratio=ratio, budget=float(budget), passed=bool(ok), **kw)


def order_report(check_id, witness, tol, *, ratio=float("nan"), budget=float("nan"), **kw) -> CheckReport:
    """Positivity witness of ``budget * Y - X``; lhs is the witness, rhs the tolerance."""
    w = _f(witness)
    return CheckReport(check_id, lhs=w, rhs=-float(tol), ratio=_f(ratio), budget=float(budget),
                       passed=bool(w >= -tol), **kw)


def residual_report(check_id, residual, tol, *, scale=1.0, **kw) -> CheckReport:
    r = _f(residual)
    return CheckReport(check_id, lhs=r, rhs=float(tol) * scale, ratio=safe_ratio(r, scale),
                       budget=float(tol), passed=bool(r <= tol * scale), **kw)


def value_report(check_id, value, target, tol, **kw) -> CheckReport:
    v = _f(value)
    return CheckReport(check_id, lhs=v, rhs=float(target), ratio=safe_ratio(v, target),
                       budget=float(tol), passed=bool(abs(v - target) <= tol), **kw)


def errored_report(check_id, message, **kw) -> CheckReport:
    return CheckReport(check_id, passed=False, errored=True, notes=message, **kw)


def worst(reports, check_id=None, **kw) -> CheckReport:
    """Collapse a list of reports into the one with the largest ratio, failing if any fails."""
    reports = list(reports)
    if not reports:
        return errored_report(check_id or "?", "no samples", **kw)
    failing = [r for r in reports if not r.passed]
    pool = failing or reports
    if all(math.isnan(r.ratio) for r in pool):
        # order witnesses: the smallest witness is the worst
        pick = pool[int(np.argmin([r.lhs if not math.isnan(r.lhs) else -math.inf for r in pool]))]
    else:
        key = [-math.inf if math.isnan(r.ratio) else r.ratio for r in pool]
        pick = pool[int(np.argmax(key))]
    n_fail = len(failing)
    note = f"{len(reports)} samples, {n_fail} violations"
    if pick.notes:
        note = f"{note}; {pick.notes}"
    out = pick.with_(notes=note, passed=n_fail == 0)
    if check_id is not None:
        out = out.with_(check_id=check_id)
    return out.with_(**kw) if kw else out
