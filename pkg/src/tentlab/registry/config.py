"""Scenario files.

A scenario is an INI file read with configparser:

    [scenario]
    seed = 20240611
    output = results          ; directory for report files
    format = csv              ; csv or jsonl

    [fixture]
    names = TP, CYC_8, TORUS_16, SM_2

    [grid]
    lo = 1e-3
    hi = 1e3
    nodes = 96

    [check]
    ids = semigroup-axioms, lemma-3.2, TP-thm-2.1-bound
    ; or: ids = all

    [check:thm-3.5-duality]
    budget = 32
    n_pairs = 200

An entry in ``ids`` may carry a fixture prefix (``TP-semigroup-axioms``) to
restrict it to that fixture. Family names are matched after dropping '-' and
'.', so ``thm21-bound`` and ``thm-2.1-bound`` are the same check. Per-check
sections override keyword arguments of that check.
"""
from __future__ import annotations

import configparser
import inspect
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..semigroup import fixture as make_fixture
from ..tent import TimeGrid


class ConfigError(ValueError):
    pass


def normalize(name: str) -> str:
    return re.sub(r"[-.\s]", "", name.strip().lower())


@dataclass
class CheckRequest:
    family: str
    fixtures: list | None = None  # None means every configured fixture


@dataclass
class ScenarioConfig:
    seed: int = 0
    fixtures: list = field(default_factory=list)
    grid: dict = field(default_factory=lambda: {"lo": 1e-3, "hi": 1e3, "nodes": 96})
    checks: list = field(default_factory=list)
    overrides: dict = field(default_factory=dict)
    output: str = "results"
    format: str = "csv"
    source: str = ""

    def time_grid(self) -> TimeGrid:
        g = self.grid
        return TimeGrid.geometric(float(g["lo"]), float(g["hi"]), int(g["nodes"]))


def _split(value: str) -> list:
    return [v.strip() for v in re.split(r"[,\n]", value) if v.strip()]


def _parse_value(v: str):
    v = v.strip()
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v.lower() in ("true", "yes", "on"):
        return True
    if v.lower() in ("false", "no", "off"):
        return False
    if "," in v:
        return [_parse_value(x) for x in _split(v)]
    return v


def _resolve_family(name: str, families: dict) -> str:
    key = normalize(name)
    for fam in families:
        if normalize(fam) == key:
            return fam
    raise ConfigError(f"unknown check {name!r}")


def _split_prefixed(entry: str, families: dict):
    """'TP-semigroup-axioms' -> ('TP', 'semigroup-axioms'); plain names -> (None, name)."""
    m = re.match(r"^([A-Za-z]+(?:_\d+)?)-(.+)$", entry.strip())
    if m:
        try:
            make_fixture(m.group(1))
        except KeyError:
            pass
        else:
            try:
                return m.group(1).upper(), _resolve_family(m.group(2), families)
            except ConfigError:
                pass
    return None, _resolve_family(entry, families)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    from .checks import FAMILIES

    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    cfg = ScenarioConfig(source=source)
    known = {"scenario", "fixture", "grid", "check"}
    for sec in cp.sections():
        if sec not in known and not sec.startswith("check:"):
            raise ConfigError(f"unknown section [{sec}]")
    if cp.has_section("scenario"):
        s = cp["scenario"]
        try:
            cfg.seed = int(s.get("seed", "0"))
        except ValueError as exc:
            raise ConfigError("seed must be an integer") from exc
        cfg.output = s.get("output", cfg.output)
        cfg.format = s.get("format", cfg.format).lower()
    if cfg.format not in ("csv", "jsonl"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    if cp.has_section("fixture"):
        cfg.fixtures = [n.upper() for n in _split(cp["fixture"].get("names", ""))]
    for name in cfg.fixtures:
        try:
            make_fixture(name)
        except KeyError as exc:
            raise ConfigError(f"unknown fixture {name!r}") from exc
    if cp.has_section("grid"):
        g = cp["grid"]
        try:
            cfg.grid = {"lo": float(g.get("lo", "1e-3")), "hi": float(g.get("hi", "1e3")),
                        "nodes": int(g.get("nodes", "96"))}
            cfg.time_grid()
        except ValueError as exc:
            raise ConfigError(f"bad grid: {exc}") from exc
    if cp.has_section("check"):
        ids = _split(cp["check"].get("ids", ""))
        if len(ids) == 1 and ids[0].lower() == "all":
            cfg.checks = [CheckRequest(f) for f in FAMILIES]
        else:
            merged: dict = {}
            for entry in ids:
                fx, fam = _split_prefixed(entry, FAMILIES)
                req = merged.setdefault(fam, CheckRequest(fam, []))
                if fx is None:
                    req.fixtures = None
                elif req.fixtures is not None:
                    if fx not in req.fixtures:
                        req.fixtures.append(fx)
                    if fx not in cfg.fixtures:
                        cfg.fixtures.append(fx)
            cfg.checks = list(merged.values())
    for sec in cp.sections():
        if sec.startswith("check:"):
            fam = _resolve_family(sec.split(":", 1)[1], FAMILIES)
            params = inspect.signature(FAMILIES[fam].runner).parameters
            unknown = [k for k in cp[sec] if k not in params or k == "run"]
            if unknown:
                raise ConfigError(f"[{sec}]: unknown option(s) {', '.join(unknown)}")
            cfg.overrides[fam] = {k: _parse_value(v) for k, v in cp[sec].items()}
    return cfg


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    return parse_config(text, str(p))
