"""Scenario files, check families and the command line runner."""
from .checks import FAMILIES, REQUIRED, FixtureRun, rng_for
from .config import ConfigError, load_config, parse_config
from .runner import execute, exit_code, serialise, to_csv, to_jsonl

__all__ = ["FAMILIES", "REQUIRED", "FixtureRun", "rng_for", "ConfigError", "load_config", "parse_config",
           "execute", "exit_code", "serialise", "to_csv", "to_jsonl"]
