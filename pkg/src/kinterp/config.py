"""Flat, line-oriented scenario configs.

A config is a sequence of blocks; each block starts with ``[<kind> <name>]``
and holds ``key = value`` lines.  ``#`` starts a comment.  Example::

    [holmstedt tail-pair]
    case = limiting00
    q0 = 1
    b0 = log(0,-2)
    q1 = 2
    b1 = log(0,-2)
    profile = min1
    grid = 1e-6,1e6,13
    out = tail-pair.csv

Scenario kinds: sv-check, norm, holmstedt, negative-demo, reiterate,
lk-check, hardy-check, constants.  All parameters are validated while
loading, before any computation starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .holmstedt import CASE_KINDS, HolmstedtCase
from .profiles import KProfile, parse_profile, realize_rearrangement
from .quadrature import GridSpec, SCAN_GRID
from .reiteration import LKSpec, ReiterationSpec
from .weighted_ineq import HARDY_CASES, InequalitySpec
from .weights import WeightExpr, WeightSyntaxError, parse_weight

__all__ = ["Scenario", "ConfigError", "load_config", "parse_grid",
           "parse_function"]

SCENARIO_KINDS = ("sv-check", "norm", "holmstedt", "negative-demo",
                  "reiterate", "lk-check", "hardy-check", "constants")


class ConfigError(ValueError):
    """Config parse/validation error with a line anchor."""

    def __init__(self, message: str, line: int, column: Optional[int] = None):
        at = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message} ({at})")
        self.line = line
        self.column = column


@dataclass
class Scenario:
    kind: str
    name: str
    params: dict
    line: int
    out: Optional[str] = None
    grid: GridSpec = SCAN_GRID
    seed: Optional[int] = None
    key_lines: dict = field(default_factory=dict)


def parse_grid(text: str) -> GridSpec:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("grid must be tmin,tmax,points_per_decade")
    return GridSpec(float(parts[0]), float(parts[1]), int(parts[2]))


def parse_function(text: str) -> Callable[[float], float]:
    """Positive functions for the Hardy checks: ``const(c)``,
    ``expdecay(rate)`` for exp(-rate*t), or any weight expression."""
    s = text.strip()
    if s.startswith("const(") and s.endswith(")"):
        c = float(s[6:-1])
        return lambda t: c
    if s.startswith("expdecay(") and s.endswith(")"):
        rate = float(s[9:-1])
        return lambda t: math.exp(-rate * t)
    return parse_weight(s)


def _parse_scalar(value: str, line: int, key: str) -> float:
    v = value.strip().lower()
    if v in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number", line) from None


_REQUIRED = {
    "sv-check": ("weight", "q"),
    "norm": ("profile", "theta", "q", "b"),
    "holmstedt": ("case", "q0", "b0", "q1", "b1", "profile"),
    "negative-demo": ("theta", "q0", "q1", "b0", "b1"),
    "reiterate": ("side", "theta", "q", "b", "q0", "b0", "q1", "b1"),
    "lk-check": ("q", "b"),
    "hardy-check": ("case", "alpha", "w", "phi"),
    "constants": ("p", "q", "v", "w", "which"),
}


def _validate(s: Scenario) -> None:
    """Type-check and pre-build every parameter the runner will need."""
    line = s.line
    p = s.params

    def anchor(key: str) -> int:
        return s.key_lines.get(key, line)

    for key in _REQUIRED[s.kind]:
        if key not in p:
            raise ConfigError(f"{s.kind} scenario needs key {key!r}", line)

    def weight(key: str) -> WeightExpr:
        try:
            return parse_weight(p[key])
        except WeightSyntaxError as exc:
            raise ConfigError(f"bad weight in {key!r}: {exc}", anchor(key),
                              getattr(exc, "pos", None)) from None

    def scalar(key: str, default: Optional[float] = None) -> Optional[float]:
        if key not in p:
            return default
        return _parse_scalar(p[key], anchor(key), key)

    try:
        if s.kind == "sv-check":
            p["_weight"] = weight("weight")
            p["_q"] = scalar("q")
        elif s.kind == "norm":
            p["_profile"] = parse_profile(p["profile"])
            from .norms import SpaceSpec
            p["_space"] = SpaceSpec(scalar("theta"), scalar("q"), weight("b"))
        elif s.kind == "holmstedt":
            if p["case"] not in CASE_KINDS:
                raise ValueError(f"unknown case {p['case']!r}")
            p["_case"] = HolmstedtCase(
                p["case"], scalar("q0"), scalar("q1"), weight("b0"),
                weight("b1"), theta=scalar("theta"),
                theta0=scalar("theta0"), theta1=scalar("theta1"))
            p["_profile"] = parse_profile(p["profile"])
            p["_max_variation"] = scalar("max_variation", 1e3)
        elif s.kind == "negative-demo":
            p["_theta"] = scalar("theta")
            p["_q0"], p["_q1"] = scalar("q0"), scalar("q1")
            if p["_q0"] == p["_q1"]:
                raise ValueError("negative-demo needs q0 != q1")
            p["_b0"], p["_b1"] = weight("b0"), weight("b1")
        elif s.kind == "reiterate":
            side = int(scalar("side"))
            p["_spec"] = ReiterationSpec(
                side=side, theta=scalar("theta"), q=scalar("q"),
                b=weight("b"), q0=scalar("q0"), b0=weight("b0"),
                q1=scalar("q1"), b1=weight("b1"))
            p["_max_variation"] = scalar("max_variation", 1e3)
            if "profiles" in p:
                p["_profiles"] = _load_profiles(p["profiles"], line)
        elif s.kind == "lk-check":
            p["_q"] = scalar("q")
            p["_b"] = weight("b")
            p["_lk"] = LKSpec(math.inf, p["_q"], p["_b"])
            if "rearrangements" in p:
                p["_suite"] = [realize_rearrangement(prof)
                               for prof in _load_profiles(p["rearrangements"], line)]
            p["_count"] = int(scalar("count", 10))
        elif s.kind == "hardy-check":
            if p["case"] not in HARDY_CASES:
                raise ValueError(f"unknown hardy case {p['case']!r}")
            p["_alpha"] = scalar("alpha")
            p["_w"] = parse_function(p["w"])
            p["_phi"] = parse_function(p["phi"])
            p["_samples"] = int(scalar("samples", 50))
            p["_max_ratio"] = scalar("max_ratio", 10.0)
        elif s.kind == "constants":
            p["_spec"] = InequalitySpec(p=scalar("p"), q=scalar("q"),
                                        v=weight("v"), w=weight("w"))
            if p["which"] not in ("A1", "A2", "A3", "A4"):
                raise ValueError("which must be one of A1..A4")
            p["_expect"] = scalar("expect")
            p["_tol"] = scalar("tol", 1e-3)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), line) from None


def _load_profiles(path: str, line: int) -> list[KProfile]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ConfigError(f"cannot read profiles file: {exc}", line) from None
    profiles = []
    for i, ln in enumerate(lines, 1):
        if not ln or ln.startswith("#"):
            continue
        try:
            profiles.append(parse_profile(ln))
        except ValueError as exc:
            raise ConfigError(f"{path}:{i}: {exc}", line) from None
    if not profiles:
        raise ConfigError(f"profiles file {path} is empty", line)
    return profiles


def load_config(path: str) -> list[Scenario]:
    """Parse and validate a scenario config; raises ConfigError."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()
    scenarios: list[Scenario] = []
    current: Optional[Scenario] = None
    seen: set[str] = set()
    for lineno, rawline in enumerate(raw, 1):
        text = rawline.split("#", 1)[0].rstrip("\n").strip()
        if not text:
            continue
        if text.startswith("["):
            if not text.endswith("]"):
                raise ConfigError("unterminated block header", lineno)
            header = text[1:-1].split()
            if len(header) != 2:
                raise ConfigError("block header must be [<kind> <name>]", lineno)
            kind, name = header
            if kind not in SCENARIO_KINDS:
                raise ConfigError(f"unknown scenario kind {kind!r}", lineno)
            if name in seen:
                raise ConfigError(f"duplicate scenario name {name!r}", lineno)
            seen.add(name)
            current = Scenario(kind=kind, name=name, params={}, line=lineno)
            scenarios.append(current)
            continue
        if current is None:
            raise ConfigError("key outside of a scenario block", lineno)
        if "=" not in text:
            raise ConfigError("expected key = value",
                              lineno, len(rawline) - len(rawline.lstrip()) + 1)
        key, value = (part.strip() for part in text.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key == "out":
            current.out = value
        elif key == "grid":
            try:
                current.grid = parse_grid(value)
            except ValueError as exc:
                raise ConfigError(str(exc), lineno) from None
        elif key == "seed":
            current.seed = int(_parse_scalar(value, lineno, "seed"))
        else:
            current.params[key] = value
            current.key_lines[key] = lineno
    for s in scenarios:
        _validate(s)
    return scenarios
