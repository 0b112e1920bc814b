"""Command line front end: scenario execution with reproducible CSV/JSON output.

Exit codes: 0 when every scenario passes, 1 when any condition or scan check
fails, 2 on configuration errors.  Identical config and seed produce
byte-identical outputs; floats are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Iterable, Optional

import numpy as np

from .config import ConfigError, Scenario, load_config, parse_function, parse_grid
from .holmstedt import (
    HolmstedtCase,
    HypothesisError,
    equivalence_scan,
    negative_demo,
    realize_rearrangement,
)
from .norms import SpaceSpec, space_norm
from .profiles import parse_profile, random_rearrangement
from .quadrature import SCAN_GRID
from .reiteration import (
    LKSpec,
    ReiterationSpec,
    lk_identification_check,
    lorentz_karamata_norm,
    reiteration_check,
)
from .profiles import profile_suite
from .weighted_ineq import InequalitySpec, best_constant_probe, compute_constant, hardy_check
from .weights import classify, parse_weight, sv_quasimonotone_constant

__all__ = ["main", "run"]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return "%.17g" % v


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kinterp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scenario runners: each returns (passed, summary dict, csv text or None)
# ---------------------------------------------------------------------------

def _run_sv_check(s: Scenario):
    b = s.params["_weight"]
    q = s.params["_q"]
    rep = classify(b, q)
    consts = {eps: sv_quasimonotone_constant(b, eps) for eps in (1.0, 0.5, 0.1)}
    passed = True
    for key, got in (("expect_sv0q", rep.in_SV0q), ("expect_sv1q", rep.in_SV1q)):
        want = s.params.get(key)
        if want is not None and (want.strip().lower() == "true") != got:
            passed = False
    summary = {"in_SV0q": rep.in_SV0q, "in_SV1q": rep.in_SV1q,
               "tail_value_at_1": rep.tail_value_at_1,
               "head_value_at_1": rep.head_value_at_1,
               "quasi_monotone": {str(eps): c for eps, c in consts.items()}}
    csv = _csv(["eps", "constant"], sorted(consts.items()))
    return passed, summary, csv


def _run_norm(s: Scenario):
    prof = s.params["_profile"]
    space: SpaceSpec = s.params["_space"]
    value = space_norm(prof, space)
    return True, {"norm": value, "space": space.label()}, \
        _csv(["profile", "norm"], [(prof.label, value)])


def _run_holmstedt(s: Scenario):
    case: HolmstedtCase = s.params["_case"]
    prof = s.params["_profile"]
    try:
        rep = equivalence_scan(case, prof, s.grid)
    except HypothesisError as exc:
        return False, {"error": str(exc), "condition": exc.condition}, None
    limit = s.params["_max_variation"]
    passed = rep.variation <= limit and rep.rows != []
    summary = {"case": rep.case, "rows": len(rep.rows), "skipped": rep.skipped,
               "ratio_min": rep.ratio_min, "ratio_max": rep.ratio_max,
               "variation": rep.variation, "notes": rep.notes}
    return passed, summary, _csv(["t", "lhs", "rhs", "ratio"], rep.csv_rows())


def _run_negative_demo(s: Scenario):
    rep = negative_demo(s.params["_theta"], s.params["_q0"], s.params["_q1"],
                        s.params["_b0"], s.params["_b1"], s.grid)
    summary = {"verdict": rep.verdict, "r_exponent": rep.r_exponent,
               "swapped": rep.swapped, "growth_ratio": rep.growth_ratio,
               "monotone_decades": rep.monotone_decades, "note": rep.note}
    return rep.confirmed, summary, \
        _csv(["t", "head_bound", "upper_bound", "M"], rep.csv_rows())


def _run_reiterate(s: Scenario):
    spec: ReiterationSpec = s.params["_spec"]
    profiles = s.params.get("_profiles")
    if profiles is not None:
        suite = [realize_rearrangement(p) for p in profiles]
    else:
        suite = profile_suite()
    try:
        rep = reiteration_check(spec, suite)
    except HypothesisError as exc:
        return False, {"error": str(exc), "condition": exc.condition}, None
    passed = rep.rows != [] and rep.variation <= s.params["_max_variation"]
    summary = {"spec": rep.spec_label, "variation": rep.variation,
               "skipped": rep.skipped, "notes": rep.notes}
    return passed, summary, _csv(["profile", "lhs", "rhs", "ratio"], rep.rows)


def _run_lk_check(s: Scenario):
    q, b = s.params["_q"], s.params["_b"]
    suite = s.params.get("_suite")
    if suite is None:
        rng = np.random.default_rng(s.seed if s.seed is not None else 2718)
        suite = [random_rearrangement(rng) for _ in range(s.params["_count"])]
    rep = lk_identification_check(suite, q, b)
    passed = rep.rows != [] and rep.ratio_min >= 1.0 - 1e-9 \
        and rep.ratio_max <= 1e2
    summary = {"ratio_min": rep.ratio_min, "ratio_max": rep.ratio_max,
               "variation": rep.variation, "skipped": rep.skipped}
    return passed, summary, _csv(["rearrangement", "lk_norm", "interp_norm",
                                  "ratio"], rep.rows)


def _run_hardy_check(s: Scenario):
    rep = hardy_check(s.params["case"], s.params["_alpha"], s.params["_w"],
                      s.params["_phi"], samples=s.params["_samples"],
                      seed=s.seed if s.seed is not None else 13579)
    passed = rep.max_ratio <= s.params["_max_ratio"]
    summary = {"case": rep.case, "alpha": rep.alpha, "max_ratio": rep.max_ratio,
               "samples": rep.samples, "skipped": rep.skipped}
    return passed, summary, _csv(["case", "alpha", "max_ratio"],
                                 [(rep.case, rep.alpha, rep.max_ratio)])


def _run_constants(s: Scenario):
    spec: InequalitySpec = s.params["_spec"]
    which = s.params["which"]
    rep = compute_constant(spec, which)
    passed = math.isfinite(rep.value)
    expect = s.params["_expect"]
    if expect is not None:
        passed = abs(rep.value - expect) <= s.params["_tol"]
    probe = None
    if which in ("A1", "A3"):
        probe = best_constant_probe(spec, which, np.logspace(-6, 6, 193))
        passed = passed and probe <= rep.value * (1.0 + 1e-6)
    summary = {"which": which, "value": rep.value, "argmax": rep.argmax,
               "probe": probe}
    return passed, summary, _csv(["which", "value", "argmax", "probe"],
                                 [(which, rep.value, rep.argmax, probe)])


_RUNNERS = {
    "sv-check": _run_sv_check,
    "norm": _run_norm,
    "holmstedt": _run_holmstedt,
    "negative-demo": _run_negative_demo,
    "reiterate": _run_reiterate,
    "lk-check": _run_lk_check,
    "hardy-check": _run_hardy_check,
    "constants": _run_constants,
}


def run(scenarios: list[Scenario], out_dir: str = ".",
        summary_path: Optional[str] = None, quiet: bool = False) -> int:
    """Execute scenarios in declaration order; returns the exit code."""
    results = []
    exit_code = 0
    for s in scenarios:
        try:
            passed, summary, csv_text = _RUNNERS[s.kind](s)
        except Exception as exc:  # scenario failure must not stop the batch
            passed, summary, csv_text = False, {"error": str(exc)}, None
        if csv_text is not None and s.out:
            _write_atomic(os.path.join(out_dir, s.out), csv_text)
        results.append({"name": s.name, "kind": s.kind,
                        "status": "pass" if passed else "fail",
                        "out": s.out, "summary": summary})
        if not passed:
            exit_code = 1
        if not quiet:
            print(f"[{ 'PASS' if passed else 'FAIL' }] {s.kind} {s.name}")
    payload = json.dumps({"results": results}, sort_keys=True, indent=2,
                         default=_fmt)
    if summary_path:
        _write_atomic(os.path.join(out_dir, summary_path), payload + "\n")
    return exit_code


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--grid", default=None,
                    help="tmin,tmax,points_per_decade")
    sp.add_argument("--out", default=None, help="CSV output path")
    sp.add_argument("--out-dir", default=".", help="directory for outputs")
    sp.add_argument("--seed", type=int, default=None)


def _scenario_from_args(kind: str, args: argparse.Namespace,
                        params: dict) -> Scenario:
    s = Scenario(kind=kind, name=f"cli-{kind}", params=params, line=0,
                 out=args.out,
                 grid=parse_grid(args.grid) if args.grid else SCAN_GRID,
                 seed=args.seed)
    from .config import _validate
    _validate(s)
    return s


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kinterp",
        description="numerical checks for limiting K-interpolation formulas")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run every scenario in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", default=".")
    p_run.add_argument("--summary", default="summary.json")
    p_run.add_argument("--quiet", action="store_true")

    p_h = sub.add_parser("holmstedt", help="equivalence scan for one case")
    p_h.add_argument("--case", required=True)
    p_h.add_argument("--profile", required=True)
    p_h.add_argument("--b0", required=True)
    p_h.add_argument("--q0", required=True)
    p_h.add_argument("--b1", required=True)
    p_h.add_argument("--q1", required=True)
    p_h.add_argument("--theta", default=None)
    p_h.add_argument("--theta0", default=None)
    p_h.add_argument("--theta1", default=None)
    p_h.add_argument("--max-variation", default=None)
    _add_common(p_h)

    p_n = sub.add_parser("negative-demo", help="equal-theta incompatibility table")
    for flag in ("--theta", "--q0", "--q1", "--b0", "--b1"):
        p_n.add_argument(flag, required=True)
    _add_common(p_n)

    p_r = sub.add_parser("reiterate", help="reiteration identity check")
    p_r.add_argument("--side", required=True)
    p_r.add_argument("--theta", required=True)
    p_r.add_argument("--q", required=True)
    p_r.add_argument("--b", required=True)
    p_r.add_argument("--q0", required=True)
    p_r.add_argument("--b0", required=True)
    p_r.add_argument("--q1", required=True)
    p_r.add_argument("--b1", required=True)
    p_r.add_argument("--profiles", default=None,
                     help="file with one profile literal per line")
    _add_common(p_r)

    p_l = sub.add_parser("lk-check", help="limiting Lorentz-Karamata identification")
    p_l.add_argument("--q", required=True)
    p_l.add_argument("--b", required=True)
    p_l.add_argument("--rearrangements", default=None)
    p_l.add_argument("--count", default=None)
    _add_common(p_l)

    p_s = sub.add_parser("sv-check", help="classify a weight expression")
    p_s.add_argument("--weight", required=True)
    p_s.add_argument("--q", required=True)
    _add_common(p_s)

    p_c = sub.add_parser("constants", help="best constants of the base inequality")
    for flag in ("--p", "--q", "--v", "--w", "--which"):
        p_c.add_argument(flag, required=True)
    _add_common(p_c)

    p_hy = sub.add_parser("hardy-check", help="constructed-weight Hardy inequality sampling")
    for flag in ("--case", "--alpha", "--w", "--phi"):
        p_hy.add_argument(flag, required=True)
    p_hy.add_argument("--samples", default=None)
    _add_common(p_hy)

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            scenarios = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        return run(scenarios, out_dir=args.out_dir, summary_path=args.summary,
                   quiet=args.quiet)

    kind = args.command
    params = {}
    mapping = {
        "holmstedt": ("case", "profile", "b0", "q0", "b1", "q1", "theta",
                      "theta0", "theta1", "max_variation"),
        "negative-demo": ("theta", "q0", "q1", "b0", "b1"),
        "reiterate": ("side", "theta", "q", "b", "q0", "b0", "q1", "b1",
                      "profiles"),
        "lk-check": ("q", "b", "rearrangements", "count"),
        "sv-check": ("weight", "q"),
        "constants": ("p", "q", "v", "w", "which"),
        "hardy-check": ("case", "alpha", "w", "phi", "samples"),
    }[kind]
    for key in mapping:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            params[key] = val
    try:
        scenario = _scenario_from_args(kind, args, params)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run([scenario], out_dir=args.out_dir, summary_path=None)


if __name__ == "__main__":
    sys.exit(main())
