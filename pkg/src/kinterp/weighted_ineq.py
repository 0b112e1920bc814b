"""Best constants and condition checks for quasi-concave weighted inequalities,
plus the constructed-weight Hardy inequalities and the monotone-kernel
equivalence check.

The base inequality compares ||h w||_{q, ds/s} with C ||h v||_{p, ds/s} over
all quasi-concave h.  For p <= q the best constant is the supremum A1 of the
plug-in ratio of the extremal family h_x(s) = min(s, x); for slowly varying
weights the head pieces are absorbed and the tail-quotient functional A3 takes
over (its own extremal family is the tail indicators chi_(x,inf), which the A3
probe uses).  A2/A4 are the integral-form constants of the q < p regime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _sci_integrate

from .norms import weighted_knorm
from .profiles import KProfile, K_from_rearrangement, random_rearrangement
from .quadrature import GridSpec, STANDARD_GRID, golden_max
from .weights import (
    WeightExpr,
    classify,
    tail_qnorm,
    weight_kernel_integral,
)

__all__ = [
    "InequalitySpec",
    "ConstantReport",
    "StepFunction",
    "compute_constant",
    "quasiconcave_ratio",
    "best_constant_probe",
    "window_condition",
    "WindowReport",
    "hardy_build_v",
    "hardy_check",
    "HardyReport",
    "hmt_check",
    "HmtReport",
    "random_quasiconcave",
    "PASS_CONSTANT",
]

_INF = math.inf

#: conditions "hold" when the observed constant stays below this threshold.
PASS_CONSTANT = 4.0


@dataclass(frozen=True)
class InequalitySpec:
    p: float
    q: float
    v: WeightExpr
    w: WeightExpr
    window_t: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0.0 < self.p < _INF and 0.0 < self.q < _INF):
            raise ValueError("p and q must be finite and positive")

    def require_sv_classes(self) -> None:
        if not classify(self.v, self.p).in_SV0q:
            raise ValueError("v must lie in the tail class for exponent p")
        if not classify(self.w, self.q).in_SV0q:
            raise ValueError("w must lie in the tail class for exponent q")


@dataclass
class ConstantReport:
    which: str
    value: float
    argmax: Optional[float] = None
    profile: list[tuple[float, float]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# The four constants
# ---------------------------------------------------------------------------

def _bracket(b: WeightExpr, r: float, x: float) -> float:
    """int_0^x s^r b^r ds/s + x^r int_x^inf b^r ds/s (the plug-in identity)."""
    head = weight_kernel_integral(b, r, r, 0.0, x)
    tail = weight_kernel_integral(b, r, 0.0, x, _INF)
    if head == _INF or tail == _INF:
        return _INF
    return head + x ** r * tail


def _sup_on_grid(ratio: Callable[[float], float], grid: GridSpec
                 ) -> tuple[float, float]:
    ts = grid.points()
    vals = np.array([ratio(float(t)) for t in ts])
    i = int(np.argmax(vals))
    best_x, best = float(ts[i]), float(vals[i])
    a = math.log(ts[max(i - 1, 0)])
    b = math.log(ts[min(i + 1, len(ts) - 1)])
    if b > a and math.isfinite(best):
        x, y = golden_max(lambda lx: ratio(math.exp(lx)), a, b)
        if y > best:
            best_x, best = math.exp(x), y
    return best, best_x


def _edge_tail(ls: np.ndarray, xs: np.ndarray, side: str,
               m: float, total: float) -> float:
    """Tail of int exp(ls) dx beyond an open window end, in units of exp(m).

    The integrands of this module decay like powers of L = 1 + |ln t| at the
    window ends (their stretched-exponential or genuine-power parts decay much
    faster and classify trivially): the log-log slope s in L estimated across
    the outer two decades decides convergence (s > 1) and gives the analytic
    remainder f_edge * L_edge / (s - 1).  Returns +inf for a marginal or
    non-decaying tail, 0.0 for a negligible one.
    """
    h = float(xs[1] - xs[0])
    step = max(int(math.log(10.0) / h), 1)
    if 2 * step >= len(xs):
        return 0.0
    if side == "lo":
        i0, i2 = 0, 2 * step
    else:
        i0, i2 = len(xs) - 1, len(xs) - 1 - 2 * step
    f_edge = math.exp(float(ls[i0]) - m)
    if f_edge * step * h <= 1e-12 * max(total, 1e-300):
        return 0.0
    L0 = 1.0 + abs(float(xs[i0]))
    L2 = 1.0 + abs(float(xs[i2]))
    if L0 <= L2:
        return 0.0
    slope = (float(ls[i2]) - float(ls[i0])) / (math.log(L0) - math.log(L2))
    if slope <= 1.02:
        return _INF
    return f_edge * L0 / (slope - 1.0)


def _log_integral(log_f: Callable[[float], float], x_lo: float, x_hi: float,
                  n: int = 2048) -> float:
    """log of int exp(log_f(x)) dx by trapezoid, stable for huge exponents;
    +inf when an open-end tail fails the power-log convergence test, with the
    convergent power-log remainders added analytically."""
    xs = np.linspace(x_lo, x_hi, n)
    ls = np.array([log_f(float(x)) for x in xs])
    m = float(np.max(ls))
    if not math.isfinite(m):
        return _INF if m == _INF else -_INF
    h = float(xs[1] - xs[0])
    contrib = np.exp(ls - m) * h
    total = float(np.sum(contrib)) - 0.5 * float(contrib[0] + contrib[-1])
    for side in ("lo", "hi"):
        tail = _edge_tail(ls, xs, side, m, total)
        if tail == _INF:
            return _INF
        total += tail
    return m + math.log(total)


def compute_constant(spec: InequalitySpec, which: str,
                     grid: GridSpec = STANDARD_GRID) -> ConstantReport:
    """A1/A2 for general positive weights, A3/A4 for slowly varying ones."""
    p, q, v, w = spec.p, spec.q, spec.v, spec.w
    if which in ("A1", "A3") and not p <= q:
        raise ValueError(f"{which} requires p <= q")
    if which in ("A2", "A4") and not q < p:
        raise ValueError(f"{which} requires q < p")
    if which in ("A3", "A4"):
        spec.require_sv_classes()

    if which == "A1":
        def ratio(x: float) -> float:
            num = _bracket(w, q, x)
            den = _bracket(v, p, x)
            if num == _INF or den == _INF or den == 0.0:
                return 0.0
            return num ** (1.0 / q) / den ** (1.0 / p)
        value, argmax = _sup_on_grid(ratio, grid)
        return ConstantReport("A1", value, argmax)

    if which == "A3":
        def ratio(x: float) -> float:
            num = tail_qnorm(w, q, x)
            den = tail_qnorm(v, p, x)
            if num == _INF or den == 0.0 or den == _INF:
                return 0.0
            return num / den
        value, argmax = _sup_on_grid(ratio, grid)
        return ConstantReport("A3", value, argmax)

    expo = q / (p - q)

    if which == "A2":
        def log_f(x: float) -> float:
            ux = math.exp(x)
            num = _bracket(w, q, ux)
            den = _bracket(v, p, ux)
            if num == _INF:
                return _INF
            if num == 0.0 or den == 0.0 or den == _INF:
                return -_INF
            return expo * (math.log(num) - math.log(den)) \
                + q * x + q * math.log(w(ux))
    else:  # A4
        def log_f(x: float) -> float:
            ux = math.exp(x)
            num = weight_kernel_integral(w, q, 0.0, ux, _INF)
            den = weight_kernel_integral(v, p, 0.0, ux, _INF)
            if num == _INF:
                return _INF
            if num == 0.0 or den == 0.0 or den == _INF:
                return -_INF
            return expo * (math.log(num) - math.log(den)) + q * math.log(w(ux))

    log_val = _log_integral(log_f, math.log(grid.t_min), math.log(grid.t_max))
    if log_val == _INF:
        return ConstantReport(which, _INF)
    value = math.exp(log_val * (1.0 / q - 1.0 / p))
    return ConstantReport(which, value)


def _min_profile(x: float) -> KProfile:
    """The extremal quasi-concave h_x(s) = min(s, x)."""
    return KProfile.from_nodes([(x, x)])


def quasiconcave_ratio(spec: InequalitySpec, h: KProfile) -> float:
    """||h w||_{q,ds/s} / ||h v||_{p,ds/s} for one quasi-concave h."""
    num = weighted_knorm(h.curve, 0.0, spec.q, spec.w)
    den = weighted_knorm(h.curve, 0.0, spec.p, spec.v)
    if num.divergent or den.divergent or den.value == 0.0:
        return 0.0
    return num.value ** (1.0 / spec.q) / den.value ** (1.0 / spec.p)


def best_constant_probe(spec: InequalitySpec, which: str,
                        x_grid: Sequence[float]) -> float:
    """Empirical supremum of the plug-in ratio over the constant's extremal
    family: min(s, x) for A1, the tail indicators for A3."""
    if which == "A1":
        return max(quasiconcave_ratio(spec, _min_profile(float(x)))
                   for x in x_grid)
    if which == "A3":
        best = 0.0
        for x in x_grid:
            num = tail_qnorm(spec.w, spec.q, float(x))
            den = tail_qnorm(spec.v, spec.p, float(x))
            if num != _INF and den not in (0.0, _INF):
                best = max(best, num / den)
        return best
    raise ValueError("probe supports A1 and A3")


def random_quasiconcave(rng: np.random.Generator) -> KProfile:
    """Random quasi-concave function built as a K-profile of a random
    piecewise-constant rearrangement (quasi-concave by construction)."""
    return K_from_rearrangement(random_rearrangement(rng))


# ---------------------------------------------------------------------------
# Window conditions
# ---------------------------------------------------------------------------

@dataclass
class WindowReport:
    side: str
    passed: bool
    worst_t: Optional[float]
    worst_ratio: float
    rows: list[tuple[float, float, float]] = field(default_factory=list)


def window_condition(spec: InequalitySpec, side: str,
                     bound: Callable[[float], float],
                     grid: GridSpec = GridSpec(1e-8, 1e8, 8),
                     threshold: float = PASS_CONSTANT) -> WindowReport:
    """Check the windowed tail-quotient condition against a candidate bound.

    ``side='head'`` masks the left factor to (0, t) and compares
    sup_{x<t} (resp. the q<p integral form) with bound(t); ``side='tail'``
    masks to (t, inf) and uses sup_{x>t} (resp. the tail integral form).
    A ``window_t`` on the spec restricts the verdict to that single window.
    """
    if side not in ("head", "tail"):
        raise ValueError("side must be 'head' or 'tail'")
    spec.require_sv_classes()
    p, q, v, w = spec.p, spec.q, spec.v, spec.w
    ts = grid.points()
    if spec.window_t is not None and not (grid.t_min <= spec.window_t
                                          <= grid.t_max):
        raise ValueError("window_t must lie inside the evaluation grid")

    def a3_ratio(x: float) -> float:
        num = tail_qnorm(w, q, x)
        den = tail_qnorm(v, p, x)
        if num == _INF:
            return _INF
        if den in (0.0, _INF):
            return 0.0
        return num / den

    rows: list[tuple[float, float, float]] = []
    if p <= q:
        vals = [a3_ratio(float(t)) for t in ts]
        if side == "head":
            run: list[float] = []
            acc = 0.0
            for x in vals:
                acc = max(acc, x)
                run.append(acc)
        else:
            run = list(np.maximum.accumulate(vals[::-1])[::-1])
        for t, c in zip(ts, run):
            rows.append((float(t), c, bound(float(t))))
    else:
        expo = q / (p - q)

        def integrand(x: float) -> float:
            ux = math.exp(x)
            num = weight_kernel_integral(w, q, 0.0, ux, _INF)
            den = weight_kernel_integral(v, p, 0.0, ux, _INF)
            if num in (0.0, _INF) or den in (0.0, _INF):
                return 0.0
            return (num / den) ** expo * w(ux) ** q

        xs = np.log(ts)
        fs = np.array([integrand(float(x)) for x in xs])
        h = xs[1] - xs[0]
        cum = np.concatenate([[0.0], np.cumsum((fs[1:] + fs[:-1]) * h / 2.0)])
        total = float(cum[-1])
        with np.errstate(divide="ignore"):
            ls = np.log(np.maximum(fs, 1e-300))
        if side == "head":
            # a divergent left tail makes every cumulative value infinite
            bad = _edge_tail(ls, xs, "lo", float(np.max(ls)), total) == _INF
            vals = [_INF if bad else float(c) for c in cum]
        else:
            bad = _edge_tail(ls, xs, "hi", float(np.max(ls)), total) == _INF
            vals = [_INF if bad else float(c) for c in total - cum]
        for t, c in zip(ts, vals):
            rows.append((float(t), c ** (1.0 / q - 1.0 / p)
                         if c != _INF else _INF, bound(float(t))))

    if spec.window_t is not None:
        i = int(np.argmin(np.abs(np.log(ts) - math.log(spec.window_t))))
        rows = [rows[i]]
    worst_t, worst = None, 0.0
    for t, c, bd in rows:
        if bd == _INF:
            ratio = 0.0  # an infinite bound is always met
        elif bd > 0.0:
            ratio = c / bd
        else:
            ratio = _INF if c > 0.0 else 0.0
        if ratio > worst:
            worst_t, worst = t, ratio
    return WindowReport(side=side, passed=worst <= threshold,
                        worst_t=worst_t, worst_ratio=worst, rows=rows)


# ---------------------------------------------------------------------------
# Constructed-weight Hardy inequalities
# ---------------------------------------------------------------------------

HARDY_CASES = ("HET1", "HET2", "HET3plus", "HET3")


def _plain_quad(f: Callable[[float], float], lo: float, hi: float) -> float:
    if lo >= hi:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sci_integrate.IntegrationWarning)
        val, _ = _sci_integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-10,
                                     limit=200)
    return val


def hardy_build_v(case: str, alpha: float, w: Callable[[float], float],
                  phi: Callable[[float], float]) -> Callable[[float], float]:
    """The constructed right-hand weight v of the four Hardy-type estimates."""
    if case not in HARDY_CASES:
        raise ValueError(f"unknown hardy case {case!r}")
    if case in ("HET1", "HET2") and not alpha > 1.0:
        raise ValueError(f"{case} requires alpha > 1")
    if case in ("HET3plus", "HET3") and not 0.0 < alpha < 1.0:
        raise ValueError(f"{case} requires 0 < alpha < 1")

    zero_w = w(0.5) == 0.0 and w(2.0) == 0.0 and w(17.0) == 0.0
    if not zero_w:
        probe = {"HET1": _plain_quad(w, 1.0, _INF),
                 "HET2": _plain_quad(w, 0.0, 1.0),
                 "HET3plus": _plain_quad(w, 1.0, _INF),
                 "HET3": _plain_quad(phi, 1.0, _INF)}[case]
        if not math.isfinite(probe):
            raise ValueError(f"{case} needs a convergent defining integral")

    if case == "HET1":
        def v(t: float) -> float:
            wt = w(t)
            if wt == 0.0:
                return 0.0
            return wt ** (1.0 - alpha) * (phi(t) * _plain_quad(w, t, _INF)) ** alpha
    elif case == "HET2":
        def v(t: float) -> float:
            wt = w(t)
            if wt == 0.0:
                return 0.0
            return wt ** (1.0 - alpha) * (phi(t) * _plain_quad(w, 0.0, t)) ** alpha
    elif case == "HET3plus":
        def v(t: float) -> float:
            head = _plain_quad(phi, 0.0, t)
            if head <= 0.0:
                return 0.0
            return phi(t) * head ** (alpha - 1.0) * _plain_quad(w, t, _INF)
    else:  # HET3
        def v(t: float) -> float:
            tail = _plain_quad(phi, t, _INF)
            if tail <= 0.0:
                return 0.0
            return phi(t) * tail ** (alpha - 1.0) * _plain_quad(w, 0.0, t)
    return v


class StepFunction:
    """Positive step function: values[i] on (edge[i-1], edge[i]], ``tail``
    beyond the last edge (the support may be unbounded)."""

    def __init__(self, edges: Sequence[float], values: Sequence[float],
                 tail: float = 0.0):
        if len(edges) != len(values):
            raise ValueError("need one value per edge")
        if list(edges) != sorted(edges) or (edges and edges[0] <= 0.0):
            raise ValueError("edges must be positive ascending")
        self.edges = [float(e) for e in edges]
        self.values = [float(v) for v in values]
        self.tail = float(tail)

    def __call__(self, u: float) -> float:
        for e, v in zip(self.edges, self.values):
            if u <= e:
                return v
        return self.tail

    def pieces(self) -> list[tuple[float, float, float]]:
        out = []
        prev = 0.0
        for e, v in zip(self.edges, self.values):
            out.append((prev, e, v))
            prev = e
        out.append((prev, _INF, self.tail))
        return out

    def weighted_integral(self, g: Callable[[float], float],
                          lo: float, hi: float, power: float = 1.0) -> float:
        """int_lo^hi h(u)^power g(u) du for this step function h."""
        total = 0.0
        for a, b, v in self.pieces():
            a2, b2 = max(a, lo), min(b, hi)
            if v == 0.0 or a2 >= b2:
                continue
            total += v ** power * _plain_quad(g, a2, b2)
        return total


def _random_steps(rng: np.random.Generator, monotonicity: str) -> StepFunction:
    n = int(rng.integers(1, 6))
    edges = sorted(float(x) for x in np.exp(rng.uniform(math.log(1e-2),
                                                        math.log(30.0), n)))
    vals = [float(x) for x in np.exp(rng.uniform(math.log(1e-2),
                                                 math.log(10.0), n))]
    if monotonicity == "nonincreasing":
        vals = sorted(vals, reverse=True)
        return StepFunction(edges, vals, 0.0)
    if monotonicity == "nondecreasing":
        vals = sorted(vals)
        return StepFunction(edges, vals, tail=vals[-1])
    return StepFunction(edges, vals, 0.0)


@dataclass
class HardyReport:
    case: str
    alpha: float
    max_ratio: float
    samples: int
    skipped: int = 0


def hardy_check(case: str, alpha: float, w: Callable[[float], float],
                phi: Callable[[float], float],
                h_family: Optional[Sequence[StepFunction]] = None,
                samples: int = 50, seed: int = 13579) -> HardyReport:
    """Max observed ratio LHS/RHS of the case's inequality over sampled h."""
    v = hardy_build_v(case, alpha, w, phi)
    monot = {"HET1": "any", "HET2": "any",
             "HET3plus": "nonincreasing", "HET3": "nondecreasing"}[case]
    if h_family is None:
        rng = np.random.default_rng(seed)
        h_family = [_random_steps(rng, monot) for _ in range(samples)]
    worst = 0.0
    skipped = 0
    for h in h_family:
        lhs = _hardy_lhs(case, alpha, w, phi, h)
        rhs = h.weighted_integral(v, 0.0, _INF, power=alpha)
        if rhs == 0.0:
            if lhs == 0.0:
                skipped += 1
                continue
            return HardyReport(case, alpha, _INF, len(h_family), skipped)
        worst = max(worst, lhs / rhs)
    return HardyReport(case, alpha, worst, len(h_family), skipped)


def _hardy_lhs(case: str, alpha: float, w, phi, h: StepFunction) -> float:
    inner_head = case == "HET1"

    edges = [e for e in h.edges]
    last = edges[-1] if edges else 1.0

    def inner(t: float) -> float:
        if inner_head:
            return h.weighted_integral(phi, 0.0, t)
        return h.weighted_integral(phi, t, _INF)

    def outer_integrand(t: float) -> float:
        iv = inner(t)
        return iv ** alpha * w(t) if iv > 0.0 else 0.0

    total = 0.0
    prev = 0.0
    for e in edges + [last * 4.0]:
        total += _plain_quad(outer_integrand, prev, e)
        prev = e
    if inner_head and h.tail == 0.0:
        const = inner(prev)  # h vanishes beyond its support: inner is flat
        if const > 0.0:
            total += const ** alpha * _plain_quad(w, prev, _INF)
    else:
        total += _plain_quad(outer_integrand, prev, _INF)
    return total


# ---------------------------------------------------------------------------
# Monotone-kernel equivalence (integral kernel, nondecreasing h)
# ---------------------------------------------------------------------------

@dataclass
class HmtReport:
    condition_holds: bool
    inequality_holds: bool
    condition_ratio: float
    inequality_ratio: float
    reduction_discrepancy: float


def hmt_check(alpha: float, psi: Callable[[float, float], float],
              w: Callable[[float], float], v: Callable[[float], float],
              x_grid: Sequence[float],
              h_samples: Optional[Sequence[StepFunction]] = None,
              samples: int = 12, seed: int = 97531,
              threshold: float = PASS_CONSTANT) -> HmtReport:
    """Check the kernel condition and the sampled inequality, 0 < alpha <= 1.

    The condition integrates the kernel tail int_x^inf psi(t, u) du against w
    and compares with int_x^inf v; plugging the step h = chi_(x,inf) into the
    inequality reproduces the condition exactly, which is what the reported
    reduction discrepancy measures.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")

    def lhs_condition(x: float) -> float:
        def outer(t: float) -> float:
            iv = _plain_quad(lambda u: psi(t, u), x, _INF)
            return iv ** alpha * w(t)
        return _plain_quad(outer, 0.0, _INF)

    def rhs_condition(x: float) -> float:
        return _plain_quad(v, x, _INF)

    def lhs_inequality(h: StepFunction) -> float:
        def outer(t: float) -> float:
            iv = h.weighted_integral(lambda u: psi(t, u), 0.0, _INF)
            return iv ** alpha * w(t)
        return _plain_quad(outer, 0.0, _INF)

    cond_ratio = 0.0
    cond_ok = True
    reduction = 0.0
    for x in x_grid:
        lc, rc = lhs_condition(float(x)), rhs_condition(float(x))
        if rc == 0.0:
            if lc > 0.0:
                cond_ok = False
                cond_ratio = _INF
            continue
        cond_ratio = max(cond_ratio, lc / rc)
        indicator = StepFunction([float(x)], [0.0], tail=1.0)
        li = lhs_inequality(indicator)
        ri = indicator.weighted_integral(v, 0.0, _INF, power=alpha)
        scale = max(abs(lc), abs(rc), 1e-300)
        reduction = max(reduction, abs(li - lc) / scale, abs(ri - rc) / scale)
    cond_ok = cond_ok and cond_ratio <= threshold

    if h_samples is None:
        rng = np.random.default_rng(seed)
        h_samples = [_random_steps(rng, "nondecreasing") for _ in range(samples)]
    ineq_ratio = 0.0
    ineq_ok = True
    for h in h_samples:
        lhs = lhs_inequality(h)
        rhs = h.weighted_integral(v, 0.0, _INF, power=alpha)
        if rhs == 0.0:
            if lhs > 0.0:
                ineq_ok = False
                ineq_ratio = _INF
            continue
        ineq_ratio = max(ineq_ratio, lhs / rhs)
    ineq_ok = ineq_ok and ineq_ratio <= threshold
    return HmtReport(condition_holds=cond_ok, inequality_holds=ineq_ok,
                     condition_ratio=cond_ratio, inequality_ratio=ineq_ratio,
                     reduction_discrepancy=reduction)
