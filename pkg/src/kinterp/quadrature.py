"""Deterministic integration and supremum evaluation on (0, inf) in log coordinates.

Every quasi-norm in this package is of the form ``||g||_{q,(a,b)}`` with the
measure du/u.  Substituting x = ln u (or x = ln(1/u) on the lower side) turns
each integrand produced by the weight algebra and the profile machinery into a
finite sum of canonical terms

    coef * exp(a*x) * (1+x)**beta * exp(sum_i gamma_i * x**alpha_i),

integrated over [x1, x2] inside [0, inf].  Terms without the stretched
exponential factor integrate in closed form when a == 0 or beta == 0, through
the upper incomplete gamma function when a < 0 and beta > -1, and by adaptive
quadrature otherwise.  Plain callables fall back to adaptive quadrature with a
hard cutoff at the grid bounds and a reported error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import special as _sci_special

__all__ = [
    "AT_ZERO",
    "AT_INFINITY",
    "GridSpec",
    "IntegralResult",
    "LogTerm",
    "term_diverges_at_inf",
    "exp_pow_integral",
    "term_value",
    "integrate_terms",
    "integrate_log",
    "sup_log",
    "golden_min",
    "golden_max",
]

AT_ZERO = "at_zero"
AT_INFINITY = "at_infinity"

_INF = math.inf

# Closed-form segment results carry ~1 ulp noise per operation; adaptive paths
# are requested at this relative tolerance.
CLOSED_FORM_RTOL = 1e-9
ADAPTIVE_RTOL = 1e-7
_QUAD_EPSREL = 1e-11


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Logarithmic evaluation grid on (0, inf)."""

    t_min: float = 1e-12
    t_max: float = 1e12
    points_per_decade: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.t_min < self.t_max):
            raise ValueError("GridSpec requires 0 < t_min < t_max")
        if self.points_per_decade < 8:
            raise ValueError("GridSpec requires points_per_decade >= 8")

    @property
    def decades(self) -> float:
        return math.log10(self.t_max / self.t_min)

    def points(self) -> np.ndarray:
        n = int(round(self.decades * self.points_per_decade)) + 1
        return np.logspace(math.log10(self.t_min), math.log10(self.t_max), n)


#: Default grid used by the SV-class and monotonicity checks.
STANDARD_GRID = GridSpec(1e-8, 1e8, 16)

#: Default grid for equivalence scans (speed/coverage balance).
SCAN_GRID = GridSpec(1e-6, 1e6, 13)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass
class IntegralResult:
    value: float
    error_bound: float = 0.0
    divergent_end: Optional[str] = None

    def __post_init__(self) -> None:
        if self.divergent_end is not None and self.value != _INF:
            raise ValueError("divergent result must carry value = +inf")

    @property
    def divergent(self) -> bool:
        return self.divergent_end is not None


class NonFiniteIntegrandError(ValueError):
    """The integrand evaluated to NaN or a signed infinity."""


# ---------------------------------------------------------------------------
# Canonical terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogTerm:
    """coef * e^{a x} (1+x)^beta exp(sum gamma x^alpha) on [x1, x2] in [0, inf].

    ``end`` records which endpoint of the original u-axis the direction
    x -> inf corresponds to ('zero' for the lower side u -> 0+, 'inf' for
    u -> inf); it is only used to attribute divergences.
    """

    coef: float
    a: float
    beta: float
    x1: float
    x2: float
    gammas: tuple[tuple[float, float], ...] = ()  # (alpha, gamma) pairs
    end: str = "inf"

    def integrand(self, x: float) -> float:
        extra = sum(g * x ** al for al, g in self.gammas)
        return self.coef * math.exp(self.a * x + extra) * (1.0 + x) ** self.beta


def term_diverges_at_inf(a: float, beta: float,
                         gammas: Sequence[tuple[float, float]] = ()) -> bool:
    """Whether int^inf e^{ax}(1+x)^beta exp(sum gamma x^alpha) dx diverges."""
    if a > 0.0:
        return True
    if a < 0.0:
        return False
    lead = 0.0
    lead_alpha = -1.0
    for alpha, gamma in gammas:
        if gamma != 0.0 and alpha > lead_alpha:
            lead_alpha, lead = alpha, gamma
    if lead > 0.0:
        return True
    if lead < 0.0:
        return False
    return beta >= -1.0


def _quad(f: Callable[[float], float], x1: float, x2: float) -> tuple[float, float]:
    val, err = _sci_integrate.quad(f, x1, x2, epsabs=0.0, epsrel=_QUAD_EPSREL,
                                   limit=200)
    return val, err


def exp_pow_integral(a: float, beta: float, x1: float, x2: float) -> tuple[float, float]:
    """(value, error) of int_{x1}^{x2} e^{a x} (1+x)^beta dx, [x1,x2] in [0,inf].

    Assumes convergence (check :func:`term_diverges_at_inf` first when x2=inf).
    """
    if x1 == x2:
        return 0.0, 0.0
    if a == 0.0:
        if x2 == _INF:
            if beta >= -1.0:
                raise ValueError("divergent exp_pow_integral")
            val = -((1.0 + x1) ** (beta + 1.0)) / (beta + 1.0)
            return val, 4e-16 * abs(val)
        if beta == -1.0:
            val = math.log1p(x2) - math.log1p(x1)
        else:
            val = ((1.0 + x2) ** (beta + 1.0) - (1.0 + x1) ** (beta + 1.0)) / (beta + 1.0)
        return val, 4e-16 * abs(val)
    if beta == 0.0:
        if x2 == _INF:
            if a >= 0.0:
                raise ValueError("divergent exp_pow_integral")
            val = -math.exp(a * x1) / a
            return val, 4e-16 * abs(val)
        if a * max(x1, x2) > 700.0:
            return _INF, _INF
        val = (math.exp(a * x2) - math.exp(a * x1)) / a
        return val, 4e-16 * abs(val)
    if x2 == _INF:
        if a >= 0.0:
            raise ValueError("divergent exp_pow_integral")
        s = -a
        if beta > -1.0:
            # e^{-a} s^{-(beta+1)} Gamma(beta+1, s(1+x1))
            z = s * (1.0 + x1)
            g = _sci_special.gammaincc(beta + 1.0, z) * _sci_special.gamma(beta + 1.0)
            val = math.exp(s) * s ** (-(beta + 1.0)) * g
            if math.isfinite(val):
                return val, 1e-13 * abs(val)
        return _quad(lambda x: math.exp(a * x) * (1.0 + x) ** beta, x1, _INF)
    # general finite segment: scale out the endpoint maximum to avoid overflow
    xm = x2 if a > 0.0 else x1
    scale = a * xm
    if scale > 700.0:
        return _INF, _INF
    val, err = _quad(lambda x: math.exp(a * (x - xm)) * (1.0 + x) ** beta, x1, x2)
    m = math.exp(scale)
    return val * m, err * m


def term_value(term: LogTerm) -> tuple[float, float]:
    """(value, error) of one canonical term; +inf when divergent."""
    if term.coef == 0.0 or term.x1 == term.x2:
        return 0.0, 0.0
    if term.x2 == _INF and term_diverges_at_inf(term.a, term.beta, term.gammas):
        return _INF, _INF
    if not term.gammas:
        val, err = exp_pow_integral(term.a, term.beta, term.x1, term.x2)
        return term.coef * val, abs(term.coef) * err
    f = term.integrand
    val, err = _quad(f, term.x1, term.x2)
    return val, err


def integrate_terms(terms: Sequence[LogTerm]) -> IntegralResult:
    """Sum canonical terms in the given (fixed) order."""
    total = 0.0
    err = 0.0
    for term in terms:
        v, e = term_value(term)
        if v == _INF:
            return IntegralResult(_INF, _INF,
                                  AT_ZERO if term.end == "zero" else AT_INFINITY)
        if not math.isfinite(v):
            raise NonFiniteIntegrandError(
                f"non-finite term value for a={term.a} beta={term.beta}")
        total += v
        err += e
    return IntegralResult(total, err)


# ---------------------------------------------------------------------------
# Adaptive path for plain callables
# ---------------------------------------------------------------------------

def _decade_blocks(x_lo: float, x_hi: float) -> list[tuple[float, float]]:
    width = math.log(10.0)
    edges = [x_lo]
    k = math.floor(x_lo / width) + 1
    while k * width < x_hi - 1e-12:
        if k * width > x_lo + 1e-12:
            edges.append(k * width)
        k += 1
    edges.append(x_hi)
    return list(zip(edges[:-1], edges[1:]))


def _adaptive_log_integral(g: Callable[[float], float], q: float,
                           lo: float, hi: float, tol: float,
                           envelope: Optional[tuple[float, float]] = None,
                           grid: GridSpec = GridSpec()) -> IntegralResult:
    """int_lo^hi g(u)^q du/u for a plain callable, cutoff at the grid bounds.

    ``envelope`` optionally gives (power, logexp) such that g(u)^q / u is
    dominated by u^power (1+|ln u|)^logexp beyond the grid; the remainder then
    uses the envelope's closed form.  Without it the neglected tails enter the
    error bound through a geometric extrapolation of the last decades.
    """

    def f(x: float) -> float:
        val = g(math.exp(x)) ** q
        if not math.isfinite(val):
            raise NonFiniteIntegrandError(f"integrand not finite at u={math.exp(x)!r}")
        return val

    x_lo = math.log(lo) if lo > 0.0 else -_INF
    x_hi = math.log(hi) if hi != _INF else _INF
    cut_lo = max(x_lo, math.log(grid.t_min))
    cut_hi = min(x_hi, math.log(grid.t_max))
    if cut_lo >= cut_hi:
        cut_lo = cut_hi = 0.5 * (max(x_lo, -745.0) + min(x_hi, 709.0))

    blocks = _decade_blocks(cut_lo, cut_hi)
    vals = []
    errs = []
    for a, b in blocks:
        v, e = _sci_integrate.quad(f, a, b, epsabs=0.0, epsrel=max(tol * 1e-2, 1e-12),
                                   limit=100)
        vals.append(v)
        errs.append(e)
    total = math.fsum(vals)
    err = math.fsum(errs)

    if envelope is not None:
        # caller guarantees g(u)^q is dominated, toward each open end, by
        # u^{+decay} (1+|ln u|)^logexp as u -> 0 and u^{-decay} (...) as
        # u -> inf; in x = |ln u| both remainders are e^{-decay x}(1+x)^logexp
        decay, logexp = envelope
        for side, x_edge in (("zero", cut_lo), ("inf", cut_hi)):
            if (side == "zero" and x_lo != -_INF) or (side == "inf" and x_hi != _INF):
                continue
            if term_diverges_at_inf(-decay, logexp):
                return IntegralResult(_INF, _INF,
                                      AT_ZERO if side == "zero" else AT_INFINITY)
            bound, _ = exp_pow_integral(-decay, logexp, abs(x_edge), _INF)
            err += bound
        return IntegralResult(total, err)

    # Divergence detection / tail bounds at the truncated ends.
    for side, tail_vals in (("zero", vals[:3][::-1] if x_lo == -_INF else None),
                            ("inf", vals[-3:] if x_hi == _INF else None)):
        if not tail_vals or len(tail_vals) < 3:
            continue
        inner, mid, outer = tail_vals  # ordered toward the open end
        scale = max(abs(total), 1e-300)
        if abs(outer) >= abs(mid) * 0.999 and abs(outer) > 1e-13 * scale:
            return IntegralResult(_INF, _INF,
                                  AT_ZERO if side == "zero" else AT_INFINITY)
        r = abs(outer) / abs(mid) if mid != 0.0 else 0.0
        if r < 1.0:
            err += abs(outer) * r / (1.0 - r)
    return IntegralResult(total, err)


def integrate_log(g, q: float, interval: tuple[float, float],
                  tol: float = ADAPTIVE_RTOL,
                  envelope: Optional[tuple[float, float]] = None,
                  grid: GridSpec = GridSpec()) -> IntegralResult:
    """int_a^b g(u)^q du/u with closed forms for structured integrands.

    Structured integrands expose ``log_terms(lo, hi, q)`` returning canonical
    :class:`LogTerm` objects; anything else is treated as a plain callable
    integrated up to the grid cutoffs.  Such callers may declare an
    ``envelope = (decay, logexp)`` dominating g^q by u^{+-decay}(1+|ln u|)^logexp
    toward the open ends; its closed-form remainder then enters the error
    bound (callers without one get a geometric tail estimate instead).
    """
    if not (0.0 < tol <= 1e-3):
        raise ValueError("tol must lie in (0, 1e-3]")
    lo, hi = interval
    if not (0.0 <= lo < hi):
        raise ValueError("interval must satisfy 0 <= a < b")
    if q <= 0.0:
        raise ValueError("q must be positive")
    if hasattr(g, "log_terms"):
        return integrate_terms(g.log_terms(lo, hi, q))
    return _adaptive_log_integral(g, q, lo, hi, tol, envelope, grid)


# ---------------------------------------------------------------------------
# Suprema
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_min(f: Callable[[float], float], a: float, b: float,
               rel_tol: float = 1e-4, max_iter: int = 120) -> tuple[float, float]:
    """Golden-section minimum of f on [a, b] with a relative plateau criterion.

    Stops once the bracketed function values agree to ``rel_tol`` relative, or
    the bracket collapses.  Returns (argmin, min).
    """
    a, b = (a, b) if a <= b else (b, a)
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    best_x, best_y = (c, yc) if yc <= yd else (d, yd)
    for _ in range(max_iter):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
        if yc <= best_y:
            best_x, best_y = c, yc
        if yd < best_y:
            best_x, best_y = d, yd
        span = max(abs(yc), abs(yd), 1e-300)
        if abs(yc - yd) <= rel_tol * span and h <= _INV_PHI * (abs(a) + abs(b) + 1.0):
            break
        if h < 1e-14 * (abs(a) + abs(b) + 1.0):
            break
    return best_x, best_y


def golden_max(f: Callable[[float], float], a: float, b: float,
               rel_tol: float = 1e-6, max_iter: int = 200) -> tuple[float, float]:
    x, y = golden_min(lambda t: -f(t), a, b, rel_tol, max_iter)
    return x, -y


def sup_log(g, interval: tuple[float, float],
            grid: GridSpec = GridSpec(),
            refine: bool = True) -> float:
    """Supremum of g on the interval, evaluated on a log grid with refinement.

    Structured objects may expose ``breakpoints(lo, hi)``; those points are
    added to the grid so kinks are hit exactly.  Each interior bracket around
    a grid maximum gets one golden-section refinement pass.
    """
    lo, hi = interval
    if not (0.0 <= lo < hi):
        raise ValueError("interval must satisfy 0 <= a < b")
    x_lo = max(math.log(lo) if lo > 0.0 else math.log(grid.t_min) - 2.0,
               math.log(grid.t_min) - 2.0)
    x_hi = min(math.log(hi) if hi != _INF else math.log(grid.t_max) + 2.0,
               math.log(grid.t_max) + 2.0)
    n = max(int((x_hi - x_lo) * grid.points_per_decade / math.log(10.0)), 8)
    xs = list(np.linspace(x_lo, x_hi, n + 1))
    if hasattr(g, "breakpoints"):
        for b in g.breakpoints(max(lo, math.exp(x_lo)), min(hi, math.exp(x_hi))):
            if b > 0.0:
                xs.append(math.log(b))
    if lo > 0.0:
        xs.append(math.log(lo))
    if hi != _INF:
        xs.append(math.log(hi))
    xs = sorted(set(x for x in xs if x_lo - 1e-12 <= x <= x_hi + 1e-12))

    def fv(x: float) -> float:
        return g(math.exp(x))

    vals = [fv(x) for x in xs]
    best = max(vals)
    if refine and len(xs) >= 3:
        i = vals.index(best)
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        if b > a:
            _, y = golden_max(fv, a, b)
            best = max(best, y)
    return best
