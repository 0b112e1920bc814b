"""Interpolation quasi-norms, the partial quantities I/J, and the index algebra.

The space quasi-norm is ||t^{-theta-1/q} b(t) K(t,f)||_{q,(0,inf)}.  Products
of a profile piece (atom sums) with a weight side form stay inside the
canonical e^{a x}(1+x)^beta family whenever the piece is a single atom or q is
a small integer (multinomial expansion); other segments integrate adaptively.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .profiles import Atom, KProfile, PiecewiseCurve, _segment_probe
from .quadrature import (
    AT_INFINITY,
    AT_ZERO,
    GridSpec,
    IntegralResult,
    LogTerm,
    STANDARD_GRID,
    _quad,
    integrate_terms,
    term_diverges_at_inf,
)
from .weights import Flip, SideForm, WeightExpr, classify, head_qnorm, tail_qnorm

__all__ = [
    "SpaceSpec",
    "IndexPair",
    "ConditionReport",
    "space_norm",
    "weighted_knorm",
    "partial_norms",
    "index",
    "quasi_monotone_constant",
    "check_condition_monotone_index",
    "DEFAULT_EPS_GRID",
    "MONOTONE_THRESHOLD",
]

_INF = math.inf

#: epsilon search grid for the monotone-index conditions.
DEFAULT_EPS_GRID = tuple(2.0 ** -k for k in range(0, 11))

#: "equivalent to a monotone function" means quasi-monotonicity constant <= 4.
MONOTONE_THRESHOLD = 4.0

_MAX_EXPAND_Q = 4


# ---------------------------------------------------------------------------
# Space specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceSpec:
    """A K-interpolation space (theta, q, b); limiting thetas require the
    matching integrability class of the weight."""

    theta: float
    q: float
    b: WeightExpr

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError("theta must lie in [0, 1]")
        if not (self.q > 0.0):
            raise ValueError("q must be positive (inf allowed)")
        if self.theta == 0.0 and not classify(self.b, self.q).in_SV0q:
            raise ValueError("theta = 0 requires the tail class of the weight")
        if self.theta == 1.0 and not classify(self.b, self.q).in_SV1q:
            raise ValueError("theta = 1 requires the head class of the weight")

    def label(self) -> str:
        return f"(theta={self.theta:g}, q={self.q:g}, b={self.b.to_text()})"


# ---------------------------------------------------------------------------
# The weighted K-norm core
# ---------------------------------------------------------------------------

def _expand_piece(atoms: Sequence[Atom], q: float) -> Optional[list[Atom]]:
    """(sum of atoms)^q as a list of product atoms, or None if not expandable."""
    if len(atoms) == 0:
        return []
    if len(atoms) == 1:
        a = atoms[0]
        if a.coef < 0.0:
            return None
        return [Atom(a.coef ** q, a.power * q, a.logexp * q)]
    if q != int(q) or not (1 <= q <= _MAX_EXPAND_Q):
        return None
    n = int(q)
    out: list[Atom] = []
    for combo in itertools.combinations_with_replacement(range(len(atoms)), n):
        counts: dict[int, int] = {}
        for i in combo:
            counts[i] = counts.get(i, 0) + 1
        mult = math.factorial(n)
        coef = 1.0
        power = 0.0
        logexp = 0.0
        for i, k in counts.items():
            mult //= math.factorial(k)
            coef *= atoms[i].coef ** k
            power += atoms[i].power * k
            logexp += atoms[i].logexp * k
        out.append(Atom(mult * coef, power, logexp))
    out.sort(key=lambda a: (a.power, a.logexp))
    return out


def _segment_terms(atoms_q: Sequence[Atom], theta: float, q: float,
                   w_form: SideForm, side: str, u0: float, u1: float
                   ) -> list[LogTerm]:
    """Terms of int_{u0}^{u1} u^{-theta q} w^q K^q du/u on one side of 1."""
    terms: list[LogTerm] = []
    wq = w_form.scaled(q)
    for a in atoms_q:
        p_tot = a.power - theta * q
        beta = a.logexp + wq.beta
        if side == "hi":
            x1 = math.log(u0)
            x2 = math.log(u1) if u1 != _INF else _INF
            terms.append(LogTerm(a.coef, p_tot, beta, x1, x2, wq.gammas, end="inf"))
        else:
            x1 = -math.log(u1)
            x2 = -math.log(u0) if u0 > 0.0 else _INF
            terms.append(LogTerm(a.coef, -p_tot, beta, x1, x2, wq.gammas, end="zero"))
    return terms


def _segment_adaptive(curve: PiecewiseCurve, theta: float, q: float,
                      b, u0: float, u1: float, end: str) -> tuple[float, float]:
    """Adaptive fallback for one segment; returns (value, error)."""

    def f(x: float) -> float:
        if abs(x) > 690.0:
            return 0.0
        u = math.exp(x)
        ku = curve(u)
        if ku <= 0.0:
            return 0.0
        return (u ** -theta * b(u) * ku) ** q

    x1 = math.log(u0) if u0 > 0.0 else -_INF
    x2 = math.log(u1) if u1 != _INF else _INF
    if x1 == -_INF or x2 == _INF:
        # probe decade decay to decide convergence before quad sees infinity
        base = x2 - 1.0 if x1 == -_INF else x1 + 1.0
        step = -1.0 if x1 == -_INF else 1.0
        vals = [abs(f(base + step * k * math.log(10.0))) for k in range(1, 6)]
        if vals[-1] >= vals[-2] * 0.999 and vals[-1] > 0.0:
            return _INF, _INF
    return _quad(f, x1, x2)


def weighted_knorm(curve: PiecewiseCurve, theta: float, q: float,
                   b: WeightExpr, lo: float = 0.0, hi: float = _INF
                   ) -> IntegralResult:
    """int_lo^hi (u^{-theta} b(u) K(u))^q du/u with K given as a curve.

    Returns the q-th power of the quasi-norm (callers take the root), +inf
    with the divergent end when the integral blows up.
    """
    if curve.is_zero() or lo >= hi:
        return IntegralResult(0.0, 0.0)
    cuts = sorted({lo, hi, 1.0} | set(curve.breaks))
    cuts = [c for c in cuts if lo <= c <= hi]
    if cuts[0] != lo:
        cuts.insert(0, lo)
    if cuts[-1] != hi:
        cuts.append(hi)
    total = 0.0
    err = 0.0
    structured: Optional[WeightExpr] = b if isinstance(b, WeightExpr) else None
    for u0, u1 in zip(cuts[:-1], cuts[1:]):
        if u0 == u1:
            continue
        mid = _geo_mid(u0, u1)
        atoms = curve.pieces[curve.piece_index(mid)]
        if not atoms:
            continue
        side = "lo" if mid < 1.0 else "hi"
        end = "zero" if side == "lo" else "inf"
        expanded = _expand_piece(atoms, q) if structured is not None else None
        if expanded is not None:
            terms = _segment_terms(expanded, theta, q, structured.side(side),
                                   side, u0, u1)
            terms.sort(key=lambda tm: (-abs(tm.a), tm.beta))
            res = integrate_terms(terms)
        else:
            v, e = _segment_adaptive(curve, theta, q, b, u0, u1, end)
            res = IntegralResult(v, e if v != _INF else _INF,
                                 None if v != _INF else
                                 (AT_ZERO if end == "zero" else AT_INFINITY))
        if res.divergent:
            return res
        total += res.value
        err += res.error_bound
    return IntegralResult(total, err)


def _geo_mid(u0: float, u1: float) -> float:
    if u0 == 0.0:
        return u1 / 2.0
    if u1 == _INF:
        return u0 * 2.0
    return math.sqrt(u0 * u1)


def _weighted_ksup(curve: PiecewiseCurve, theta: float, b, lo: float, hi: float
                   ) -> float:
    """sup over (lo, hi) of u^{-theta} b(u) K(u)."""
    if curve.is_zero():
        return 0.0

    def g(u: float) -> float:
        return u ** -theta * b(u) * curve(u)

    cuts = sorted({max(lo, 1e-15), min(hi, 1e15), 1.0} | set(curve.breaks))
    cuts = [c for c in cuts if lo <= c <= hi and 0.0 < c < _INF]
    best = 0.0
    xs: list[float] = []
    x_lo = math.log(cuts[0]) if lo > 0.0 else math.log(cuts[0]) - 40.0
    x_hi = math.log(cuts[-1]) if hi != _INF else math.log(cuts[-1]) + 40.0
    xs.extend(np.linspace(x_lo, x_hi, 513))
    xs.extend(math.log(c) for c in cuts)
    vals = [(x, g(math.exp(x))) for x in sorted(set(xs))]
    best = max(v for _, v in vals)
    i = max(range(len(vals)), key=lambda j: vals[j][1])
    a = vals[max(i - 1, 0)][0]
    c = vals[min(i + 1, len(vals) - 1)][0]
    if c > a:
        from .quadrature import golden_max
        _, y = golden_max(lambda x: g(math.exp(x)), a, c)
        best = max(best, y)
    # blow-up detection toward the open ends
    if lo == 0.0:
        seq = [g(math.exp(x_lo - 5.0 * k)) for k in range(4)]
        if all(seq[k + 1] > seq[k] * (1.0 + 1e-9) for k in range(3)):
            return _INF
        best = max(best, max(seq))
    if hi == _INF:
        seq = [g(math.exp(x_hi + 5.0 * k)) for k in range(4)]
        if all(seq[k + 1] > seq[k] * (1.0 + 1e-9) for k in range(3)):
            return _INF
        best = max(best, max(seq))
    return best


def space_norm(f: KProfile, s: SpaceSpec,
               lo: float = 0.0, hi: float = _INF) -> float:
    """||t^{-theta-1/q} b(t) K(t,f)||_{q,(lo,hi)}; +inf allowed."""
    if s.q == _INF:
        return _weighted_ksup(f.curve, s.theta, s.b, lo, hi)
    res = weighted_knorm(f.curve, s.theta, s.q, s.b, lo, hi)
    if res.divergent:
        return _INF
    return res.value ** (1.0 / s.q)


# ---------------------------------------------------------------------------
# Partial quantities I, J, I1, J1
# ---------------------------------------------------------------------------

def partial_norms(f: KProfile, t: float, case: str,
                  q0: float, b0: WeightExpr, q1: float, b1: WeightExpr
                  ) -> tuple[float, float]:
    """(I, J) of the limiting frames.

    ``limiting0``: I = ||u^{-1/q0} b0 K||_{q0,(0,t)} and
    J = ||u^{-1/q1} b1 K||_{q1,(t,inf)}; ``limiting1`` carries the extra
    u^{-1} factor on both pieces.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    if case not in ("limiting0", "limiting1"):
        raise ValueError(f"unknown case {case!r}")
    theta = 0.0 if case == "limiting0" else 1.0
    if f.curve.is_zero():
        return 0.0, 0.0
    if q0 == _INF:
        I = _weighted_ksup(f.curve, theta, b0, 0.0, t)
    else:
        res = weighted_knorm(f.curve, theta, q0, b0, 0.0, t)
        I = res.value ** (1.0 / q0) if not res.divergent else _INF
    if q1 == _INF:
        J = _weighted_ksup(f.curve, theta, b1, t, _INF)
    else:
        res = weighted_knorm(f.curve, theta, q1, b1, t, _INF)
        J = res.value ** (1.0 / q1) if not res.divergent else _INF
    return I, J


# ---------------------------------------------------------------------------
# Indices rho / eta and their epsilon variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexPair:
    value: Optional[float]
    numerator: float
    denominator: float

    @property
    def defined(self) -> bool:
        return self.value is not None


def index(t: float, kind: str, q0: float, b0: WeightExpr,
          q1: float, b1: WeightExpr, eps: float = 0.0) -> IndexPair:
    """rho / rho_eps (tail quotients) and eta / eta_eps (head quotients)."""
    if kind in ("rho", "rho_eps"):
        num = tail_qnorm(b0, q0, t)
        den = tail_qnorm(b1, q1, t)
    elif kind in ("eta", "eta_eps"):
        num = head_qnorm(b0, q0, t)
        den = head_qnorm(b1, q1, t)
    else:
        raise ValueError(f"unknown index kind {kind!r}")
    if kind.endswith("_eps"):
        if eps <= 0.0:
            raise ValueError("eps must be positive for the eps variants")
        num = num ** (1.0 + eps)
    bad = (num == 0.0 and den == 0.0) or (num == _INF and den == _INF) \
        or den == 0.0 or not math.isfinite(den)
    value = None if bad else num / den
    return IndexPair(value, num, den)


def quasi_monotone_constant(g, grid, direction: str = "nondecreasing") -> float:
    """C = sup over ordered grid pairs x < t of the monotonicity violation.

    ``g`` is a callable or an array of already-evaluated positive values.
    """
    if direction not in ("nondecreasing", "nonincreasing"):
        raise ValueError("direction must be nondecreasing or nonincreasing")
    if isinstance(grid, GridSpec):
        ts = grid.points()
    else:
        ts = np.asarray(grid, dtype=float)
    vals = np.asarray(g, dtype=float) if not callable(g) else \
        np.array([g(float(t)) for t in ts])
    if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
        return _INF
    worst = 1.0
    if direction == "nondecreasing":
        run = -_INF
        for v in vals:
            run = max(run, v)
            worst = max(worst, run / v)
    else:
        run = _INF
        for v in vals:
            run = min(run, v)
            worst = max(worst, v / run)
    return float(worst)


@dataclass
class ConditionReport:
    kind: str
    passed: bool
    best_eps: Optional[float]
    best_constant: float
    threshold: float
    per_eps: list[tuple[float, float]] = field(default_factory=list)
    skipped_points: int = 0


def check_condition_monotone_index(kind: str, q0: float, b0: WeightExpr,
                                   q1: float, b1: WeightExpr,
                                   eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
                                   threshold: float = MONOTONE_THRESHOLD,
                                   grid: GridSpec = STANDARD_GRID
                                   ) -> ConditionReport:
    """Search the eps grid for a quasi-nondecreasing rho_eps (or eta_eps)."""
    if kind not in ("rho_eps", "eta_eps"):
        raise ValueError("kind must be rho_eps or eta_eps")
    ts = grid.points()
    base_kind = kind.split("_")[0]
    nums = np.empty(len(ts))
    dens = np.empty(len(ts))
    skipped = 0
    keep = np.ones(len(ts), dtype=bool)
    for i, t in enumerate(ts):
        pair = index(float(t), base_kind, q0, b0, q1, b1)
        nums[i], dens[i] = pair.numerator, pair.denominator
        if not pair.defined or pair.numerator == _INF or pair.numerator == 0.0:
            keep[i] = False
            skipped += 1
    per_eps: list[tuple[float, float]] = []
    best_eps: Optional[float] = None
    best_c = _INF
    for eps in eps_grid:
        vals = nums[keep] ** (1.0 + eps) / dens[keep]
        c = quasi_monotone_constant(vals, ts[keep])
        per_eps.append((eps, c))
        if c < best_c:
            best_c, best_eps = c, eps
    return ConditionReport(kind=kind, passed=best_c <= threshold,
                           best_eps=best_eps, best_constant=best_c,
                           threshold=threshold, per_eps=per_eps,
                           skipped_points=skipped)
