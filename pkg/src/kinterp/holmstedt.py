"""Two-sided Holmstedt-type scans and the equal-theta nonexistence demo.

The left-hand side is the decomposition infimum over the truncation family on
the couple (L1, Linf): for each level lam the split f = (f*-lam)_+ + min(f*,lam)
realizes a near-optimal decomposition, so

    lhs(s) = inf_lam ||f0(lam)||_{X0} + s ||f1(lam)||_{X1}

(together with the two trivial decompositions) is an upper bound for the true
K-functional that the scanned equivalences bound from below.  Reports label this
quantity the truncation K-functional.

The theta0 = theta1 = 1 frame is evaluated through the substitution t -> 1/t,
which swaps the couple and conjugates the profile (K(t) -> t K(1/t)); the
truncation family maps onto itself under that substitution, level by level,
so the reduction is exact and not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .norms import (
    MONOTONE_THRESHOLD,
    SpaceSpec,
    check_condition_monotone_index,
    index,
    partial_norms,
    quasi_monotone_constant,
    space_norm,
)
from .profiles import (
    KProfile,
    K_from_rearrangement,
    Rearrangement,
    conjugate_profile,
    realize_rearrangement,
    truncation_split,
)
from .quadrature import GridSpec, SCAN_GRID, STANDARD_GRID, golden_min
from .weights import Flip, Power, Product, WeightExpr, head_qnorm

__all__ = [
    "HolmstedtCase",
    "HypothesisError",
    "ScanRow",
    "ScanReport",
    "DecompositionTable",
    "index_value",
    "rhs_formula",
    "lhs_decomposition",
    "equivalence_scan",
    "NegativeDemoReport",
    "incompatibility_M",
    "negative_demo",
]

_INF = math.inf

CASE_KINDS = ("limiting00", "limiting11", "interior_equal_q", "nonlimiting")


class HypothesisError(RuntimeError):
    """A scan precondition failed; carries the name of the failed condition."""

    def __init__(self, condition: str, detail: str = ""):
        super().__init__(f"hypothesis check failed: {condition}"
                         + (f" ({detail})" if detail else ""))
        self.condition = condition


@dataclass(frozen=True)
class HolmstedtCase:
    kind: str
    q0: float
    q1: float
    b0: WeightExpr
    b1: WeightExpr
    theta: Optional[float] = None       # interior_equal_q
    theta0: Optional[float] = None      # nonlimiting
    theta1: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in CASE_KINDS:
            raise ValueError(f"unknown case kind {self.kind!r}")
        if self.kind == "interior_equal_q":
            if self.q0 != self.q1:
                raise ValueError("interior_equal_q requires q0 == q1")
            if self.theta is None or not (0.0 < self.theta < 1.0):
                raise ValueError("interior_equal_q requires theta in (0, 1)")
        if self.kind == "nonlimiting":
            if self.theta0 is None or self.theta1 is None \
                    or not (0.0 < self.theta0 < self.theta1 < 1.0):
                raise ValueError("nonlimiting requires 0 < theta0 < theta1 < 1")

    def spaces(self) -> tuple[SpaceSpec, SpaceSpec]:
        if self.kind == "limiting00":
            th0 = th1 = 0.0
        elif self.kind == "limiting11":
            th0 = th1 = 1.0
        elif self.kind == "interior_equal_q":
            th0 = th1 = float(self.theta)
        else:
            th0, th1 = float(self.theta0), float(self.theta1)
        return (SpaceSpec(th0, self.q0, self.b0),
                SpaceSpec(th1, self.q1, self.b1))

    def label(self) -> str:
        extra = ""
        if self.kind == "interior_equal_q":
            extra = f", theta={self.theta:g}"
        if self.kind == "nonlimiting":
            extra = f", theta0={self.theta0:g}, theta1={self.theta1:g}"
        return (f"{self.kind}[q0={self.q0:g}, b0={self.b0.to_text()}, "
                f"q1={self.q1:g}, b1={self.b1.to_text()}{extra}]")


def _flip_reduced(case: HolmstedtCase) -> HolmstedtCase:
    """The limiting00 case equivalent to a limiting11 case under t -> 1/t."""
    return HolmstedtCase("limiting00", q0=case.q1, q1=case.q0,
                         b0=Flip(case.b1), b1=Flip(case.b0))


def index_value(case: HolmstedtCase, t: float) -> Optional[float]:
    """The argument s at which the outer K-functional is evaluated."""
    if case.kind == "limiting00":
        return index(t, "rho", case.q0, case.b0, case.q1, case.b1).value
    if case.kind == "limiting11":
        return index(t, "eta", case.q0, case.b0, case.q1, case.b1).value
    ratio = case.b0(t) / case.b1(t)
    if case.kind == "interior_equal_q":
        return ratio
    return t ** (case.theta1 - case.theta0) * ratio


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def rhs_formula(case: HolmstedtCase, f: KProfile, t: float) -> float:
    """The Holmstedt right-hand side I + s J of the given case at t."""
    if f.curve.is_zero():
        return 0.0
    s = index_value(case, t)
    if s is None:
        raise ValueError(f"index undefined at t={t!r}")
    if case.kind == "limiting00":
        I, J = partial_norms(f, t, "limiting0", case.q0, case.b0,
                             case.q1, case.b1)
    elif case.kind == "limiting11":
        I, J = partial_norms(f, t, "limiting1", case.q0, case.b0,
                             case.q1, case.b1)
    else:
        X0, X1 = case.spaces()
        I = space_norm(f, X0, 0.0, t)
        J = space_norm(f, X1, t, _INF)
    return I + s * J


# ---------------------------------------------------------------------------
# Truncation-family decomposition infimum
# ---------------------------------------------------------------------------

LAMBDA_GRID_POINTS = 32
PLATEAU_RTOL = 1e-4


class DecompositionTable:
    """Cached piece norms N0(lam), N1(lam) for one profile and one space pair.

    The objective N0(lam) + s*N1(lam) is then a vector operation per scan row,
    and the golden-section refinement memoizes any extra levels it probes.
    """

    def __init__(self, f: Rearrangement, X0: SpaceSpec, X1: SpaceSpec):
        self.f = f
        self.X0 = X0
        self.X1 = X1
        K = K_from_rearrangement(f)
        self.norm_full_0 = space_norm(K, X0)
        self.norm_full_1 = space_norm(K, X1)
        self._memo: dict[float, tuple[float, float]] = {}
        levels = f.node_values()
        if levels:
            lo, hi = min(levels), max(levels)
            if hi > lo:
                grid = np.logspace(math.log10(lo), math.log10(hi),
                                   LAMBDA_GRID_POINTS)
                levels = sorted(set(levels) | {float(x) for x in grid})
        self.levels = [lam for lam in levels if lam > 0.0]
        for lam in self.levels:
            self.piece_norms(lam)

    def piece_norms(self, lam: float) -> tuple[float, float]:
        got = self._memo.get(lam)
        if got is not None:
            return got
        f0, f1 = truncation_split(self.f, lam)
        n0 = space_norm(K_from_rearrangement(f0), self.X0)
        n1 = space_norm(K_from_rearrangement(f1), self.X1)
        self._memo[lam] = (n0, n1)
        return n0, n1

    def objective(self, lam: float, s: float) -> float:
        n0, n1 = self.piece_norms(lam)
        return n0 + s * n1

    def best(self, s: float) -> float:
        if self.f.curve.is_zero():
            return 0.0
        cands = [self.norm_full_0, s * self.norm_full_1]
        cands += [self.objective(lam, s) for lam in self.levels]
        best = min(cands)
        if not self.levels or best == _INF:
            return best
        i = int(np.argmin([self.objective(lam, s) for lam in self.levels]))
        if 0 < i < len(self.levels) - 1 and math.isfinite(best):
            a = math.log(self.levels[i - 1])
            b = math.log(self.levels[i + 1])
            _, y = golden_min(lambda x: self.objective(math.exp(x), s), a, b,
                              rel_tol=PLATEAU_RTOL)
            best = min(best, y)
        return best


def _as_rearrangement(f) -> Rearrangement:
    if isinstance(f, Rearrangement):
        return f
    if isinstance(f, KProfile):
        return realize_rearrangement(f)
    raise TypeError("expected a KProfile or a Rearrangement")


def lhs_decomposition(case: HolmstedtCase, f, s: float,
                      table: Optional[DecompositionTable] = None) -> float:
    """inf over the truncation family of ||f0||_{X0} + s ||f1||_{X1}.

    For the upper-limiting frame the infimum is taken through the exact
    t -> 1/t conjugation; a ``table`` passed for that case must then belong
    to the reduced (flipped, slot-swapped) pair and the conjugate profile.
    """
    if s <= 0.0:
        raise ValueError("the evaluated index s must be positive")
    fr = _as_rearrangement(f)
    if fr.curve.is_zero():
        return 0.0
    if case.kind == "limiting11":
        red = _flip_reduced(case)
        conj = realize_rearrangement(conjugate_profile(K_from_rearrangement(fr)))
        inner = DecompositionTable(conj, *red.spaces()) if table is None else table
        return s * inner.best(1.0 / s)
    if table is None:
        table = DecompositionTable(fr, *case.spaces())
    return table.best(s)


# ---------------------------------------------------------------------------
# Equivalence scans
# ---------------------------------------------------------------------------

@dataclass
class ScanRow:
    t: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


@dataclass
class ScanReport:
    case: str
    profile: str
    rows: list[ScanRow] = field(default_factory=list)
    skipped: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ratio_min(self) -> float:
        return min((r.ratio for r in self.rows), default=_INF)

    @property
    def ratio_max(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def variation(self) -> float:
        return self.ratio_max / self.ratio_min if self.rows else _INF

    def csv_rows(self) -> list[tuple[float, float, float, float]]:
        return [(r.t, r.lhs, r.rhs, r.ratio) for r in self.rows]


def verify_hypotheses(case: HolmstedtCase,
                      grid: GridSpec = STANDARD_GRID) -> list[str]:
    """Run the case's precondition checks; raises HypothesisError on failure."""
    notes: list[str] = []
    case.spaces()  # SV-class preconditions raise ValueError on their own
    if case.kind in ("limiting00", "limiting11"):
        kind = "rho_eps" if case.kind == "limiting00" else "eta_eps"
        base = kind.split("_")[0]
        if case.q0 != case.q1:
            rep = check_condition_monotone_index(kind, case.q0, case.b0,
                                                 case.q1, case.b1, grid=grid)
            if not rep.passed:
                raise HypothesisError(
                    f"{kind} equivalent to a nondecreasing function",
                    f"best constant {rep.best_constant:.3g} over eps grid, "
                    f"threshold {rep.threshold:g}")
            notes.append(f"{kind} passes at eps={rep.best_eps:g} "
                         f"(constant {rep.best_constant:.3g})")
        else:
            vals = [index_value(case, float(t)) for t in grid.points()]
            if any(v is None for v in vals):
                raise HypothesisError(f"{base} defined on the grid")
            c = quasi_monotone_constant(np.array(vals), grid.points())
            if c > MONOTONE_THRESHOLD:
                raise HypothesisError(f"{base} increasing",
                                      f"quasi-monotone constant {c:.3g}")
            notes.append(f"{base} quasi-nondecreasing (constant {c:.3g})")
    elif case.kind == "interior_equal_q":
        ratio = [case.b0(float(t)) / case.b1(float(t)) for t in grid.points()]
        c = quasi_monotone_constant(np.array(ratio), grid.points())
        if c > MONOTONE_THRESHOLD:
            raise HypothesisError("b0/b1 nondecreasing",
                                  f"quasi-monotone constant {c:.3g}")
        notes.append(f"b0/b1 quasi-nondecreasing (constant {c:.3g})")
    return notes


def equivalence_scan(case: HolmstedtCase, f, t_grid: GridSpec = SCAN_GRID
                     ) -> ScanReport:
    """Scan lhs/rhs over the t grid after verifying the case hypotheses."""
    notes = verify_hypotheses(case)
    fr = _as_rearrangement(f)
    label = fr.label

    if case.kind == "limiting11":
        # exact t -> 1/t reduction; see the module docstring
        red = _flip_reduced(case)
        conj = realize_rearrangement(conjugate_profile(K_from_rearrangement(fr)))
        table = DecompositionTable(conj, *red.spaces())
        conj_profile = K_from_rearrangement(conj)
        report = ScanReport(case.label(), label, notes=notes)
        report.notes.append("computed through the t -> 1/t symmetry")
        for t in t_grid.points():
            t = float(t)
            s = index_value(case, t)
            if s is None or not (0.0 < s < _INF):
                report.skipped += 1
                continue
            lhs = s * table.best(1.0 / s)
            rhs = s * rhs_formula(red, conj_profile, 1.0 / t)
            _append_row(report, t, lhs, rhs)
        return report

    table = DecompositionTable(fr, *case.spaces())
    profile = K_from_rearrangement(fr)
    report = ScanReport(case.label(), label, notes=notes)
    for t in t_grid.points():
        t = float(t)
        s = index_value(case, t)
        if s is None or not (0.0 < s < _INF):
            report.skipped += 1
            continue
        lhs = table.best(s)
        rhs = rhs_formula(case, profile, t)
        _append_row(report, t, lhs, rhs)
    return report


def _append_row(report: ScanReport, t: float, lhs: float, rhs: float) -> None:
    if 0.0 < lhs < _INF and 0.0 < rhs < _INF:
        report.rows.append(ScanRow(t, lhs, rhs))
    else:
        report.skipped += 1


# ---------------------------------------------------------------------------
# Nonexistence demo (equal interior theta, different q)
# ---------------------------------------------------------------------------

@dataclass
class NegativeDemoReport:
    theta: float
    r_exponent: float
    swapped: bool
    rows: list[tuple[float, float, float, float]]  # (t, head_bound, upper_bound, M)
    verdict: str
    growth_ratio: float
    monotone_decades: float
    note: str

    @property
    def confirmed(self) -> bool:
        return self.verdict == "nonexistence confirmed"

    def csv_rows(self) -> list[tuple[float, float, float, float]]:
        return self.rows


def incompatibility_M(q0: float, q1: float, b0: WeightExpr, b1: WeightExpr,
                      t: float) -> float:
    """One value of the incompatibility quotient M(t) (role swap included)."""
    if q0 == q1:
        raise ValueError("the demo needs q0 != q1")
    if q0 > q1:
        q0, q1, b0, b1 = q1, q0, b1, b0
    r = q0 * q1 / (q1 - q0)
    g = Product(b0, Power(b1, -1.0))
    head = head_qnorm(g, r, t)
    return head / g(t) if head != _INF else _INF


def negative_demo(theta: float, q0: float, q1: float,
                  b0: WeightExpr, b1: WeightExpr,
                  t_grid: GridSpec = SCAN_GRID) -> NegativeDemoReport:
    """Incompatibility table M(t) for equal interior theta with q0 != q1.

    M(t) = (int_0^t (g(s))^r ds/s)^{1/r} / g(t) with g = b0/b1 and
    r = q0 q1 / (q1 - q0) when q0 < q1 (roles of the two spaces swap
    otherwise).  Both quantities bound the same hypothetical scaling function
    from opposite sides, so M staying bounded is necessary for a two-sided
    formula; unbounded growth toward t -> 0+ confirms nonexistence.  The head
    bound is implemented in its positive-exponent form r > 0.
    """
    if not (0.0 < theta < 1.0):
        raise ValueError("theta must lie in (0, 1)")
    if q0 == q1:
        raise ValueError("the demo needs q0 != q1")
    swapped = q0 > q1
    if swapped:
        q0, q1 = q1, q0
        b0, b1 = b1, b0
    r = q0 * q1 / (q1 - q0)
    g = Product(b0, Power(b1, -1.0))
    rows = []
    for t in t_grid.points():
        t = float(t)
        head = head_qnorm(g, r, t)
        upper = g(t)
        M = head / upper if head != _INF else _INF
        rows.append((t, head, upper, M))
    ms = [row[3] for row in rows]
    if any(m == _INF for m in ms):
        verdict = "nonexistence confirmed"
        growth, decades = _INF, _INF
    else:
        mid = len(rows) // 2
        decades = math.log10(rows[mid][0] / rows[0][0])
        monotone = all(ms[i] >= ms[i + 1] * (1.0 - 1e-9) for i in range(mid))
        growth = ms[0] / ms[mid] if ms[mid] > 0.0 else _INF
        ok = monotone and decades >= 6.0 - 1e-9 and growth >= 3.0
        verdict = "nonexistence confirmed" if ok else "inconclusive"
    note = ("head bound taken in its positive-exponent form "
            f"r = q0*q1/|q1-q0| = {r:g}; the sign-flipped variant of this "
            "bound is inconsistent with the windowed tail-quotient "
            "criterion and is not used")
    if swapped:
        note += "; roles of the two spaces were swapped (q0 > q1)"
    return NegativeDemoReport(theta=theta, r_exponent=r, swapped=swapped,
                              rows=rows, verdict=verdict, growth_ratio=growth,
                              monotone_decades=decades, note=note)
