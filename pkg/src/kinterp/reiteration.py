"""Reiteration weights, the log-derivative condition, and Lorentz-Karamata norms.

For a pair of limiting spaces with tail-quotient index rho(t), the composite
weight of the reiterated space is

    b~(t) = rho(t)^(1-theta) b(rho(t)) b1(t)^(q1/q)
            (int_t^inf b1(u)^q1 du/u)^(1/q1 - 1/q),

with the head-quotient analogue b^ in the opposite limiting frame.  The outer
quasi-norm of the reiterated space is evaluated through the substitution
s = rho(t): the Holmstedt right-hand side I + rho J stands in for the inner
K-functional, and the measure picks up the factor rho'(t)/rho(t), obtained by
central differences in log t.  A genuine double-layer decomposition infimum
would stack a second search on top of the first without adding verification
power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .holmstedt import HolmstedtCase, HypothesisError, rhs_formula
from .norms import (
    MONOTONE_THRESHOLD,
    SpaceSpec,
    check_condition_monotone_index,
    index,
    quasi_monotone_constant,
    space_norm,
    weighted_knorm,
    _weighted_ksup,
)
from .profiles import KProfile, K_from_rearrangement, Rearrangement
from .quadrature import GridSpec, STANDARD_GRID
from .weights import Flip, WeightExpr, classify, weight_kernel_integral

__all__ = [
    "ReiterationSpec",
    "LKSpec",
    "build_tilde_b",
    "build_hat_b",
    "log_derivative_check",
    "LogDerivativeReport",
    "reiteration_check",
    "ReiterationReport",
    "lorentz_karamata_norm",
    "lk_identification_check",
    "LKIdentificationReport",
]

_INF = math.inf

#: probes for the required limits of the index (0 at 0+, inf at inf); the
#: trend probes catch indices decaying slower than any magnitude a float
#: argument can reach (e.g. 1/sqrt(ln) decay)
_LIMIT_PROBES = (1e-150, 1e150)
_TREND_PROBES_LO = (1e-50, 1e-150, 1e-290)
_TREND_PROBES_HI = (1e50, 1e150, 1e290)
_LIMIT_LO, _LIMIT_HI = 1e-2, 1e2


@dataclass(frozen=True)
class ReiterationSpec:
    """Parameters of one reiteration identity.

    ``side`` 0 composes two lower-limiting spaces through the tail quotient
    rho; side 1 composes two upper-limiting spaces through the head quotient
    eta.  Requires 0 < theta < 1 and finite positive q's.
    """

    side: int
    theta: float
    q: float
    b: WeightExpr
    q0: float
    b0: WeightExpr
    q1: float
    b1: WeightExpr

    def __post_init__(self) -> None:
        if self.side not in (0, 1):
            raise ValueError("side must be 0 or 1")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        for name, qv in (("q", self.q), ("q0", self.q0), ("q1", self.q1)):
            if not (0.0 < qv < _INF):
                raise ValueError(
                    f"reiteration requires finite {name} (q = inf is outside "
                    "the supported hypotheses)")
        for j, (qj, bj) in enumerate(((self.q0, self.b0), (self.q1, self.b1))):
            rep = classify(bj, qj)
            ok = rep.in_SV0q if self.side == 0 else rep.in_SV1q
            if not ok:
                raise ValueError(f"b{j} is not in the required integrability "
                                 f"class for side {self.side}")

    def index_kind(self) -> str:
        return "rho" if self.side == 0 else "eta"

    def index_value(self, t: float) -> Optional[float]:
        return index(t, self.index_kind(), self.q0, self.b0,
                     self.q1, self.b1).value

    def inner_case(self) -> HolmstedtCase:
        kind = "limiting00" if self.side == 0 else "limiting11"
        return HolmstedtCase(kind, self.q0, self.q1, self.b0, self.b1)

    def flipped(self) -> "ReiterationSpec":
        """The mirror spec under t -> 1/t (theta -> 1-theta, weights flipped)."""
        return ReiterationSpec(side=1 - self.side, theta=1.0 - self.theta,
                               q=self.q, b=self.b, q0=self.q0,
                               b0=Flip(self.b0), q1=self.q1, b1=Flip(self.b1))

    def _trends_to_zero(self) -> bool:
        """Sub-threshold fallback for indices decaying slower than any
        magnitude a float argument can reach (1/sqrt(ln) and the like): the
        log-log slope in L = 1 + |ln t| across the extreme representable
        probes must be decisively negative and the value already small."""
        vals = [self.index_value(t) for t in _TREND_PROBES_LO]
        if any(v is None or not (0.0 < v < _INF) for v in vals):
            return False
        v50, v150, v290 = vals
        if not v290 < v150 < v50 or v290 > 0.75:
            return False
        span = math.log(1.0 - math.log(_TREND_PROBES_LO[2])) \
            - math.log(1.0 - math.log(_TREND_PROBES_LO[0]))
        return math.log(v50 / v290) / span >= 0.1

    def _trends_to_inf(self) -> bool:
        vals = [self.index_value(t) for t in _TREND_PROBES_HI]
        if any(v is None or not (0.0 < v < _INF) for v in vals):
            return False
        v50, v150, v290 = vals
        if not v50 < v150 < v290 or v290 < 1.5:
            return False
        span = math.log(1.0 + math.log(_TREND_PROBES_HI[2])) \
            - math.log(1.0 + math.log(_TREND_PROBES_HI[0]))
        return math.log(v290 / v50) / span >= 0.1

    def verify_hypotheses(self, grid: GridSpec = STANDARD_GRID) -> list[str]:
        notes: list[str] = []
        kind = self.index_kind()
        vals = [self.index_value(float(t)) for t in grid.points()]
        if any(v is None or not (0.0 < v < _INF) for v in vals):
            raise HypothesisError(f"{kind} positive and finite on the grid")
        c = quasi_monotone_constant(np.array(vals), grid.points())
        if c > MONOTONE_THRESHOLD:
            raise HypothesisError(f"{kind} increasing",
                                  f"quasi-monotone constant {c:.3g}")
        notes.append(f"{kind} quasi-nondecreasing (constant {c:.3g})")
        lo = self.index_value(_LIMIT_PROBES[0])
        hi = self.index_value(_LIMIT_PROBES[1])
        if lo is None or not (lo <= _LIMIT_LO or self._trends_to_zero()):
            raise HypothesisError(f"{kind} -> 0 toward 0+",
                                  f"value {lo!r} at probe {_LIMIT_PROBES[0]:g}")
        if hi is None or not (hi >= _LIMIT_HI or self._trends_to_inf()):
            raise HypothesisError(f"{kind} -> inf toward inf",
                                  f"value {hi!r} at probe {_LIMIT_PROBES[1]:g}")
        notes.append(f"{kind} limit probes {lo:.3g} / {hi:.3g}")
        if self.q0 != self.q1:
            rep = check_condition_monotone_index(
                f"{kind}_eps", self.q0, self.b0, self.q1, self.b1, grid=grid)
            if not rep.passed:
                raise HypothesisError(f"{kind}_eps equivalent to a "
                                      "nondecreasing function",
                                      f"best constant {rep.best_constant:.3g}")
            notes.append(f"{kind}_eps passes at eps={rep.best_eps:g}")
        else:
            rep = log_derivative_check(self)
            if not rep.passed:
                raise HypothesisError("log-derivative equivalence",
                                      f"band [{rep.band_lo:.3g}, {rep.band_hi:.3g}]")
            notes.append(f"log-derivative band [{rep.band_lo:.3g}, "
                         f"{rep.band_hi:.3g}]")
        return notes


# ---------------------------------------------------------------------------
# Composite weights
# ---------------------------------------------------------------------------

class CompositeWeight:
    """Evaluable reiteration weight; not itself a grammar expression."""

    def __init__(self, spec: ReiterationSpec):
        self.spec = spec

    def _index(self, t: float) -> float:
        val = self.spec.index_value(t)
        if val is None or not (0.0 < val < _INF):
            raise ValueError(f"index degenerate at t={t!r}")
        return val

    def _b1_block(self, t: float) -> float:
        s = self.spec
        if s.side == 0:
            block = weight_kernel_integral(s.b1, s.q1, 0.0, t, _INF)
        else:
            block = weight_kernel_integral(s.b1, s.q1, 0.0, 0.0, t)
        if block == _INF:
            raise ValueError("divergent defining integral of the b1 block")
        return s.b1(t) ** (s.q1 / s.q) * block ** (1.0 / s.q1 - 1.0 / s.q)

    def __call__(self, t) -> float:
        if isinstance(t, np.ndarray):
            return np.array([self(float(u)) for u in t])
        t = float(t)
        s = self.spec
        idx = self._index(t)
        expo = (1.0 - s.theta) if s.side == 0 else s.theta
        return idx ** expo * s.b(idx) * self._b1_block(t)

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        return [1.0] if lo < 1.0 < hi else []


def build_tilde_b(spec: ReiterationSpec) -> CompositeWeight:
    """Composite weight of the lower-limiting reiteration (side 0)."""
    if spec.side != 0:
        raise ValueError("build_tilde_b needs a side-0 spec")
    return CompositeWeight(spec)


def build_hat_b(spec: ReiterationSpec) -> CompositeWeight:
    """Composite weight of the upper-limiting reiteration (side 1)."""
    if spec.side != 1:
        raise ValueError("build_hat_b needs a side-1 spec")
    return CompositeWeight(spec)


# ---------------------------------------------------------------------------
# Log-derivative condition (equal exponents branch)
# ---------------------------------------------------------------------------

_LOG_STEP = 1e-3


def _dlog_index(spec: ReiterationSpec, t: float) -> float:
    """d ln(index)/d ln t by central differences."""
    up = spec.index_value(t * math.exp(_LOG_STEP))
    dn = spec.index_value(t * math.exp(-_LOG_STEP))
    if up is None or dn is None or up <= 0.0 or dn <= 0.0:
        return math.nan
    return (math.log(up) - math.log(dn)) / (2.0 * _LOG_STEP)


@dataclass
class LogDerivativeReport:
    band_lo: float
    band_hi: float
    passed: bool
    rows: list[tuple[float, float]] = field(default_factory=list)


def log_derivative_check(spec: ReiterationSpec,
                         grid: GridSpec = GridSpec(1e-6, 1e6, 8),
                         band_limits: tuple[float, float] = (1e-2, 1e2)
                         ) -> LogDerivativeReport:
    """Band of (index'/index) / (t^-1 b1^q1 / b1-block integral) on the grid.

    The two sides agree up to constants exactly when the equal-exponent
    reiteration hypothesis holds; the default acceptance band is generous.
    """
    s = spec
    rows: list[tuple[float, float]] = []
    lo_band, hi_band = _INF, 0.0
    for t in grid.points():
        t = float(t)
        num = _dlog_index(spec, t)  # = t * index'/index
        if s.side == 0:
            block = weight_kernel_integral(s.b1, s.q1, 0.0, t, _INF)
        else:
            block = weight_kernel_integral(s.b1, s.q1, 0.0, 0.0, t)
        den = s.b1(t) ** s.q1 / block if block not in (0.0, _INF) else math.nan
        ratio = num / den if den and not math.isnan(num) else math.nan
        rows.append((t, ratio))
        if not math.isnan(ratio):
            lo_band = min(lo_band, ratio)
            hi_band = max(hi_band, ratio)
    passed = (math.isfinite(lo_band) and lo_band > band_limits[0]
              and hi_band < band_limits[1])
    return LogDerivativeReport(lo_band, hi_band, passed, rows)


# ---------------------------------------------------------------------------
# Reiteration identity check
# ---------------------------------------------------------------------------

@dataclass
class ReiterationReport:
    spec_label: str
    rows: list[tuple[str, float, float, float]]  # (profile, lhs, rhs, ratio)
    skipped: int
    notes: list[str]

    @property
    def variation(self) -> float:
        ratios = [r[3] for r in self.rows]
        return max(ratios) / min(ratios) if ratios else _INF


def _composite_norm(spec: ReiterationSpec, f: KProfile,
                    grid: GridSpec = GridSpec(1e-12, 1e12, 12)) -> float:
    """Outer quasi-norm of the iterated space via the s = index(t) substitution."""
    case = spec.inner_case()
    xs = np.log(grid.points())
    vals = []
    for x in xs:
        t = math.exp(float(x))
        idx = spec.index_value(t)
        if idx is None or not (0.0 < idx < _INF):
            vals.append(0.0)
            continue
        ell = _dlog_index(spec, t)  # measure factor d ln(index)
        if math.isnan(ell) or ell <= 0.0:
            vals.append(0.0)
            continue
        surrogate = rhs_formula(case, f, t)
        if not (0.0 <= surrogate < _INF):
            return _INF
        expo = -spec.theta
        vals.append((idx ** expo * spec.b(idx) * surrogate) ** spec.q * ell)
    h = xs[1] - xs[0]
    total = float(np.sum(vals)) * h - 0.5 * h * (vals[0] + vals[-1])
    return total ** (1.0 / spec.q)


def reiteration_check(spec: ReiterationSpec,
                      profiles: Sequence[Rearrangement],
                      grid: GridSpec = GridSpec(1e-12, 1e12, 12)
                      ) -> ReiterationReport:
    """Compare the iterated-space norm against the composite-weight norm."""
    notes = spec.verify_hypotheses()
    composite = CompositeWeight(spec)
    theta_side = 0.0 if spec.side == 0 else 1.0
    rows: list[tuple[str, float, float, float]] = []
    skipped = 0
    for f in profiles:
        K = K_from_rearrangement(f)
        lhs = _composite_norm(spec, K, grid)
        res = weighted_knorm(K.curve, theta_side, spec.q, composite)
        rhs = res.value ** (1.0 / spec.q) if not res.divergent else _INF
        if 0.0 < lhs < _INF and 0.0 < rhs < _INF:
            rows.append((f.label, lhs, rhs, lhs / rhs))
        else:
            skipped += 1
    return ReiterationReport(spec_label=f"side={spec.side}, theta={spec.theta:g}",
                             rows=rows, skipped=skipped, notes=notes)


# ---------------------------------------------------------------------------
# Lorentz-Karamata norms and the limiting identification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LKSpec:
    p: float
    q: float
    b: WeightExpr

    def __post_init__(self) -> None:
        if not (0.0 < self.p <= _INF and 0.0 < self.q <= _INF):
            raise ValueError("p and q must be positive (inf allowed)")


def lorentz_karamata_norm(f: Rearrangement, spec: LKSpec) -> float:
    """||t^{1/p-1/q} b(t) f*(t)||_{q,(0,inf)}."""
    theta = 0.0 if spec.p == _INF else -1.0 / spec.p
    if f.curve.is_zero():
        return 0.0
    if spec.q == _INF:
        return _weighted_ksup(f.curve, theta, spec.b, 0.0, _INF)
    res = weighted_knorm(f.curve, theta, spec.q, spec.b)
    return res.value ** (1.0 / spec.q) if not res.divergent else _INF


@dataclass
class LKIdentificationReport:
    rows: list[tuple[str, float, float, float]]  # (label, lk, interp, ratio)
    skipped: int

    @property
    def ratio_min(self) -> float:
        return min((r[3] for r in self.rows), default=_INF)

    @property
    def ratio_max(self) -> float:
        return max((r[3] for r in self.rows), default=0.0)

    @property
    def variation(self) -> float:
        return self.ratio_max / self.ratio_min if self.rows else _INF


def lk_identification_check(suite: Sequence[Rearrangement], q: float, b: WeightExpr
                  ) -> LKIdentificationReport:
    """Ratios of the limiting interpolation norm over the L_{inf,q;b} norm.

    The interpolation side uses K(t,f) = int_0^t f*; since K(t,f) >= t f*(t)
    the ratio is bounded below by 1 up to quadrature error.
    """
    if not classify(b, q).in_SV1q:
        raise ValueError("the identification needs the head class of b")
    lk_spec = LKSpec(_INF, q, b)
    space = SpaceSpec(1.0, q, b)
    rows: list[tuple[str, float, float, float]] = []
    skipped = 0
    for f in suite:
        lk = lorentz_karamata_norm(f, lk_spec)
        interp = space_norm(K_from_rearrangement(f), space)
        if 0.0 < lk < _INF and 0.0 < interp < _INF:
            rows.append((f.label, lk, interp, interp / lk))
        else:
            skipped += 1
    return LKIdentificationReport(rows=rows, skipped=skipped)
