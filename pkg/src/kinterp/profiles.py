"""Quasi-concave K-profiles and nonincreasing rearrangements on (0, inf).

Both kinds of object are piecewise sums of atoms  c * t^p * L(t)^beta  with
L(t) = 1 - ln t on (0,1] and 1 + ln t on [1,inf); a breakpoint at t = 1 is
inserted whenever a log factor is present.  The family is closed under the
operations the rest of the package needs: scaling, sums, differentiation,
truncation at a level, the conjugate transform K(t) -> t K(1/t), and (for the
combinations that admit one) exact antiderivatives.  Rearrangements remember
the exact integral curve of their K-functional whenever it is known, so the
round trip rearrangement <-> profile is exact rather than quadrature-based.

Profile literals accepted by :func:`parse_profile`:

    min1 | power(theta) | powerlog(theta,a0,aInf) | piecewise[(t,k),...]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .quadrature import GridSpec

__all__ = [
    "Atom",
    "PiecewiseCurve",
    "CurveClosureError",
    "KProfile",
    "Rearrangement",
    "QuasiConcavityReport",
    "parse_profile",
    "profile_eval",
    "check_quasiconcave",
    "K_from_rearrangement",
    "realize_rearrangement",
    "truncation_split",
    "conjugate_profile",
    "profile_suite",
    "random_rearrangement",
]

_INF = math.inf


class CurveClosureError(ValueError):
    """The requested operation leaves the closed piecewise power-log family."""


# ---------------------------------------------------------------------------
# Atoms and curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    coef: float
    power: float
    logexp: float = 0.0

    def scaled(self, c: float) -> "Atom":
        return Atom(self.coef * c, self.power, self.logexp)


def _atom_eval(atom: Atom, t: float) -> float:
    val = atom.coef * t ** atom.power
    if atom.logexp != 0.0:
        L = 1.0 - math.log(t) if t <= 1.0 else 1.0 + math.log(t)
        val *= L ** atom.logexp
    return val


def _merge_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    acc: dict[tuple[float, float], float] = {}
    for a in atoms:
        key = (a.power, a.logexp)
        acc[key] = acc.get(key, 0.0) + a.coef
    merged = [Atom(c, p, b) for (p, b), c in acc.items() if c != 0.0]
    merged.sort(key=lambda a: (a.power, a.logexp))
    return tuple(merged)


class PiecewiseCurve:
    """Finite atom sums between breakpoints 0 < b_1 < ... < b_m < inf."""

    __slots__ = ("breaks", "pieces")

    def __init__(self, breaks: Sequence[float], pieces: Sequence[Sequence[Atom]]):
        breaks = [float(b) for b in breaks]
        if any(b <= 0.0 or not math.isfinite(b) for b in breaks):
            raise ValueError("breakpoints must be positive and finite")
        if sorted(breaks) != breaks:
            raise ValueError("breakpoints must be ascending")
        if len(pieces) != len(breaks) + 1:
            raise ValueError("need exactly len(breaks)+1 pieces")
        pieces = [_merge_atoms(p) for p in pieces]
        # log atoms must not straddle t = 1
        if any(a.logexp != 0.0 for p in pieces for a in p) and 1.0 not in breaks:
            lo = [i for i, b in enumerate(breaks) if b < 1.0]
            idx = (lo[-1] + 1) if lo else 0
            breaks.insert(idx, 1.0)
            pieces.insert(idx, pieces[idx])
        self.breaks = tuple(breaks)
        self.pieces = tuple(pieces)

    # -- basics ------------------------------------------------------------

    @staticmethod
    def zero() -> "PiecewiseCurve":
        return PiecewiseCurve((), ((),))

    @staticmethod
    def constant(c: float) -> "PiecewiseCurve":
        return PiecewiseCurve((), ((Atom(c, 0.0),),))

    def is_zero(self) -> bool:
        return all(not p for p in self.pieces)

    def piece_index(self, t: float) -> int:
        i = 0
        while i < len(self.breaks) and t > self.breaks[i]:
            i += 1
        return i

    def __call__(self, t) -> float:
        if isinstance(t, np.ndarray):
            return np.array([self(float(u)) for u in t])
        t = float(t)
        if not (t > 0.0):
            raise ValueError("curves are defined on (0, inf)")
        piece = self.pieces[self.piece_index(t)]
        return math.fsum(_atom_eval(a, t) for a in piece) if piece else 0.0

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        pts = [b for b in self.breaks if lo < b < hi]
        if lo < 1.0 < hi and 1.0 not in pts:
            pts.append(1.0)
        return sorted(pts)

    # -- algebra -----------------------------------------------------------

    def scale(self, c: float) -> "PiecewiseCurve":
        if c == 0.0:
            return PiecewiseCurve.zero()
        return PiecewiseCurve(self.breaks,
                              [tuple(a.scaled(c) for a in p) for p in self.pieces])

    def _aligned(self, other: "PiecewiseCurve") -> tuple[tuple[float, ...],
                                                         list, list]:
        breaks = sorted(set(self.breaks) | set(other.breaks))
        mine, theirs = [], []
        for i in range(len(breaks) + 1):
            t_ref = _segment_probe(breaks, i)
            mine.append(self.pieces[self.piece_index(t_ref)])
            theirs.append(other.pieces[other.piece_index(t_ref)])
        return tuple(breaks), mine, theirs

    def __add__(self, other: "PiecewiseCurve") -> "PiecewiseCurve":
        breaks, mine, theirs = self._aligned(other)
        return PiecewiseCurve(breaks, [tuple(a) + tuple(b) for a, b in zip(mine, theirs)])

    def __sub__(self, other: "PiecewiseCurve") -> "PiecewiseCurve":
        return self + other.scale(-1.0)

    # -- calculus ----------------------------------------------------------

    def derivative(self) -> "PiecewiseCurve":
        new_pieces = []
        for i, piece in enumerate(self.pieces):
            on_lo_side = _segment_probe(self.breaks, i) < 1.0
            atoms: list[Atom] = []
            for a in piece:
                atoms.append(Atom(a.coef * a.power, a.power - 1.0, a.logexp))
                if a.logexp != 0.0:
                    sgn = -1.0 if on_lo_side else 1.0
                    atoms.append(Atom(sgn * a.coef * a.logexp, a.power - 1.0,
                                      a.logexp - 1.0))
            new_pieces.append(tuple(atoms))
        return PiecewiseCurve(self.breaks, new_pieces)

    def _piece_antiderivative(self, piece: Sequence[Atom], on_lo_side: bool
                              ) -> tuple[Atom, ...]:
        atoms: list[Atom] = []
        for a in piece:
            if a.logexp == 0.0:
                if a.power == -1.0:
                    # int c/u du = c ln u = +-c (L - 1)
                    sgn = -1.0 if on_lo_side else 1.0
                    atoms.append(Atom(sgn * a.coef, 0.0, 1.0))
                    atoms.append(Atom(-sgn * a.coef, 0.0, 0.0))
                else:
                    atoms.append(Atom(a.coef / (a.power + 1.0), a.power + 1.0))
            elif a.power == -1.0:
                if a.logexp == -1.0:
                    raise CurveClosureError(
                        "antiderivative of u^-1 L^-1 is a log-log, not an atom")
                sgn = -1.0 if on_lo_side else 1.0
                atoms.append(Atom(sgn * a.coef / (a.logexp + 1.0), 0.0,
                                  a.logexp + 1.0))
            else:
                raise CurveClosureError(
                    "atoms mixing a power and a log factor have no atomic "
                    "antiderivative")
        return tuple(atoms)

    def antiderivative(self) -> "PiecewiseCurve":
        """F with F(t) = int_0^t curve, requiring closed-form pieces.

        Raises :class:`CurveClosureError` when a piece leaves the family and
        ValueError when the curve is not integrable at 0.
        """
        first = self.pieces[0]
        for a in first:
            ok = a.power > -1.0 and a.logexp == 0.0
            ok = ok or (a.power == -1.0 and a.logexp < -1.0)
            if not ok:
                if a.power < -1.0 or (a.power == -1.0 and a.logexp >= -1.0):
                    raise ValueError("curve is not integrable at 0")
                raise CurveClosureError(
                    "leading piece has no atomic antiderivative vanishing at 0")
        new_pieces = []
        for i, piece in enumerate(self.pieces):
            on_lo = _segment_probe(self.breaks, i) < 1.0
            F = self._piece_antiderivative(piece, on_lo)
            if i == 0:
                new_pieces.append(F)
            else:
                b = self.breaks[i - 1]
                left_val = math.fsum(_atom_eval(a, b) for a in new_pieces[-1]) \
                    if new_pieces[-1] else 0.0
                here_val = math.fsum(_atom_eval(a, b) for a in F) if F else 0.0
                shift = left_val - here_val
                new_pieces.append(F + ((Atom(shift, 0.0),) if shift != 0.0 else ()))
        return PiecewiseCurve(self.breaks, new_pieces)

    # -- support helpers ----------------------------------------------------

    def split_at(self, t: float) -> "PiecewiseCurve":
        """Same curve with an explicit breakpoint at t."""
        if t in self.breaks or t <= 0.0 or not math.isfinite(t):
            return self
        i = self.piece_index(t)
        breaks = list(self.breaks)
        pieces = list(self.pieces)
        breaks.insert(i, t)
        pieces.insert(i, pieces[i])
        return PiecewiseCurve(breaks, pieces)

    def grid_values(self, grid: GridSpec = GridSpec(1e-8, 1e8, 16)) -> np.ndarray:
        return np.array([self(float(t)) for t in grid.points()])


def _segment_probe(breaks: Sequence[float], i: int) -> float:
    """A point strictly inside segment i of the given breakpoints."""
    if not breaks:
        return 1.0
    if i == 0:
        return breaks[0] / 2.0
    if i == len(breaks):
        return breaks[-1] * 2.0
    return math.sqrt(breaks[i - 1] * breaks[i])


# ---------------------------------------------------------------------------
# K-profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuasiConcavityReport:
    ok: bool
    violation: Optional[str] = None
    location: Optional[float] = None


class KProfile:
    """Quasi-concave profile t -> K(t): nondecreasing with K(t)/t nonincreasing."""

    __slots__ = ("curve", "label")

    def __init__(self, curve: PiecewiseCurve, label: str = "profile"):
        self.curve = curve
        self.label = label

    def __call__(self, t) -> float:
        return self.curve(t)

    def __repr__(self) -> str:
        return f"KProfile({self.label!r})"

    def scale(self, c: float) -> "KProfile":
        if c < 0.0:
            raise ValueError("profiles scale by positive constants")
        return KProfile(self.curve.scale(c), f"{c}*{self.label}")

    # constructors ----------------------------------------------------------

    @staticmethod
    def zero() -> "KProfile":
        return KProfile(PiecewiseCurve.zero(), "0")

    @staticmethod
    def min1() -> "KProfile":
        curve = PiecewiseCurve((1.0,), ((Atom(1.0, 1.0),), (Atom(1.0, 0.0),)))
        return KProfile(curve, "min1")

    @staticmethod
    def power(theta: float, coef: float = 1.0) -> "KProfile":
        if not 0.0 <= theta <= 1.0:
            raise ValueError("power profile exponent must lie in [0, 1]")
        return KProfile(PiecewiseCurve((), ((Atom(coef, theta),),)),
                        f"power({theta})")

    @staticmethod
    def powerlog(theta: float, a0: float, a_inf: float) -> "KProfile":
        curve = PiecewiseCurve((1.0,), ((Atom(1.0, theta, a0),),
                                        (Atom(1.0, theta, a_inf),)))
        return KProfile(curve, f"powerlog({theta},{a0},{a_inf})")

    @staticmethod
    def from_nodes(pairs: Sequence[tuple[float, float]]) -> "KProfile":
        """Piecewise-affine profile through (t_i, k_i); linear left tail through
        the origin, constant right tail."""
        pts = sorted((float(t), float(k)) for t, k in pairs)
        if not pts or any(t <= 0.0 or k <= 0.0 for t, k in pts):
            raise ValueError("nodes must be positive")
        breaks = [t for t, _ in pts]
        pieces: list[tuple[Atom, ...]] = [(Atom(pts[0][1] / pts[0][0], 1.0),)]
        for (t0, k0), (t1, k1) in zip(pts[:-1], pts[1:]):
            slope = (k1 - k0) / (t1 - t0)
            pieces.append(_merge_atoms((Atom(k0 - slope * t0, 0.0),
                                        Atom(slope, 1.0))))
        pieces.append((Atom(pts[-1][1], 0.0),))
        return KProfile(PiecewiseCurve(breaks, pieces),
                        "piecewise[" + ",".join(f"({t:g},{k:g})" for t, k in pts) + "]")

    @staticmethod
    def from_node_powers(t_nodes: Sequence[float], k_first: float,
                         exponents: Sequence[float],
                         left_exp: float = 1.0, right_exp: float = 0.0
                         ) -> "KProfile":
        """Pure power segments k_i (t/t_i)^theta_i with continuity at nodes."""
        ts = [float(t) for t in t_nodes]
        if sorted(ts) != ts or len(exponents) != len(ts) - 1:
            raise ValueError("need ascending nodes and one exponent per gap")
        ks = [float(k_first)]
        for (t0, t1), th in zip(zip(ts[:-1], ts[1:]), exponents):
            ks.append(ks[-1] * (t1 / t0) ** th)
        breaks = list(ts)
        pieces = [(Atom(ks[0] / ts[0] ** left_exp, left_exp),)]
        for (t0, k0), th in zip(zip(ts[:-1], ks[:-1]), exponents):
            pieces.append((Atom(k0 / t0 ** th, th),))
        pieces.append((Atom(ks[-1] / ts[-1] ** right_exp, right_exp),))
        return KProfile(PiecewiseCurve(breaks, pieces), "node-powers")


def profile_eval(k: KProfile, t: float) -> float:
    return k(t)


def check_quasiconcave(k: KProfile, grid: GridSpec = GridSpec(1e-8, 1e8, 8)
                       ) -> QuasiConcavityReport:
    """Verify K nondecreasing and K(t)/t nonincreasing at nodes and samples."""
    curve = k.curve
    if curve.is_zero():
        return QuasiConcavityReport(True)
    try:
        deriv = curve.derivative()
    except Exception:  # pragma: no cover - derivative is total on atoms
        deriv = None
    samples: list[float] = list(grid.points())
    for i in range(len(curve.breaks) + 1):
        samples.append(_segment_probe(curve.breaks, i))
    samples.extend(b * (1.0 - 1e-9) for b in curve.breaks)
    samples.extend(b * (1.0 + 1e-9) for b in curve.breaks)
    samples = sorted(set(s for s in samples if s > 0.0))
    tol = 1e-12
    prev_t, prev_v = None, None
    for t in samples:
        v = curve(t)
        if v < -tol:
            return QuasiConcavityReport(False, "negative value", t)
        if deriv is not None:
            d = deriv(t)
            scale = max(abs(v), abs(d) * t, 1e-300)
            if d * t < -tol * scale:
                return QuasiConcavityReport(False, "decreasing segment", t)
            if d * t - v > tol * scale:
                return QuasiConcavityReport(False, "K(t)/t increasing", t)
        if prev_v is not None:
            scale = max(prev_v, v, 1e-300)
            if v < prev_v * (1.0 - 1e-12):
                return QuasiConcavityReport(False, "decreasing across nodes", t)
            if v / t > (prev_v / prev_t) * (1.0 + 1e-12):
                return QuasiConcavityReport(False, "K(t)/t increasing across nodes", t)
        prev_t, prev_v = t, v
    return QuasiConcavityReport(True)


# ---------------------------------------------------------------------------
# Rearrangements
# ---------------------------------------------------------------------------

class Rearrangement:
    """Nonincreasing nonnegative representative f* on (0, inf).

    ``integral_curve`` caches the exact curve of t -> int_0^t f*(u) du when it
    is known by construction.
    """

    __slots__ = ("curve", "integral_curve", "label")

    def __init__(self, curve: PiecewiseCurve,
                 integral_curve: Optional[PiecewiseCurve] = None,
                 label: str = "f*", validate: bool = True):
        self.curve = curve
        self.integral_curve = integral_curve
        self.label = label
        if validate:
            self._validate()

    def _validate(self) -> None:
        pts: list[float] = []
        for i in range(len(self.curve.breaks) + 1):
            pts.append(_segment_probe(self.curve.breaks, i))
        for b in self.curve.breaks:
            pts.extend((b * (1.0 - 1e-9), b * (1.0 + 1e-9)))
        pts.extend((1e-9, 1e-4, 1e4, 1e9))
        prev = None
        for t in sorted(set(pts)):
            v = self.curve(t)
            if v < -1e-12:
                raise ValueError(f"rearrangement negative at t={t!r}")
            if prev is not None and v > prev * (1.0 + 1e-9) + 1e-300:
                raise ValueError(f"rearrangement increases at t={t!r}")
            prev = v

    def __call__(self, t) -> float:
        return self.curve(t)

    def __repr__(self) -> str:
        return f"Rearrangement({self.label!r})"

    def scale(self, c: float) -> "Rearrangement":
        if c < 0.0:
            raise ValueError("rearrangements scale by positive constants")
        integral = self.integral_curve.scale(c) if self.integral_curve else None
        return Rearrangement(self.curve.scale(c), integral,
                             f"{c}*{self.label}", validate=False)

    def node_values(self) -> list[float]:
        """Distinct positive values of f* at segment probes and break limits."""
        vals = set()
        for i in range(len(self.curve.breaks) + 1):
            vals.add(self.curve(_segment_probe(self.curve.breaks, i)))
        for b in self.curve.breaks:
            vals.add(self.curve(b * (1.0 - 1e-12)))
            vals.add(self.curve(b * (1.0 + 1e-12)))
        vals.add(self.curve(1e-10))
        vals.add(self.curve(1e10))
        return sorted(v for v in vals if v > 0.0 and math.isfinite(v))

    # constructors ----------------------------------------------------------

    @staticmethod
    def zero() -> "Rearrangement":
        return Rearrangement(PiecewiseCurve.zero(), PiecewiseCurve.zero(), "0",
                             validate=False)

    @staticmethod
    def indicator(T: float = 1.0, height: float = 1.0) -> "Rearrangement":
        curve = PiecewiseCurve((T,), ((Atom(height, 0.0),), ()))
        integral = PiecewiseCurve((T,), ((Atom(height, 1.0),),
                                         (Atom(height * T, 0.0),)))
        return Rearrangement(curve, integral, f"{height}*chi(0,{T})", validate=False)

    @staticmethod
    def staircase(breaks: Sequence[float], values: Sequence[float],
                  tail: float = 0.0) -> "Rearrangement":
        """Right-open staircase: values[i] on (breaks[i-1], breaks[i]], ``tail``
        beyond the last break."""
        if len(values) != len(breaks):
            raise ValueError("need one value per break")
        pieces = [((Atom(v, 0.0),) if v != 0.0 else ()) for v in values]
        pieces.append((Atom(tail, 0.0),) if tail != 0.0 else ())
        curve = PiecewiseCurve(breaks, pieces)
        return Rearrangement(curve, curve.antiderivative(), "staircase")

    @staticmethod
    def power(gamma: float, coef: float = 1.0, support: float = _INF
              ) -> "Rearrangement":
        """f*(u) = coef * u^-gamma (0 <= gamma < 1), optionally cut at
        ``support``."""
        if not 0.0 <= gamma < 1.0:
            raise ValueError("power rearrangements need 0 <= gamma < 1")
        if support == _INF:
            curve = PiecewiseCurve((), ((Atom(coef, -gamma),),))
        else:
            curve = PiecewiseCurve((support,), ((Atom(coef, -gamma),), ()))
        return Rearrangement(curve, curve.antiderivative(),
                             f"{coef}*u^-{gamma}")


def K_from_rearrangement(f: Rearrangement) -> KProfile:
    """K(t) = int_0^t f*(u) du as an exact profile."""
    if f.curve.is_zero():
        return KProfile.zero()
    if f.integral_curve is not None:
        return KProfile(f.integral_curve, f"K[{f.label}]")
    return KProfile(f.curve.antiderivative(), f"K[{f.label}]")


def realize_rearrangement(phi: KProfile) -> Rearrangement:
    """A rearrangement whose (L1, Linf) K-functional reproduces the profile.

    Concave profiles differentiate exactly; quasi-concave but non-concave
    input goes through the least concave majorant (upper hull of the nodes in
    linear coordinates, which is exact for piecewise-affine profiles), so the
    output K-functional stays within the documented [1/2, 2] band.
    """
    report = check_quasiconcave(phi)
    if not report.ok:
        raise ValueError(f"profile is not quasi-concave: {report.violation} "
                         f"near t={report.location!r}")
    if phi.curve.is_zero():
        return Rearrangement.zero()
    deriv = phi.curve.derivative()
    if _vanishes_at_zero(phi.curve) and _is_nonincreasing(deriv):
        return Rearrangement(deriv, phi.curve, f"d[{phi.label}]", validate=False)
    return _hull_realization(phi)


def _vanishes_at_zero(curve: PiecewiseCurve) -> bool:
    on_lo = _segment_probe(curve.breaks, 0) < 1.0
    for a in curve.pieces[0]:
        if a.power < 0.0:
            return False
        if a.power == 0.0 and not (on_lo and a.logexp < 0.0):
            return False
    return True


def _is_nonincreasing(curve: PiecewiseCurve, rel_tol: float = 1e-9) -> bool:
    pts: list[float] = []
    for i in range(len(curve.breaks) + 1):
        pts.append(_segment_probe(curve.breaks, i))
    for b in curve.breaks:
        pts.extend((b * (1.0 - 1e-9), b * (1.0 + 1e-9)))
    pts.extend(np.logspace(-9, 9, 37))
    prev = None
    for t in sorted(set(pts)):
        v = curve(t)
        if v < -1e-12:
            return False
        if prev is not None and v > prev * (1.0 + rel_tol) + 1e-300:
            return False
        prev = v
    return True


def _hull_realization(phi: KProfile) -> Rearrangement:
    curve = phi.curve
    ts: list[float] = list(curve.breaks)
    if not ts:
        ts = [1.0]
    lo = min(ts) * 1e-4
    hi = max(ts) * 1e4
    ts = sorted(set(ts) | set(np.logspace(math.log10(lo), math.log10(hi), 129)))
    pts = [(0.0, 0.0)] + [(t, curve(t)) for t in ts]
    hull: list[tuple[float, float]] = []
    for p in pts:  # upper hull, slopes strictly decreasing
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x2) <= (p[1] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    breaks = [x for x, _ in hull[1:]]
    values: list[float] = []
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        values.append(max((y2 - y1) / (x2 - x1), 0.0))
    f_curve = PiecewiseCurve(breaks, [((Atom(v, 0.0),) if v > 0.0 else ())
                                      for v in values] + [()])
    return Rearrangement(f_curve, f_curve.antiderivative(),
                         f"hull[{phi.label}]", validate=False)


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------

def _crossing_point(f: Rearrangement, lam: float) -> float:
    """Largest t with f*(t) >= lam (0 when f* < lam everywhere, inf when
    f* >= lam everywhere)."""
    curve = f.curve
    probes = [1e-12] + list(curve.breaks) + [max(list(curve.breaks) or [1.0]) * 1e12]
    prev_t = probes[0]
    if curve(prev_t) < lam:
        return 0.0
    for t in probes[1:]:
        v = curve(t * (1.0 - 1e-15))
        v_right = curve(t * (1.0 + 1e-15)) if t < probes[-1] else v
        if v >= lam and v_right < lam:
            return t
        if v < lam:
            lo_t, hi_t = prev_t, t
            break
        prev_t = t
    else:
        return _INF
    # single pure-power atom pieces solve exactly
    piece = curve.pieces[curve.piece_index(math.sqrt(lo_t * hi_t))]
    if len(piece) == 1 and piece[0].logexp == 0.0 and piece[0].power != 0.0:
        a = piece[0]
        return (lam / a.coef) ** (1.0 / a.power)
    x_lo, x_hi = math.log(lo_t), math.log(hi_t)
    for _ in range(200):
        m = 0.5 * (x_lo + x_hi)
        if curve(math.exp(m)) >= lam:
            x_lo = m
        else:
            x_hi = m
        if x_hi - x_lo < 1e-15:
            break
    return math.exp(0.5 * (x_lo + x_hi))


def truncation_split(f: Rearrangement, lam: float
                     ) -> tuple[Rearrangement, Rearrangement]:
    """(f0, f1) with f1 = min(f*, lam) and f0 = (f* - lam)_+ , exactly additive."""
    if lam <= 0.0:
        raise ValueError("truncation level must be positive")
    if f.curve.is_zero():
        return Rearrangement.zero(), Rearrangement.zero()
    t_cross = _crossing_point(f, lam)
    K = f.integral_curve if f.integral_curve is not None \
        else f.curve.antiderivative()
    if t_cross == 0.0:
        return Rearrangement.zero(), Rearrangement(f.curve, K, f.label,
                                                   validate=False)
    if t_cross == _INF:
        const = PiecewiseCurve.constant(lam)
        f0c = f.curve - const
        return (Rearrangement(f0c, K - const.antiderivative(), "f0",
                              validate=False),
                Rearrangement(const, const.antiderivative(), "f1",
                              validate=False))
    base = f.curve.split_at(t_cross)
    Kb = K.split_at(t_cross)
    idx = base.breaks.index(t_cross)
    idx_k = Kb.breaks.index(t_cross)

    f1_pieces = [(Atom(lam, 0.0),)] * (idx + 1) + list(base.pieces[idx + 1:])
    f1c = PiecewiseCurve(base.breaks, f1_pieces)
    f0_pieces = [tuple(p) + (Atom(-lam, 0.0),) for p in base.pieces[:idx + 1]] \
        + [()] * (len(base.pieces) - idx - 1)
    f0c = PiecewiseCurve(base.breaks, f0_pieces)

    shift = lam * t_cross - Kb(t_cross)
    K1_pieces = [(Atom(lam, 1.0),)] * (idx_k + 1) \
        + [tuple(p) + ((Atom(shift, 0.0),) if shift != 0.0 else ())
           for p in Kb.pieces[idx_k + 1:]]
    K1 = PiecewiseCurve(Kb.breaks, K1_pieces)
    K0_pieces = [tuple(p) + (Atom(-lam, 1.0),) for p in Kb.pieces[:idx_k + 1]] \
        + [((Atom(-shift, 0.0),) if shift != 0.0 else ())] * (len(Kb.pieces) - idx_k - 1)
    K0 = PiecewiseCurve(Kb.breaks, K0_pieces)
    return (Rearrangement(f0c, K0, "f0", validate=False),
            Rearrangement(f1c, K1, "f1", validate=False))


# ---------------------------------------------------------------------------
# Conjugation  K(t) -> t K(1/t)
# ---------------------------------------------------------------------------

def _conjugate_curve(curve: PiecewiseCurve) -> PiecewiseCurve:
    breaks = tuple(1.0 / b for b in reversed(curve.breaks))
    pieces = [tuple(Atom(a.coef, 1.0 - a.power, a.logexp) for a in p)
              for p in reversed(curve.pieces)]
    return PiecewiseCurve(breaks, pieces)


def conjugate_profile(k: KProfile) -> KProfile:
    """The profile t -> t K(1/t); exact on atoms."""
    return KProfile(_conjugate_curve(k.curve), f"conj[{k.label}]")


def conjugate_realization(f: Rearrangement) -> Rearrangement:
    """Rearrangement realizing the conjugate of f's K-profile, exactly."""
    K = K_from_rearrangement(f)
    return realize_rearrangement(conjugate_profile(K))


# ---------------------------------------------------------------------------
# Profile suites
# ---------------------------------------------------------------------------

def profile_suite() -> list[Rearrangement]:
    """Six deterministic rearrangements with bounded K at infinity."""
    return [
        Rearrangement.indicator(1.0),
        Rearrangement.power(0.5, support=1.0),
        Rearrangement.staircase((0.01, 1.0, 50.0), (4.0, 1.0, 0.25)),
        Rearrangement.staircase((1e-4, 10.0), (10.0, 0.3)),
        Rearrangement.power(0.3, coef=0.7, support=1.0),
        Rearrangement(
            PiecewiseCurve((0.1, 5.0), ((Atom(1.0, -0.5),), (Atom(1.0, 0.0),), ())),
            PiecewiseCurve((0.1, 5.0),
                           ((Atom(2.0, 0.5),),
                            (Atom(2.0 * math.sqrt(0.1) - 0.1, 0.0), Atom(1.0, 1.0)),
                            (Atom(2.0 * math.sqrt(0.1) - 0.1 + 5.0, 0.0),))),
            "mixed"),
    ]


def random_rearrangement(rng: np.random.Generator, max_steps: int = 5,
                         t_span: tuple[float, float] = (1e-4, 1e3),
                         v_span: tuple[float, float] = (1e-3, 1e2),
                         ) -> Rearrangement:
    """Random positive staircase rearrangement with compact support."""
    n = int(rng.integers(1, max_steps + 1))
    lo, hi = (math.log(t_span[0]), math.log(t_span[1]))
    breaks = sorted(math.exp(x) for x in rng.uniform(lo, hi, size=n))
    vlo, vhi = (math.log(v_span[0]), math.log(v_span[1]))
    values = sorted((math.exp(x) for x in rng.uniform(vlo, vhi, size=n)),
                    reverse=True)
    return Rearrangement.staircase(breaks, values)


# ---------------------------------------------------------------------------
# Profile literals
# ---------------------------------------------------------------------------

def parse_profile(text: str) -> KProfile:
    s = text.strip()
    if s == "min1":
        return KProfile.min1()
    if s.startswith("power(") and s.endswith(")"):
        return KProfile.power(float(s[6:-1]))
    if s.startswith("powerlog(") and s.endswith(")"):
        parts = s[9:-1].split(",")
        if len(parts) != 3:
            raise ValueError(f"powerlog needs three parameters: {text!r}")
        return KProfile.powerlog(*(float(p) for p in parts))
    if s.startswith("piecewise[") and s.endswith("]"):
        body = s[len("piecewise["):-1]
        pairs = []
        for chunk in body.replace("(", " ").split(")"):
            chunk = chunk.strip().strip(",").strip()
            if not chunk:
                continue
            t_str, k_str = chunk.split(",")
            pairs.append((float(t_str), float(k_str)))
        if not pairs:
            raise ValueError(f"empty piecewise profile: {text!r}")
        return KProfile.from_nodes(pairs)
    raise ValueError(f"unknown profile literal: {text!r}")
