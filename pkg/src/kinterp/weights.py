"""Slowly varying weight algebra: combinator ASTs, evaluation, q-norms, classes.

The grammar (ASCII, whitespace insignificant) is

    one | log(a0,aInf) | explog(a) | mul(w,w) | pow(w,r) | flip(w)

``log(a0,aInf)`` is the broken logarithm (1-ln t)^a0 on (0,1] and
(1+ln t)^aInf on (1,inf); ``explog(a)`` is exp(|ln t|^a) with 0 < a < 1;
``flip(w)`` evaluates w at 1/t.  Every expression reduces, on each side of
t = 1, to (1+|ln t|)^beta * exp(sum gamma |ln t|^alpha), which is what the
closed-form quadrature consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import GridSpec, LogTerm, STANDARD_GRID, integrate_terms

__all__ = [
    "WeightExpr",
    "One",
    "PowerLog",
    "ExpLog",
    "Product",
    "Power",
    "Flip",
    "SideForm",
    "SVClassReport",
    "WeightSyntaxError",
    "PreconditionError",
    "parse_weight",
    "eval_weight",
    "tail_qnorm",
    "head_qnorm",
    "classify",
    "tilde_construction",
    "sv_quasimonotone_constant",
]

_INF = math.inf


class WeightSyntaxError(ValueError):
    """Weight grammar error with a character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class PreconditionError(ValueError):
    """A documented precondition of an operation was violated."""


# ---------------------------------------------------------------------------
# Side forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SideForm:
    """(1+x)^beta * exp(sum gamma x^alpha) with x = |ln t| on one side of 1."""

    beta: float = 0.0
    gammas: tuple[tuple[float, float], ...] = ()  # sorted (alpha, gamma)

    def scaled(self, r: float) -> "SideForm":
        return SideForm(self.beta * r, tuple((al, g * r) for al, g in self.gammas))

    def combined(self, other: "SideForm") -> "SideForm":
        acc: dict[float, float] = {}
        for al, g in self.gammas + other.gammas:
            acc[al] = acc.get(al, 0.0) + g
        gammas = tuple(sorted((al, g) for al, g in acc.items() if g != 0.0))
        return SideForm(self.beta + other.beta, gammas)

    def value(self, x: float) -> float:
        extra = sum(g * x ** al for al, g in self.gammas)
        return (1.0 + x) ** self.beta * math.exp(extra)

    def log_value(self, x: float) -> float:
        return self.beta * math.log1p(x) + sum(g * x ** al for al, g in self.gammas)


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

class WeightExpr:
    """Base class of weight expressions; positive and finite on (0, inf)."""

    def side(self, side: str) -> SideForm:
        raise NotImplementedError

    def log_terms(self, lo: float, hi: float, q: float) -> list["LogTerm"]:
        """Canonical terms of int_lo^hi b(u)^q du/u (structured-integrand hook)."""
        return _weight_terms(self, q, lo, hi)

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        return [1.0] if lo < 1.0 < hi else []

    def __call__(self, t) -> float:
        if isinstance(t, np.ndarray):
            return np.array([self._value(float(u)) for u in t])
        return self._value(float(t))

    def _value(self, t: float) -> float:
        if not (t > 0.0) or not math.isfinite(t):
            raise ValueError(f"weights are defined on (0, inf), got t={t!r}")
        if t >= 1.0:
            return self.side("hi").value(math.log(t))
        return self.side("lo").value(-math.log(t))

    def to_text(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_text()!r})"


@dataclass(frozen=True, repr=False)
class One(WeightExpr):
    def side(self, side: str) -> SideForm:
        return SideForm()

    def to_text(self) -> str:
        return "one"


@dataclass(frozen=True, repr=False)
class PowerLog(WeightExpr):
    alpha0: float
    alpha_inf: float

    def side(self, side: str) -> SideForm:
        return SideForm(self.alpha0 if side == "lo" else self.alpha_inf)

    def to_text(self) -> str:
        return f"log({_fmt(self.alpha0)},{_fmt(self.alpha_inf)})"


@dataclass(frozen=True, repr=False)
class ExpLog(WeightExpr):
    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("explog exponent must lie in (0, 1)")

    def side(self, side: str) -> SideForm:
        return SideForm(0.0, ((self.alpha, 1.0),))

    def to_text(self) -> str:
        return f"explog({_fmt(self.alpha)})"


@dataclass(frozen=True, repr=False)
class Product(WeightExpr):
    left: WeightExpr
    right: WeightExpr

    def side(self, side: str) -> SideForm:
        return self.left.side(side).combined(self.right.side(side))

    def to_text(self) -> str:
        return f"mul({self.left.to_text()},{self.right.to_text()})"


@dataclass(frozen=True, repr=False)
class Power(WeightExpr):
    base: WeightExpr
    r: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.r):
            raise ValueError("pow exponent must be finite")

    def side(self, side: str) -> SideForm:
        return self.base.side(side).scaled(self.r)

    def to_text(self) -> str:
        return f"pow({self.base.to_text()},{_fmt(self.r)})"


@dataclass(frozen=True, repr=False)
class Flip(WeightExpr):
    inner: WeightExpr

    def side(self, side: str) -> SideForm:
        return self.inner.side("hi" if side == "lo" else "lo")

    def to_text(self) -> str:
        return f"flip({self.inner.to_text()})"


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(x)


def eval_weight(b: WeightExpr, t: float) -> float:
    return b(t)


# ---------------------------------------------------------------------------
# Parser (recursive descent over the flat grammar)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> WeightSyntaxError:
        return WeightSyntaxError(message, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if start == self.pos:
            raise self.error("expected a weight constructor")
        return self.text[start:self.pos]

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = False
        while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                             or self.text[self.pos] in ".eE+-"):
            if self.text[self.pos] in "+-" and self.text[self.pos - 1] not in "eE":
                break
            digits = digits or self.text[self.pos].isdigit()
            self.pos += 1
        if not digits:
            raise self.error("expected a decimal literal")
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            self.pos = start
            raise self.error("malformed decimal literal") from None

    def expr(self) -> WeightExpr:
        name = self.ident()
        if name == "one":
            return One()
        if name == "log":
            self.expect("(")
            a0 = self.number()
            self.expect(",")
            ai = self.number()
            self.expect(")")
            return PowerLog(a0, ai)
        if name == "explog":
            self.expect("(")
            a = self.number()
            self.expect(")")
            try:
                return ExpLog(a)
            except ValueError as exc:
                raise self.error(str(exc)) from None
        if name == "mul":
            self.expect("(")
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect(")")
            return Product(left, right)
        if name == "pow":
            self.expect("(")
            base = self.expr()
            self.expect(",")
            r = self.number()
            self.expect(")")
            try:
                return Power(base, r)
            except ValueError as exc:
                raise self.error(str(exc)) from None
        if name == "flip":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Flip(inner)
        raise self.error(f"unknown weight constructor {name!r}")


def parse_weight(text: str) -> WeightExpr:
    parser = _Parser(text)
    node = parser.expr()
    parser.skip_ws()
    if parser.pos != len(text):
        raise parser.error("trailing input after weight expression")
    return node


# ---------------------------------------------------------------------------
# q-norms of bare weights
# ---------------------------------------------------------------------------

def _weight_terms(b: WeightExpr, q: float, lo: float, hi: float,
                  kernel_power: float = 0.0) -> list[LogTerm]:
    """Canonical terms of int_lo^hi u^kernel_power b(u)^q du/u."""
    terms: list[LogTerm] = []
    if lo < 1.0:
        form = b.side("lo").scaled(q)
        x1 = -math.log(min(hi, 1.0))
        x2 = -math.log(lo) if lo > 0.0 else _INF
        if x2 > x1:
            terms.append(LogTerm(1.0, -kernel_power, form.beta, x1, x2,
                                 form.gammas, end="zero"))
    if hi > 1.0:
        form = b.side("hi").scaled(q)
        x1 = math.log(max(lo, 1.0))
        x2 = math.log(hi) if hi != _INF else _INF
        if x2 > x1:
            terms.append(LogTerm(1.0, kernel_power, form.beta, x1, x2,
                                 form.gammas, end="inf"))
    return terms


def weight_kernel_integral(b: WeightExpr, q: float, kernel_power: float,
                           lo: float, hi: float) -> float:
    """int_lo^hi u^kernel_power b(u)^q du/u; +inf when divergent."""
    return integrate_terms(_weight_terms(b, q, lo, hi, kernel_power)).value


def _weight_sup(b: WeightExpr, lo: float, hi: float) -> float:
    """Essential supremum of b on (lo, hi); +inf when b blows up at an open end."""
    candidates: list[float] = []
    for side, x1, x2 in _side_ranges(lo, hi):
        form = b.side(side)
        if x2 == _INF and _form_unbounded(form):
            return _INF
        candidates.append(_form_sup(form, x1, x2))
    return max(candidates)


def _side_ranges(lo: float, hi: float) -> list[tuple[str, float, float]]:
    ranges = []
    if lo < 1.0:
        x1 = -math.log(min(hi, 1.0))
        x2 = -math.log(lo) if lo > 0.0 else _INF
        if x2 > x1:
            ranges.append(("lo", x1, x2))
    if hi > 1.0:
        x1 = math.log(max(lo, 1.0))
        x2 = math.log(hi) if hi != _INF else _INF
        if x2 > x1:
            ranges.append(("hi", x1, x2))
    return ranges


def _form_unbounded(form: SideForm) -> bool:
    lead_alpha, lead = -1.0, 0.0
    for al, g in form.gammas:
        if g != 0.0 and al > lead_alpha:
            lead_alpha, lead = al, g
    if lead > 0.0:
        return True
    if lead < 0.0:
        return False
    return form.beta > 0.0


def _form_sup(form: SideForm, x1: float, x2: float) -> float:
    # log-derivative beta/(1+x) + sum gamma alpha x^(alpha-1) has at most a few
    # sign changes; a dense grid plus endpoints is exact for monotone pieces.
    hi = x2 if x2 != _INF else x1 + 64.0
    xs = np.linspace(x1, hi, 257)
    vals = [form.log_value(float(x)) for x in xs]
    return math.exp(max(vals))


def tail_qnorm(b: WeightExpr, q: float, t: float) -> float:
    """||u^{-1/q} b(u)||_{q,(t,inf)}; +inf when divergent."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    if q == _INF:
        return _weight_sup(b, t, _INF)
    if q <= 0.0:
        raise ValueError("q must be positive or inf")
    res = integrate_terms(_weight_terms(b, q, t, _INF))
    return res.value ** (1.0 / q) if res.value != _INF else _INF


def head_qnorm(b: WeightExpr, q: float, t: float) -> float:
    """||u^{-1/q} b(u)||_{q,(0,t)}; the exact mirror of the tail norm."""
    return tail_qnorm(Flip(b), q, 1.0 / t)


# ---------------------------------------------------------------------------
# SV classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SVClassReport:
    q: float
    in_SV0q: bool
    in_SV1q: bool
    tail_value_at_1: float
    head_value_at_1: float


def classify(b: WeightExpr, q: float) -> SVClassReport:
    tail = tail_qnorm(b, q, 1.0)
    head = head_qnorm(b, q, 1.0)
    return SVClassReport(q=q, in_SV0q=math.isfinite(tail),
                         in_SV1q=math.isfinite(head),
                         tail_value_at_1=tail, head_value_at_1=head)


# ---------------------------------------------------------------------------
# The tilde construction
# ---------------------------------------------------------------------------

class TildeWeight:
    """b~(t) = ||u^{-1} b(u)||_{1,(t,inf)} for an integrable tail."""

    def __init__(self, b: WeightExpr, grid: GridSpec = STANDARD_GRID):
        if not math.isfinite(tail_qnorm(b, 1.0, 1.0)):
            raise PreconditionError(
                "tilde construction requires a convergent tail integral of u^-1 b(u)")
        self.base = b
        ratios = [b(t) / self(t) for t in grid.points()]
        self.comparison_constant = max(ratios)

    def __call__(self, t) -> float:
        if isinstance(t, np.ndarray):
            return np.array([self(float(u)) for u in t])
        return tail_qnorm(self.base, 1.0, float(t))

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        return [1.0] if lo < 1.0 < hi else []


def tilde_construction(b: WeightExpr, grid: GridSpec = STANDARD_GRID) -> TildeWeight:
    return TildeWeight(b, grid)


# ---------------------------------------------------------------------------
# Operationalized SV membership
# ---------------------------------------------------------------------------

def sv_quasimonotone_constant(b: WeightExpr, eps: float,
                              grid: GridSpec = STANDARD_GRID) -> float:
    """Worst quasi-monotonicity constant of t^eps b(t) (toward nondecreasing)
    and t^-eps b(t) (toward nonincreasing) on the grid."""
    ts = grid.points()
    vals = np.array([b(float(t)) for t in ts])
    up = vals * ts ** eps
    down = vals * ts ** (-eps)
    worst = 1.0
    run_max = -_INF
    for v in up:  # nondecreasing: sup_{x<t} g(x)/g(t)
        run_max = max(run_max, v)
        worst = max(worst, run_max / v)
    run_min = _INF
    for v in down:  # nonincreasing: sup_{x<t} g(t)/g(x)
        run_min = min(run_min, v)
        worst = max(worst, v / run_min)
    return float(worst)
