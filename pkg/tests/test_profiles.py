import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinterp.profiles import (
    Atom,
    CurveClosureError,
    KProfile,
    PiecewiseCurve,
    Rearrangement,
    K_from_rearrangement,
    check_quasiconcave,
    conjugate_profile,
    parse_profile,
    profile_eval,
    profile_suite,
    random_rearrangement,
    realize_rearrangement,
    truncation_split,
)

GRID = np.logspace(-6, 6, 49)


# ---------------------------------------------------------------------------
# Evaluation and quasi-concavity
# ---------------------------------------------------------------------------

def test_profile_eval_examples():
    k = KProfile.min1()
    assert profile_eval(k, 0.5) == 0.5
    assert profile_eval(k, 3.0) == 1.0
    two_sqrt = KProfile(PiecewiseCurve((), ((Atom(2.0, 0.5),),)))
    assert profile_eval(two_sqrt, 4.0) == 4.0


def test_check_quasiconcave_examples():
    assert check_quasiconcave(KProfile.min1()).ok
    assert check_quasiconcave(KProfile.power(1.0)).ok
    bad = KProfile(PiecewiseCurve((), ((Atom(1.0, 1.5),),)))
    rep = check_quasiconcave(bad)
    assert not rep.ok
    assert rep.violation is not None


def test_powerlog_literal_quasiconcave():
    # log perturbations must stay below the power slack on each side
    k = parse_profile("powerlog(0.5,0.25,-0.25)")
    assert check_quasiconcave(k).ok
    assert k(1.0) == 1.0
    steep = parse_profile("powerlog(0.5,1,-1)")
    assert not check_quasiconcave(steep).ok


# ---------------------------------------------------------------------------
# K from a rearrangement and back
# ---------------------------------------------------------------------------

def test_K_from_indicator():
    K = K_from_rearrangement(Rearrangement.indicator(1.0))
    assert K(0.25) == 0.25
    assert K(3.0) == 1.0
    assert check_quasiconcave(K).ok


def test_K_from_power():
    K = K_from_rearrangement(Rearrangement.power(0.5))
    for t in (0.25, 1.0, 4.0):
        assert K(t) == pytest.approx(2.0 * math.sqrt(t), rel=1e-15)


def test_K_from_zero():
    K = K_from_rearrangement(Rearrangement.zero())
    assert K(1.0) == 0.0


def test_realize_examples():
    r = realize_rearrangement(KProfile.min1())
    assert r(0.5) == 1.0 and r(2.0) == 0.0
    r2 = realize_rearrangement(KProfile.power(1.0))
    assert r2(0.3) == 1.0 and r2(7.0) == 1.0
    two_sqrt = KProfile(PiecewiseCurve((), ((Atom(2.0, 0.5),),)))
    r3 = realize_rearrangement(two_sqrt)
    assert r3(4.0) == pytest.approx(0.5, rel=1e-15)


def test_realize_rejects_non_quasiconcave():
    bad = KProfile(PiecewiseCurve((), ((Atom(1.0, 1.5),),)))
    with pytest.raises(ValueError):
        realize_rearrangement(bad)


def test_round_trip_exact_on_suite():
    for f in profile_suite():
        K = K_from_rearrangement(f)
        back = K_from_rearrangement(realize_rearrangement(K))
        for t in GRID:
            assert back(float(t)) == pytest.approx(K(float(t)), rel=1e-12)


def test_hull_realization_band():
    # quasi-concave but not concave: flat, then a new rise, then flat
    k = KProfile(PiecewiseCurve(
        (1.0, 4.0, 8.0),
        ((Atom(1.0, 1.0),), (Atom(1.0, 0.0),), (Atom(0.25, 1.0),),
         (Atom(2.0, 0.0),))))
    assert check_quasiconcave(k).ok
    f = realize_rearrangement(k)
    K2 = K_from_rearrangement(f)
    for t in GRID:
        ratio = K2(float(t)) / k(float(t))
        assert 0.5 - 1e-9 <= ratio <= 2.0 + 1e-9


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------

def test_truncation_examples():
    chi = Rearrangement.indicator(1.0)
    f0, f1 = truncation_split(chi, 2.0)
    assert f0.curve.is_zero()
    assert f1(0.5) == 1.0

    f0, f1 = truncation_split(chi, 0.5)
    assert f0(0.5) == 0.5 and f1(0.5) == 0.5

    fp = Rearrangement.power(0.5)
    f0, f1 = truncation_split(fp, 1.0)
    assert f0(0.25) == pytest.approx(1.0, rel=1e-12)   # u^-1/2 - 1 at 1/4
    assert f1(0.25) == 1.0
    assert f1(4.0) == pytest.approx(0.5, rel=1e-12)


def test_truncation_level_validation():
    with pytest.raises(ValueError):
        truncation_split(Rearrangement.indicator(1.0), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1),
       st.floats(min_value=-2.5, max_value=2.5))
def test_split_additivity_random(seed, log_lam):
    rng = np.random.default_rng(seed)
    f = random_rearrangement(rng)
    lam = math.exp(log_lam)
    f0, f1 = truncation_split(f, lam)
    K, K0, K1 = (K_from_rearrangement(g) for g in (f, f0, f1))
    for v in (1e-5, 0.3, 1.0, 17.0, 1e4):
        assert f0(v) + f1(v) == pytest.approx(f(v), abs=1e-12 * max(1.0, f(v)))
        assert K0(v) + K1(v) == pytest.approx(K(v), rel=1e-12)
        assert f1(v) <= lam * (1.0 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_K_quasiconcave_random(seed):
    rng = np.random.default_rng(seed)
    f = random_rearrangement(rng)
    assert check_quasiconcave(K_from_rearrangement(f)).ok


# ---------------------------------------------------------------------------
# Conjugation
# ---------------------------------------------------------------------------

def test_conjugate_pointwise():
    k = KProfile.from_nodes([(1.0, 1.0), (10.0, 2.0)])
    kc = conjugate_profile(k)
    for t in GRID:
        t = float(t)
        assert kc(t) == pytest.approx(t * k(1.0 / t), rel=1e-12)


def test_conjugate_involution():
    for f in profile_suite():
        K = K_from_rearrangement(f)
        back = conjugate_profile(conjugate_profile(K))
        for t in (0.01, 1.0, 70.0):
            assert back(t) == pytest.approx(K(t), rel=1e-12)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

def test_antiderivative_closure_error():
    curve = PiecewiseCurve((1.0,), ((Atom(1.0, 0.5, 1.0),), ()))
    with pytest.raises(CurveClosureError):
        curve.antiderivative()


def test_non_integrable_at_zero_rejected():
    curve = PiecewiseCurve((1.0,), ((Atom(1.0, -1.5),), ()))
    with pytest.raises(ValueError):
        curve.antiderivative()


def test_rearrangement_monotonicity_enforced():
    with pytest.raises(ValueError):
        Rearrangement.staircase((1.0, 2.0), (1.0, 3.0))


def test_parse_profile_literals():
    assert parse_profile("min1")(0.5) == 0.5
    assert parse_profile("power(0.5)")(4.0) == 2.0
    assert parse_profile("piecewise[(1,1),(10,2)]")(10.0) == 2.0
    with pytest.raises(ValueError):
        parse_profile("spline(3)")
