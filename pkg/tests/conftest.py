import math

import pytest

from kinterp.weights import One, parse_weight


def rel_err(got: float, want: float) -> float:
    if want == 0.0:
        return abs(got)
    return abs(got - want) / abs(want)


@pytest.fixture(scope="session")
def w_one():
    return One()


@pytest.fixture(scope="session")
def w_l02():
    return parse_weight("log(0,-2)")


@pytest.fixture(scope="session")
def w_l03():
    return parse_weight("log(0,-3)")


@pytest.fixture(scope="session")
def w_l01():
    return parse_weight("log(0,-1)")


@pytest.fixture(scope="session")
def w_lm20():
    return parse_weight("log(-2,0)")


@pytest.fixture(scope="session")
def w_lm22():
    return parse_weight("log(-2,-2)")
