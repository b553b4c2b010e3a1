from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bulgarian.partitions import sort_to_partition
from bulgarian.rules import make_levels_rule, make_q_rule, ordinary_rule

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def partitions(draw, max_n=40, min_n=0):
    """A random partition, built by sorting a random list of positive parts."""
    n = draw(st.integers(min_n, max_n))
    parts = []
    left = n
    while left:
        v = draw(st.integers(1, left))
        parts.append(v)
        left -= v
    return sort_to_partition(parts)


@st.composite
def q_rules(draw, max_den=40):
    den = draw(st.integers(1, max_den))
    num = draw(st.integers(1, den))
    return make_q_rule(Fraction(num, den))


@st.composite
def levels_rules(draw, h_max=80):
    extra = draw(st.sets(st.integers(2, h_max), max_size=h_max // 2))
    return make_levels_rule([1] + sorted(extra), h_max)


def well_behaved_rules(h_max=80):
    return st.one_of(q_rules(), levels_rules(h_max), st.just(ordinary_rule()))


@pytest.fixture
def q310():
    return make_q_rule(Fraction(3, 10))


# the four members of the q = 3/10, n = 11 cycle, in orbit order
CYCLE_310 = ((6, 2, 2, 1), (5, 4, 1, 1), (6, 3, 2), (4, 4, 2, 1))
