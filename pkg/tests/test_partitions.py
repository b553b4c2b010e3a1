from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulgarian.errors import CardOverflow, EmptyPartition, NegativeX, NonPositivePart, NotSorted
from bulgarian.partitions import (
    Composition,
    Partition,
    boundary,
    boundary_samples_csv,
    dominates,
    downscale_boundary,
    enumerate_partitions,
    is_convex,
    parse_partition,
    random_partition,
    read_boundary_samples_csv,
    scaled_boundary,
    sort_to_partition,
    validate_partition,
)
from bulgarian.verify import partition_count

from conftest import partitions


def P(*parts):
    return Partition(tuple(parts))


def test_validate_examples():
    p = validate_partition([7, 3, 2])
    assert (p.n, p.ell) == (12, 3)
    e = validate_partition([])
    assert (e.n, e.ell) == (0, 0)
    with pytest.raises(NotSorted):
        validate_partition([3, 5])
    with pytest.raises(NonPositivePart):
        validate_partition([3, 0])
    with pytest.raises(CardOverflow):
        validate_partition([2**62, 2**62])


def test_virtual_zeros():
    p = P(4, 2)
    assert p[1] == 2 and p[2] == 0 and p[100] == 0


def test_parse_partition():
    assert parse_partition("7,3,2") == P(7, 3, 2)
    assert parse_partition("") == P()
    with pytest.raises(NotSorted):
        parse_partition("1,2")


def test_dominates_examples():
    assert dominates(P(5, 3, 2, 1), P(4, 3, 2, 1))
    assert dominates(P(4, 3, 2, 1), P(4, 3, 2, 1))
    assert not dominates(P(5, 4, 1, 1), P(6, 2, 2, 1))
    assert not dominates(P(6, 2, 2, 1), P(5, 4, 1, 1))
    assert not dominates(P(3), P(2, 1))  # virtual zero under a real part


def test_convex_examples():
    assert is_convex(P(5, 3, 2, 1))
    assert not is_convex(P(4, 4, 2, 1, 1))
    assert is_convex(P(1))
    assert is_convex(P())


def test_boundary_examples():
    p = P(4, 4, 2, 1, 1)
    assert boundary(p, 0.5) == 4
    assert boundary(p, 4.9) == 1
    assert boundary(p, 5.1) == 0
    with pytest.raises(NegativeX):
        boundary(p, -0.1)


def test_downscale_examples():
    p = P(4, 4, 2, 1, 1)
    assert downscale_boundary(p, 12, 0) == 1.0
    assert downscale_boundary(p, 12, Fraction(1, 3)) == 1.0
    assert downscale_boundary(p, 12, Fraction(2, 3)) == 0.5
    with pytest.raises(EmptyPartition):
        downscale_boundary(P(), 1, 0)


def test_downscale_exact_index_for_rationals():
    # a float 1/3 times 12/4 can land just under 1; the rational path may not
    p = P(4, 4, 2, 1, 1)
    for k in range(16):
        x = Fraction(k, 3)
        assert downscale_boundary(p, 12, x) == p[k] / 4


def test_scaled_boundary_matches_downscale():
    p = P(9, 5, 2)
    a = p.n / p.top
    for x in (0.1, 0.7, 1.3, 2.9):
        assert scaled_boundary(p, a, x) == pytest.approx(downscale_boundary(p, p.n, x))


def test_sort_to_partition():
    assert sort_to_partition(Composition((3, 0, 5, 1))) == P(5, 3, 1)
    assert sort_to_partition(()) == P()
    assert sort_to_partition([2, 2, 2]) == P(2, 2, 2)


def test_enumerate_examples():
    assert list(enumerate_partitions(3)) == [P(3), P(2, 1), P(1, 1, 1)]
    assert len(list(enumerate_partitions(6))) == 11
    assert list(enumerate_partitions(0)) == [P()]


def _count_by_dp(n):
    # independent oracle: coin-change count
    ways = [1] + [0] * n
    for part in range(1, n + 1):
        for m in range(part, n + 1):
            ways[m] += ways[m - part]
    return ways[n]


def test_pentagonal_oracle_agrees_with_dp():
    assert [partition_count(n) for n in range(61)] == [_count_by_dp(n) for n in range(61)]
    assert partition_count(60) == 966467


@pytest.mark.parametrize("n", [0, 1, 5, 12, 20, 30])
def test_enumeration_count_distinct_and_ordered(n):
    got = list(enumerate_partitions(n))
    assert len(got) == partition_count(n)
    assert len({p.parts for p in got}) == len(got)
    assert [p.parts for p in got] == sorted((p.parts for p in got), reverse=True)
    assert all(p.n == n for p in got)


@pytest.mark.slow
def test_enumeration_count_60():
    assert sum(1 for _ in enumerate_partitions(60)) == partition_count(60)


@given(partitions(min_n=1))
def test_downscale_height_and_exact_area(p):
    assert downscale_boundary(p, p.n, 0) == 1
    # columns of width lambda_1/n and height parts/lambda_1
    area = sum(Fraction(v, p.top) * Fraction(p.top, p.n) for v in p.parts)
    assert area == 1
    width = Fraction(p.top, p.n)
    for i, v in enumerate(p.parts):
        assert downscale_boundary(p, p.n, width * i + width / 2) == v / p.top


@given(partitions(), st.lists(st.floats(0, 50), min_size=2, max_size=10))
def test_boundary_weakly_decreasing(p, xs):
    xs.sort()
    vals = [boundary(p, x) for x in xs]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@given(partitions())
def test_convex_brute_force(p):
    lam = list(p.parts) + [0, 0]
    diffs = [lam[i] - lam[i + 1] for i in range(len(lam) - 1)]
    assert is_convex(p) == all(a >= b for a, b in zip(diffs, diffs[1:]))


@given(partitions(), partitions())
def test_dominates_definition(a, b):
    want = all(b[i] <= a[i] for i in range(max(a.ell, b.ell)))
    assert dominates(a, b) == want


@given(partitions())
def test_json_round_trip(p):
    assert Partition.from_json(p.to_json()) == p


def test_random_partition_deterministic():
    a = random_partition(1000, np.random.default_rng(7))
    b = random_partition(1000, np.random.default_rng(7))
    assert a == b and a.n == 1000
    assert random_partition(0, np.random.default_rng(0)) == P()


def test_boundary_csv_round_trip():
    p = P(4, 4, 2, 1, 1)
    rows = read_boundary_samples_csv(boundary_samples_csv(p, 12, [0.5, 0.1, 1.0]))
    assert rows == [(0.1, 1.0), (0.5, 1.0), (1.0, 0.25)]
