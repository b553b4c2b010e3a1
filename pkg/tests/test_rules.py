from collections import Counter
from fractions import Fraction
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulgarian.dynamics import step
from bulgarian.errors import (
    MissingLevelOne,
    NotConvex,
    NotWellBehaved,
    PileTooLarge,
    QOutOfRange,
    SigmaExceedsPile,
    Unsorted,
)
from bulgarian.partitions import Partition, enumerate_partitions, is_convex
from bulgarian.rules import (
    SigmaRule,
    is_well_behaved,
    make_levels_rule,
    make_q_rule,
    make_table_rule,
    ordinary_rule,
    parse_rule,
    pick_level,
    picked_levels,
    rational_q,
    require_well_behaved,
    rule_from_convex,
)

from conftest import levels_rules, partitions, q_rules, well_behaved_rules


def test_q_rule_examples(q310):
    assert q310.sigma(6) == 2
    assert q310.sigma(1) == 1
    assert q310.sigma(10) == 3
    for bad in (0, Fraction(11, 10), -1):
        with pytest.raises(QOutOfRange):
            make_q_rule(bad)


def test_q_rule_exact_ceiling():
    # 7/10 * 10 is exactly 7; a float ceiling of 0.7 * 10 gives 8
    assert make_q_rule(Fraction(7, 10)).sigma(10) == 7
    r = make_q_rule(Fraction(1, 3))
    assert [r.sigma(h) for h in range(1, 10)] == [1, 1, 1, 2, 2, 2, 3, 3, 3]


def test_table_rule_examples():
    r = make_table_rule([1, 1, 3])
    assert r.sigma(3) == 3
    with pytest.raises(PileTooLarge):
        r.sigma(4)
    flat = make_table_rule([1] * 8)
    assert all(flat.sigma(h) == 1 for h in range(1, 9))
    assert make_table_rule([1, 2]).sigma(2) == 2
    with pytest.raises(SigmaExceedsPile):
        make_table_rule([1, 3])


def test_levels_rule_examples():
    r = make_levels_rule([1, 4], 7)
    assert r.sigma(7) == 2 and r.sigma(3) == 1
    o = make_levels_rule([1], 9)
    assert all(o.sigma(h) == 1 for h in range(1, 10))
    a, b = make_levels_rule([1, 4, 7], 10), make_q_rule(Fraction(3, 10))
    assert [a.sigma(h) for h in range(1, 11)] == [b.sigma(h) for h in range(1, 11)]
    with pytest.raises(MissingLevelOne):
        make_levels_rule([2, 4], 7)
    with pytest.raises(Unsorted):
        make_levels_rule([1, 4, 3], 7)


def test_well_behaved_examples():
    assert is_well_behaved(make_q_rule(Fraction(3, 10)), 10**6).ok
    rep = is_well_behaved(make_table_rule([1, 1, 3]))
    assert not rep.ok and rep.violations == ((3, "sigma_bar decreases"),)
    assert is_well_behaved(make_table_rule([1, 1, 1])).ok
    assert is_well_behaved(make_table_rule([1, 2, 1])).violations == ((3, "sigma decreases"),)
    assert is_well_behaved(make_table_rule([0, 1])).violations[0] == (1, "sigma(1) != 1")
    with pytest.raises(NotWellBehaved):
        require_well_behaved(make_table_rule([1, 1, 3]))


def test_picked_levels_examples(q310):
    assert picked_levels(make_levels_rule([1, 4], 7), 7) == [1, 4]
    assert picked_levels(ordinary_rule(), 1000) == [1]
    assert picked_levels(q310, 10) == [1, 4, 7]
    assert picked_levels(make_table_rule([1, 1, 2, 2, 3]), 5) == [1, 3, 5]
    with pytest.raises(NotWellBehaved):
        picked_levels(make_table_rule([1, 1, 3]), 3)


def test_pick_level_examples(q310):
    o = ordinary_rule()
    assert all(pick_level(o, h) == 1 for h in range(1, 50))
    assert pick_level(q310, 5) == 1
    assert pick_level(make_levels_rule([1, 4], 7), 6) == 4


def test_rule_from_convex_examples():
    r = rule_from_convex(Partition((5, 3, 2, 1)))
    assert [r.sigma(h) for h in (5, 3, 2, 1)] == [2, 1, 1, 1]
    assert step(r, Partition((5, 3, 2, 1))) == Partition((5, 3, 2, 1))
    r = rule_from_convex(Partition((3, 2, 1)))
    assert r.levels == (1,)
    assert rule_from_convex(Partition((1,))).levels == (1,)
    with pytest.raises(NotConvex):
        rule_from_convex(Partition((4, 4, 2, 1, 1)))


def test_ordinary_rule():
    assert ordinary_rule().sigma(10**12) == 1
    assert ordinary_rule(5).h_max == 5


def test_rational_q():
    q = rational_q(1000 ** -0.75)
    assert isinstance(q, Fraction) and abs(float(q) - 1000 ** -0.75) < 1e-12
    assert rational_q(0.3) == Fraction(3, 10)


@pytest.mark.parametrize(
    "text,rule",
    [
        ("q:3/10", make_q_rule(Fraction(3, 10))),
        ("levels:1,4@7", make_levels_rule([1, 4], 7)),
        ("table:1,1,3", make_table_rule([1, 1, 3])),
        ("ordinary@6", make_levels_rule([1], 6)),
    ],
)
def test_parse_rule(text, rule):
    assert parse_rule(text) == rule


def test_parse_rule_from_json_file(tmp_path):
    f = tmp_path / "rule.json"
    f.write_text(json.dumps({"type": "levels", "H": [1, 4], "h_max": 7}))
    assert parse_rule(str(f)) == make_levels_rule([1, 4], 7)


@given(st.one_of(q_rules(), levels_rules(), st.lists(st.integers(0, 3), min_size=1, max_size=8)))
def test_json_round_trip(r):
    if isinstance(r, list):
        r = make_table_rule([min(v, h) for h, v in enumerate(r, start=1)])
    assert SigmaRule.from_json(r.to_json()) == r
    assert parse_rule(str(r)) == r if r.kind != "table" else True


@given(well_behaved_rules())
def test_sigma_counts_levels(r):
    top = 80 if r.h_max is None else r.h_max
    levels = picked_levels(r, top)
    for h in range(1, top + 1):
        assert r.sigma(h) == sum(1 for v in levels if v <= h)


def _P_oracle(r, h):
    # unroll the recursion literally
    levels = set(picked_levels(r, h))
    while h not in levels:
        h -= r.sigma(h)
    return h


@given(well_behaved_rules())
def test_permutation_property(r):
    top = 300 if r.h_max is None else r.h_max
    levels = picked_levels(r, top)
    for h in range(1, top + 1):
        s = r.sigma(h)
        window = Counter(pick_level(r, h - j) for j in range(s))
        assert window == Counter(levels[:s])
        assert pick_level(r, h) == _P_oracle(r, h)


@given(st.integers(1, 60), st.integers(1, 60))
def test_q_rule_well_behaved_dense_grid(num, den):
    if num <= den:
        assert is_well_behaved(make_q_rule(Fraction(num, den)), 5 * den).ok


@given(st.integers(1, 500))
def test_small_q_is_ordinary(n):
    r = make_q_rule(Fraction(1, n))
    assert all(r.sigma(h) == 1 for h in range(1, n + 1))


@given(partitions(min_n=1))
def test_rule_from_convex_fixes(p):
    if not is_convex(p):
        with pytest.raises(NotConvex):
            rule_from_convex(p)
        return
    r = rule_from_convex(p)
    assert is_well_behaved(r).ok
    assert step(r, p) == p


def test_rule_from_convex_exhaustive():
    for n in range(1, 16):
        for p in enumerate_partitions(n):
            if is_convex(p):
                assert step(rule_from_convex(p), p) == p


@given(st.lists(st.integers(0, 4), min_size=1, max_size=12))
def test_table_well_behaved_definition(raw):
    vals = [min(v, h) for h, v in enumerate(raw, start=1)]
    r = make_table_rule(vals)
    diffs = [b - a for a, b in zip([0] + vals, vals)]
    want = vals[0] == 1 and all(d in (0, 1) for d in diffs)
    assert is_well_behaved(r).ok == want
    assert (r._pick is not None) == want
