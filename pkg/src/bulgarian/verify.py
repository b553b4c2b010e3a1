"""Invariant battery: exhaustive and randomized checks grouped into suites.

Every check returns pass/fail plus the first counterexample it met. Sizes are
configurable through :class:`Caps`; the defaults are the full sizes, tests
pass smaller ones.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .dynamics import (
    advance,
    check_new_pile_bound,
    enumerate_recurrent,
    find_cycle,
    lifetime_bound,
    pile_lifetime,
    step,
    step_layers,
)
from .errors import BoundViolation, MarkedInvariantBroken, UnknownSuite
from .marked import deviation, mark, marked_step
from .partitions import (
    Partition,
    boundary,
    dominates,
    downscale_boundary,
    enumerate_partitions,
    is_convex,
    random_partition,
)
from .rules import (
    SigmaRule,
    is_well_behaved,
    make_levels_rule,
    make_q_rule,
    ordinary_rule,
    pick_level,
    picked_levels,
    rational_q,
    rule_from_convex,
)
from .shapes import (
    EXPONENTIAL,
    TRIANGLE,
    empirical_distance,
    g_of_z,
    interpolating_shape,
    shape_to_stable,
    sup_distance_to,
)
from .stability import find_stable, stable_from_top, stable_total

SUITES = ("core", "rules", "dynamics", "stability", "marked", "shapes", "conjecture")


@dataclass(frozen=True)
class Caps:
    seed: int = 0
    partition_count_n: int = 60
    exhaustive_n: int = 20
    cycle_n: int = 18
    stable_n: int = 30
    convex_n: int = 22
    marked_n: int = 15
    conjecture_n: int = 40
    permutation_h: int = 10_000
    gap_lambda1: int = 10_000
    fixpoint_lambda1: int = 10**6
    random_pairs: int = 100_000
    marked_trials: int = 10_000
    pile_count_ns: tuple[int, ...] = (1_000, 10_000, 100_000)
    pile_count_starts: int = 100
    regime_ns: tuple[int, ...] = (10**4, 10**5, 10**6, 10**7)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: str | None = None


@dataclass(frozen=True)
class Report:
    suite: str
    checks: tuple[CheckResult, ...]
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "data": self.data,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class _Fail(Exception):
    def __init__(self, counterexample: str):
        super().__init__(counterexample)
        self.counterexample = counterexample


def _check(name: str, fn: Callable[[], str]) -> CheckResult:
    try:
        return CheckResult(name, True, fn() or "")
    except _Fail as e:
        return CheckResult(name, False, "violated", e.counterexample)


def _expect(ok: bool, what) -> None:
    if not ok:
        raise _Fail(what if isinstance(what, str) else what())


# shared fixtures -----------------------------------------------------------


@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    return tuple(enumerate_partitions(n))


def q_battery() -> list[SigmaRule]:
    return [make_q_rule(Fraction(k, 10)) for k in range(1, 11)]


def seeded_levels_rules(count: int = 20, seed: int = 0, h_max: int = 128) -> list[SigmaRule]:
    """Random levels rules: level 1 plus each higher level with a per-rule density."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        density = rng.uniform(0.05, 0.6)
        keep = rng.random(h_max - 1) < density
        out.append(make_levels_rule([1] + [h for h, k in zip(range(2, h_max + 1), keep) if k], h_max))
    return out


def battery(seed: int = 0) -> list[SigmaRule]:
    """Proportion rules 1/10..1, ordinary solitaire, and 20 seeded levels rules."""
    return q_battery() + [ordinary_rule()] + seeded_levels_rules(20, seed)


def partition_count(n: int) -> int:
    """p(n) from Euler's pentagonal number recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def naive_cycle(rule: SigmaRule, p: Partition) -> tuple[int, int]:
    """Tail and period by remembering every visited configuration."""
    seen: dict[Partition, int] = {}
    t = 0
    while p not in seen:
        seen[p] = t
        p = step(rule, p)
        t += 1
    return seen[p], t - seen[p]


def random_dominated_pair(rng: np.random.Generator, max_n: int = 60) -> tuple[Partition, Partition]:
    """(kappa, lam) with lam[i] <= kappa[i] for all i."""
    kappa = random_partition(int(rng.integers(1, max_n + 1)), rng)
    lam = []
    cap = None
    for v in kappa.parts:
        hi = v if cap is None else min(v, cap)
        w = int(rng.integers(0, hi + 1))
        if w == 0:
            break
        lam.append(w)
        cap = w
    return kappa, Partition(tuple(lam))


# core ----------------------------------------------------------------------


def _core(caps: Caps) -> list[CheckResult]:
    def counts():
        for n in range(caps.partition_count_n + 1):
            seen = set()
            for p in enumerate_partitions(n):
                _expect(p.n == n, f"n={n}: {p} has {p.n} cards")
                seen.add(p.parts)
            _expect(len(seen) == partition_count(n), f"n={n}: {len(seen)} != p(n)={partition_count(n)}")
        return f"p(n) matches the pentagonal recurrence for n <= {caps.partition_count_n}"

    small = caps.exhaustive_n

    def boundary_shape():
        for n in range(1, small + 1):
            for p in partitions_of(n):
                _expect(downscale_boundary(p, n, 0) == 1, lambda: f"{p}: height at 0")
                lam1 = p.top
                area = sum(Fraction(v, lam1) * Fraction(lam1, n) for v in p.parts)
                _expect(area == 1, lambda: f"{p}: area {area}")
                # unit-width steps, weakly decreasing
                vals = [boundary(p, Fraction(2 * i + 1, 2)) for i in range(p.ell + 1)]
                _expect(vals == list(p.parts) + [0], lambda: f"{p}: boundary {vals}")
                _expect(
                    all(boundary(p, i) == boundary(p, i + Fraction(999, 1000)) for i in range(p.ell)),
                    lambda: f"{p}: boundary not constant on unit steps",
                )
        return f"all partitions with n <= {small}"

    def convexity():
        for n in range(1, small + 1):
            for p in partitions_of(n):
                lam = p.parts + (0, 0)
                brute = all(lam[i] + lam[i + 2] >= 2 * lam[i + 1] for i in range(p.ell))
                _expect(is_convex(p) == brute, lambda: f"{p}: is_convex={is_convex(p)}")
        return ""

    return [
        _check("partition counts", counts),
        _check("downscaled boundary height, area and steps", boundary_shape),
        _check("convexity against second differences", convexity),
    ]


# rules ---------------------------------------------------------------------


def _permutation_property(rule: SigmaRule, h_top: int) -> None:
    """Sliding-window check that {P(h-sigma(h)+1..h)} equals {H_1..H_sigma(h)}."""
    levels = picked_levels(rule, h_top)
    P = [0] * (h_top + 1)
    window: Counter = Counter()
    prev_sigma = 0
    for h in range(1, h_top + 1):
        P[h] = pick_level(rule, h)
        s = rule.sigma(h)
        window[P[h]] += 1
        # window [h-s+1, h]; the previous one was [h-prev_sigma, h-1]
        for j in range(h - prev_sigma, h - s + 1):
            window[P[j]] -= 1
            if not window[P[j]]:
                del window[P[j]]
        prev_sigma = s
        _expect(
            window == Counter(levels[:s]),
            lambda: f"{rule} h={h}: window {sorted(window.elements())} vs {levels[:s]}",
        )


def _rules(caps: Caps) -> list[CheckResult]:
    rules = battery(caps.seed)

    def counts_levels():
        for r in rules:
            top = 200 if r.h_max is None else r.h_max
            levels = picked_levels(r, top)
            for h in range(1, top + 1):
                _expect(r.sigma(h) == sum(1 for v in levels if v <= h), f"{r} h={h}")
        return f"{len(rules)} rules"

    def permutation():
        sample = [make_q_rule(Fraction(k, 10)) for k in (1, 3, 7)] + [ordinary_rule()]
        for r in sample:
            _permutation_property(r, caps.permutation_h)
        for r in seeded_levels_rules(5, caps.seed + 1, h_max=min(caps.permutation_h, 2000)):
            _permutation_property(r, r.h_max)
        return f"h <= {caps.permutation_h}"

    def q_grid():
        count = 0
        for den in range(1, 41):
            for num in range(1, den + 1):
                r = make_q_rule(Fraction(num, den))
                rep = is_well_behaved(r, 4 * den)
                _expect(rep.ok, lambda: f"{r}: {rep.violations[:3]}")
                count += 1
        return f"{count} rationals"

    def small_q():
        for n in (1, 2, 5, 17, 100, 1000):
            r = make_q_rule(Fraction(1, n))
            _expect(all(r.sigma(h) == 1 for h in range(1, n + 1)), f"q=1/{n}")
        return ""

    def convex_rules():
        for n in range(1, caps.convex_n + 1):
            for p in partitions_of(n):
                if is_convex(p):
                    r = rule_from_convex(p)
                    _expect(is_well_behaved(r).ok, lambda: f"{p}: {r} not well-behaved")
                    _expect(step(r, p) == p, lambda: f"{p} not fixed by {r}")
        return ""

    return [
        _check("sigma counts picked levels", counts_levels),
        _check("permutation property of P", permutation),
        _check("proportion rules are well-behaved", q_grid),
        _check("q <= 1/n is ordinary solitaire", small_q),
        _check("rule_from_convex is well-behaved and fixes p", convex_rules),
    ]


# dynamics --------------------------------------------------------------------


def _dynamics(caps: Caps) -> list[CheckResult]:
    rules = battery(caps.seed)

    def layers():
        for n in range(caps.exhaustive_n + 1):
            for p in partitions_of(n):
                for r in rules:
                    a = step(r, p)
                    _expect(a.n == n, lambda: f"{r} {p}: {a} has {a.n} cards")
                    b = step_layers(r, p)
                    _expect(a == b, lambda: f"{r} {p}: step {a}, step_layers {b}")
        return f"n <= {caps.exhaustive_n}, {len(rules)} rules"

    def dominance():
        rng = np.random.default_rng(caps.seed)
        for _ in range(caps.random_pairs):
            r = rules[int(rng.integers(len(rules)))]
            kappa, lam = random_dominated_pair(rng)
            a, b = step(r, kappa), step(r, lam)
            _expect(dominates(a, b), lambda: f"{r}: {kappa} >= {lam} but {a} vs {b}")
        for n in range(1, 9):
            for kappa in partitions_of(n):
                for m in range(n + 1):
                    for lam in partitions_of(m):
                        if dominates(kappa, lam):
                            for r in rules[:11]:
                                _expect(
                                    dominates(step(r, kappa), step(r, lam)),
                                    lambda: f"{r}: {kappa} >= {lam}",
                                )
        return f"{caps.random_pairs} random pairs and all pairs with n <= 8"

    def new_pile():
        rng = np.random.default_rng(caps.seed + 1)
        steps = 0
        for r in q_battery() + [make_q_rule(rational_q(0.0123))]:
            for n in (10, 50, 200, 1000):
                p = random_partition(n, rng)
                for _ in range(3 * n // 2 if n <= 200 else 200):
                    try:
                        check_new_pile_bound(r, p)
                    except BoundViolation as e:
                        raise _Fail(str(e))
                    p = step(r, p)
                    steps += 1
        return f"{steps} logged steps"

    def lifetime():
        checked = 0
        for q in np.logspace(-4, 0, 25):
            r = make_q_rule(rational_q(float(q)))
            for h in np.unique(np.logspace(0, 6, 40).astype(int)):
                h = int(h)
                if r.q * h < 1:
                    continue
                life = pile_lifetime(r, h)
                _expect(life <= lifetime_bound(r.q, h), f"{r} h={h}: lifetime {life}")
                checked += 1
        return f"{checked} (q, h) points"

    def pile_count():
        rng = np.random.default_rng(caps.seed + 2)
        qs = lambda n: [n ** -0.75, n ** -0.5, n ** -0.25]  # noqa: E731
        worst = 0.0
        for n in caps.pile_count_ns:
            for i in range(caps.pile_count_starts):
                r = make_q_rule(rational_q(qs(n)[i % 3]))
                p, _ = advance(r, random_partition(n, rng), n)
                _expect(p.ell <= 2 * math.sqrt(n), lambda: f"{r} n={n}: {p.ell} piles")
                worst = max(worst, p.ell / (2 * math.sqrt(n)))
        return f"largest ell / (2 sqrt n) = {worst:.3f}"

    def cycles():
        for n in range(1, caps.cycle_n + 1):
            for p in partitions_of(n):
                for r in rules[:11]:
                    c = find_cycle(r, p)
                    want = naive_cycle(r, p)
                    _expect((c.tail_length, c.cycle_length) == want, lambda: f"{r} {p}: {c} vs {want}")
        return f"n <= {caps.cycle_n}"

    return [
        _check("step_layers agrees with step, cards conserved", layers),
        _check("dominance preserved", dominance),
        _check("new pile size bound", new_pile),
        _check("pile lifetime bound", lifetime),
        _check("at most 2 sqrt(n) piles after n moves", pile_count),
        _check("find_cycle agrees with a hash-table oracle", cycles),
    ]


# stability -------------------------------------------------------------------


def fixpoints(rule: SigmaRule, n: int) -> list[Partition]:
    return [p for p in partitions_of(n) if step(rule, p) == p]


def _stability(caps: Caps) -> list[CheckResult]:
    rules = battery(caps.seed)

    def uniqueness():
        for n in range(1, caps.stable_n + 1):
            for r in rules:
                fx = fixpoints(r, n)
                _expect(len(fx) <= 1, lambda: f"{r} n={n}: {fx}")
                res = find_stable(r, n)
                _expect(res.found == bool(fx), lambda: f"{r} n={n}: find_stable says {res.found}")
                if fx:
                    _expect(res.config == fx[0], lambda: f"{r} n={n}: {res.config} vs {fx[0]}")
                    _expect(is_convex(fx[0]), lambda: f"{r} n={n}: fixpoint {fx[0]} not convex")
        return f"n <= {caps.stable_n}, {len(rules)} rules"

    def fixed():
        tops = sorted({int(v) for v in np.logspace(0, math.log10(caps.fixpoint_lambda1), 30)})
        for r in rules:
            for lam1 in tops:
                if r.h_max is not None and lam1 > r.h_max:
                    continue
                if r.kind == "q" and r.q < Fraction(1, 10) and lam1 > 10**4:
                    continue  # ordinary staircases are quadratic in size
                p = stable_from_top(r, lam1)
                _expect(step(r, p) == p, lambda: f"{r}: stable_from_top({lam1}) = {p} not fixed")
        return ""

    def gaps():
        for r in rules:
            top = caps.gap_lambda1 if r.h_max is None else min(caps.gap_lambda1, r.h_max)
            if r.kind == "q" and r.q < Fraction(1, 10):
                top = min(top, 1000)
            prev = stable_total(r, 1)
            for lam1 in range(1, top):
                ell = len(stable_from_top(r, lam1))
                cur = stable_total(r, lam1 + 1)
                _expect(prev < cur, lambda: f"{r}: T({lam1}) = {prev} >= T({lam1 + 1}) = {cur}")
                _expect(cur - prev <= ell + 1, lambda: f"{r}: gap {cur - prev} at {lam1}, ell {ell}")
                prev = cur
        return ""

    def convexity():
        for n in range(1, caps.convex_n + 1):
            for p in partitions_of(n):
                fixed_by_witness = is_convex(p) and step(rule_from_convex(p), p) == p
                _expect(is_convex(p) == fixed_by_witness, lambda: f"{p}")
        return f"n <= {caps.convex_n}"

    return [
        _check("at most one fixpoint, matching find_stable", uniqueness),
        _check("stable_from_top is a fixpoint", fixed),
        _check("totals strictly increase with gap <= ell + 1", gaps),
        _check("convex iff fixed by rule_from_convex", convexity),
    ]


# marked ----------------------------------------------------------------------


def marked_run(rule: SigmaRule, p: Partition, ref: Partition, max_steps: int = 10_000) -> int:
    """Run the marked solitaire until its state repeats, checking every invariant.

    Returns the number of moves made; raises _Fail on the first violation.
    """
    mc = mark(p, ref, rule)
    _expect(mc.live() == p and mc.reference_view() == ref.parts, lambda: f"{rule} {p} {ref}: round trip")
    offset = p.n - ref.n
    seen = {mc}
    live = p
    moves = 0
    while moves < max_steps:
        prev = mc
        try:
            mc = marked_step(rule, mc)
        except MarkedInvariantBroken as e:
            raise _Fail(f"{rule} {p} {ref} move {moves}: {e}")
        live = step(rule, live)
        moves += 1
        where = lambda: f"{rule} start {p} ref {ref} move {moves}: {mc.piles}"  # noqa: E731
        _expect(mc.live() == live, where)
        _expect(mc.reference_view() == ref.parts, where)
        _expect(mc.plus_total <= prev.plus_total and mc.minus_total <= prev.minus_total, where)
        _expect(mc.plus_total - mc.minus_total == offset, where)
        if mc in seen:
            break
        seen.add(mc)
    return moves


def _marked(caps: Caps) -> list[CheckResult]:
    def exhaustive():
        runs = 0
        for r in q_battery():
            for n in range(1, caps.marked_n + 1):
                ref = find_stable(r, n).config
                for p in partitions_of(n):
                    marked_run(r, p, ref)
                    runs += 1
        return f"{runs} runs"

    def randomized():
        rng = np.random.default_rng(caps.seed)
        rules = battery(caps.seed)
        for _ in range(caps.marked_trials):
            r = rules[int(rng.integers(len(rules)))]
            n = int(rng.integers(1, 41))
            ref = find_stable(r, int(rng.integers(1, n + 11))).config
            marked_run(r, random_partition(n, rng), ref, max_steps=400)
        return f"{caps.marked_trials} triples"

    return [
        _check("exhaustive marked runs against the n* reference", exhaustive),
        _check("random (rule, start, reference) triples", randomized),
    ]


# shapes ------------------------------------------------------------------------


def _shapes(caps: Caps) -> list[CheckResult]:
    def g_monotone():
        zs = np.linspace(1e-3, 60, 20001)
        g = [g_of_z(float(z)) for z in zs]
        _expect(all(a < b for a, b in zip(g, g[1:])), "g not strictly increasing")
        for k in range(1, 51):
            lo, hi = g_of_z(k - 1e-9), g_of_z(k + 1e-9)
            _expect(abs(hi - lo) < 1e-6, f"jump {hi - lo} at z={k}")
        return ""

    def interp():
        for C in np.logspace(-3, 3, 61):
            s = interpolating_shape(float(C))
            drop = sum(a * b for a, b in zip(s.widths, s.slopes))
            _expect(abs(drop - 1) <= 1e-9, f"C={C}: height drop {drop}")
            _expect(abs(s.area() - 1) <= 1e-9, f"C={C}: area {s.area()}")
            if C <= 0.5:
                _expect(s.widths == (2.0,) and s.slopes == (0.5,), f"C={C}: {s}")
        d = [sup_distance_to(interpolating_shape(C), EXPONENTIAL) for C in (10, 100, 1000)]
        _expect(d[0] > d[1] > d[2], f"distances to exp(-x): {d}")
        return f"distances to exp(-x): {[round(v, 5) for v in d]}"

    def construction():
        cases = [(TRIANGLE, 0.0, 10**4), (EXPONENTIAL, 0.0, 10**4), (TRIANGLE, 0.5, 5000)]
        cases += [(interpolating_shape(1.0), 1 / 3, 10**4), (interpolating_shape(1.0), 1 / 3, 999)]
        for phi, c, n in cases:
            p = shape_to_stable(phi, c, n)
            _expect(p.n == n and is_convex(p), f"{phi.kind} c={c} n={n}: {p.parts[:6]}")
            _expect(step(rule_from_convex(p), p) == p, f"{phi.kind} c={c} n={n}: not fixed")
        return ""

    def regimes():
        rows = regime_errors(caps.regime_ns)
        for name, errs in rows.items():
            _expect(all(a > b for a, b in zip(errs, errs[1:])), f"{name}: {errs}")
        return json.dumps({k: [round(v, 5) for v in errs] for k, errs in rows.items()})

    return [
        _check("g strictly increasing and continuous", g_monotone),
        _check("interpolating shapes: height, area, limits", interp),
        _check("shape_to_stable is convex and stable", construction),
        _check("regime convergence is monotone", regimes),
    ]


def regime_q(regime: str, n: int) -> Fraction:
    """q_n for a named regime: triangle, exponential, or interp:C."""
    if regime == "triangle":
        return rational_q(n ** -0.75)
    if regime == "exponential":
        return rational_q(n ** -0.25)
    if regime.startswith("interp:"):
        return rational_q(math.sqrt(float(regime[7:]) / n))
    raise ValueError(f"unknown regime {regime!r}")


def regime_target(regime: str):
    if regime == "triangle":
        return TRIANGLE
    if regime == "exponential":
        return EXPONENTIAL
    return interpolating_shape(float(regime[7:]))


def regime_distance(regime: str, n: int):
    """Distance of the n*-stable configuration to the regime's limit shape."""
    res = find_stable(make_q_rule(regime_q(regime, n)), n)
    return res, empirical_distance(res.config, None, regime_target(regime))


def regime_errors(ns, regimes=("triangle", "exponential", "interp:1", "interp:2.5")) -> dict[str, list[float]]:
    return {g: [regime_distance(g, n)[1].sup_error for n in ns] for g in regimes}


# conjecture ----------------------------------------------------------------------


def recurrent_deviation(rule: SigmaRule, n: int, workers: int | None = None) -> float:
    """Largest (surplus + deficit) / n over recurrent configurations, against the n* reference."""
    ref = find_stable(rule, n).config
    worst = 0
    for p in enumerate_recurrent(rule, n, workers=workers):
        d = deviation(p, ref)
        worst = max(worst, d.surplus_total + d.deficit_total)
    return worst / n


def conjecture_probe(n_max: int, qs=None, workers: int | None = None) -> dict:
    qs = qs or [Fraction(k, 10) for k in range(1, 10)]
    rows = []
    for n in range(1, n_max + 1):
        for q in qs:
            rows.append({"n": n, "q": f"{q.numerator}/{q.denominator}",
                         "max_deviation": recurrent_deviation(make_q_rule(q), n, workers)})
    means = [float(np.mean([r["max_deviation"] for r in rows if r["n"] == n])) for n in range(1, n_max + 1)]
    ns = np.arange(1, n_max + 1)
    slope = float(np.polyfit(ns, means, 1)[0]) if n_max > 1 else 0.0
    return {"rows": rows, "mean_by_n": means, "trend_slope": slope}


def _conjecture(caps: Caps) -> tuple[list[CheckResult], dict]:
    probe = conjecture_probe(caps.conjecture_n)

    def trend():
        _expect(probe["trend_slope"] <= 0, f"slope {probe['trend_slope']}")
        return f"least-squares slope of the mean over q: {probe['trend_slope']:.3g} (a measurement, not a proof)"

    return [_check("mean deviation trends down in n", trend)], probe


# entry point ---------------------------------------------------------------------


def run_suite(name: str, caps: Caps | None = None) -> list[Report]:
    caps = caps or Caps()
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, caps)]
    if name not in SUITES:
        raise UnknownSuite(f"{name!r}; choose from {', '.join(SUITES + ('all',))}")
    if name == "conjecture":
        checks, data = _conjecture(caps)
        return [Report(name, tuple(checks), data)]
    fn = {"core": _core, "rules": _rules, "dynamics": _dynamics, "stability": _stability,
          "marked": _marked, "shapes": _shapes}[name]
    return [Report(name, tuple(fn(caps)))]
