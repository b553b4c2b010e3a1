"""Stable configurations (fixpoints of the move) and the largest stable deck size n*."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NotWellBehaved, SigmaBarDecreasing
from .partitions import Partition, _trusted
from .rules import SigmaRule, require_well_behaved


@dataclass(frozen=True)
class StableSearchResult:
    found: bool
    config: Partition
    n_star: int
    lambda1: int

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "n_star": self.n_star,
            "lambda1": self.lambda1,
            "parts": list(self.config.parts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_sigma_bar(rule: SigmaRule, lambda1: int) -> None:
    if rule.kind != "table":
        return
    prev = 0
    for h in range(1, lambda1 + 1):
        cur = rule.sigma_bar(h)
        if cur < prev:
            raise SigmaBarDecreasing(f"sigma_bar({h}) = {cur} < sigma_bar({h - 1}) = {prev}")
        prev = cur


def stable_from_top(rule: SigmaRule, lambda1: int) -> Partition:
    """Chain lambda1, sigma_bar(lambda1), sigma_bar(sigma_bar(lambda1)), ... down to zero."""
    if lambda1 < 1:
        raise ValueError("lambda1 must be >= 1")
    _check_sigma_bar(rule, lambda1)
    return _trusted(_chain(rule, lambda1))


def _chain(rule: SigmaRule, h: int) -> list[int]:
    out = []
    bar = rule.sigma_bar
    while h > 0:
        out.append(h)
        nxt = bar(h)
        if nxt >= h:
            # sigma(h) = 0 would never terminate
            raise NotWellBehaved(f"sigma({h}) = 0")
        h = nxt
    return out


def stable_total(rule: SigmaRule, lambda1: int) -> int:
    """Card count of the stable configuration with top pile ``lambda1``."""
    return sum(_chain(rule, lambda1))


def find_stable(rule: SigmaRule, n: int, hint: int | None = None) -> StableSearchResult:
    """The stable configuration of ``n`` cards if any, else the one for n*.

    Card totals grow strictly with the top pile, so the largest top pile whose
    total fits in ``n`` is found by galloping from ``hint`` and bisecting.
    """
    require_well_behaved(rule)
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = n if rule.h_max is None else min(n, rule.h_max)
    probes: dict[int, int] = {}

    def total(lam1: int) -> int:
        t = probes.get(lam1)
        if t is None:
            t = probes[lam1] = stable_total(rule, lam1)
        return t

    lo = 1 if hint is None else max(1, min(hint, cap))
    if total(lo) > n:
        hi = lo
        lo = 1
    else:
        width = 1
        hi = lo
        while hi < cap and total(hi) <= n:
            lo = hi
            hi = min(cap, hi + width)
            width *= 2
        if total(hi) <= n:
            lo = hi
    # invariant: total(lo) <= n, and hi == lo or total(hi) > n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if total(mid) <= n:
            lo = mid
        else:
            hi = mid
    _assert_monotone(probes)
    config = stable_from_top(rule, lo)
    t = total(lo)
    return StableSearchResult(t == n, config, t, lo)


def _assert_monotone(probes: dict[int, int]) -> None:
    keys = sorted(probes)
    for a, b in zip(keys, keys[1:]):
        if probes[a] >= probes[b]:
            raise AssertionError(f"stable totals not increasing: T({a})={probes[a]}, T({b})={probes[b]}")


def n_star(rule: SigmaRule, n: int, hint: int | None = None) -> StableSearchResult:
    return find_stable(rule, n, hint)


def n_star_sweep(rule: SigmaRule, ns) -> list[StableSearchResult]:
    """n* over ascending deck sizes, reusing each top pile as the next warm start."""
    out = []
    hint = None
    for n in ns:
        res = find_stable(rule, n, hint)
        hint = res.lambda1
        out.append(res)
    return out


def is_fixpoint(rule: SigmaRule, p: Partition) -> bool:
    from .dynamics import step

    return step(rule, p) == p
