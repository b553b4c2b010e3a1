"""Picking rules: how many cards are taken from a pile of a given size.

Three kinds are supported:

* ``q``: proportion rule, ``sigma(h) = ceil(q h)`` with ``q`` an exact rational
  in (0, 1]; defined for every pile size.
* ``table``: explicit values ``sigma(1..h_max)``; may be badly behaved.
* ``levels``: the geometric form of a well-behaved rule, given by the sorted
  set of picked layer heights; ``sigma(h)`` counts the levels ``<= h``.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import (
    MissingLevelOne,
    NotConvex,
    NotWellBehaved,
    PileTooLarge,
    QOutOfRange,
    SigmaExceedsPile,
    Unsorted,
)
from .partitions import Partition, is_convex


# q = 1 / 2**62 picks one card from every pile up to 2**62 cards
_ORDINARY_Q = Fraction(1, 2**62)


@dataclass(frozen=True)
class WellBehavedReport:
    ok: bool
    violations: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class SigmaRule:
    kind: str
    q: Fraction | None = None
    table: tuple[int, ...] | None = None
    levels: tuple[int, ...] | None = None
    h_max: int | None = None
    # P(h) for h = 0..h_max, built once for bounded well-behaved rules
    _pick: tuple[int, ...] | None = field(default=None, repr=False, compare=False)

    def sigma(self, h: int) -> int:
        if h <= 0:
            return 0
        if self.kind == "q":
            num, den = self.q.numerator, self.q.denominator
            return -(-num * h // den)
        if h > self.h_max:
            raise PileTooLarge(f"rule defined up to {self.h_max}, pile has {h}")
        if self.kind == "table":
            return self.table[h - 1]
        return bisect_right(self.levels, h)

    def sigma_bar(self, h: int) -> int:
        return h - self.sigma(h)

    def supports(self, h: int) -> bool:
        return self.h_max is None or h <= self.h_max

    @property
    def bounded(self) -> bool:
        return self.h_max is not None

    def __str__(self) -> str:
        if self.kind == "q":
            if self.q == _ORDINARY_Q:
                return "ordinary"
            return f"q:{self.q.numerator}/{self.q.denominator}"
        if self.kind == "levels":
            return "levels:" + ",".join(map(str, self.levels)) + f"@{self.h_max}"
        return "table:" + ",".join(map(str, self.table))

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "q":
            return {"type": "q", "q": f"{self.q.numerator}/{self.q.denominator}"}
        if self.kind == "table":
            return {"type": "table", "sigma": list(self.table)}
        return {"type": "levels", "H": list(self.levels), "h_max": self.h_max}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SigmaRule":
        t = d["type"]
        if t == "q":
            return make_q_rule(Fraction(d["q"]))
        if t == "table":
            return make_table_rule(d["sigma"])
        if t == "levels":
            return make_levels_rule(d["H"], d["h_max"])
        raise ValueError(f"unknown rule type {t!r}")

    @classmethod
    def from_json(cls, text: str) -> "SigmaRule":
        return cls.from_dict(json.loads(text))


def make_q_rule(q) -> SigmaRule:
    q = Fraction(q)
    if not (0 < q <= 1):
        raise QOutOfRange(f"q={q} not in (0, 1]")
    return SigmaRule("q", q=q)


def make_table_rule(values: Sequence[int]) -> SigmaRule:
    values = tuple(int(v) for v in values)
    for h, s in enumerate(values, start=1):
        if not 0 <= s <= h:
            raise SigmaExceedsPile(f"sigma({h})={s}")
    rule = SigmaRule("table", table=values, h_max=len(values))
    return _with_pick_table(rule)


def make_levels_rule(levels: Sequence[int], h_max: int) -> SigmaRule:
    levels = tuple(int(v) for v in levels)
    if not levels or levels[0] != 1:
        raise MissingLevelOne(f"levels {levels} must start with 1")
    if any(a >= b for a, b in zip(levels, levels[1:])):
        raise Unsorted(f"levels {levels} not strictly increasing")
    levels = tuple(v for v in levels if v <= h_max)
    return _with_pick_table(SigmaRule("levels", levels=levels, h_max=int(h_max)))


def ordinary_rule(h_max: int | None = None) -> SigmaRule:
    """Classic Bulgarian solitaire: one card from every pile."""
    if h_max is None:
        return make_q_rule(_ORDINARY_Q)
    return make_levels_rule([1], h_max)


def rational_q(value: float, max_den: int = 10**12) -> Fraction:
    """Exact rational stand-in for an irrational proportion such as ``n ** -0.75``."""
    return Fraction(value).limit_denominator(max_den)


def parse_rule(text: str) -> SigmaRule:
    """Parse ``q:3/10``, ``levels:1,4@7``, ``table:1,1,3``, ``ordinary[@h]`` or a JSON file path."""
    text = text.strip()
    if text.startswith("q:"):
        return make_q_rule(Fraction(text[2:]))
    if text.startswith("levels:"):
        body, _, hmax = text[7:].partition("@")
        levels = [int(t) for t in body.split(",") if t]
        return make_levels_rule(levels, int(hmax) if hmax else max(levels))
    if text.startswith("table:"):
        return make_table_rule([int(t) for t in text[6:].split(",") if t])
    if text.startswith("ordinary"):
        _, _, hmax = text.partition("@")
        return ordinary_rule(int(hmax) if hmax else None)
    return SigmaRule.from_json(Path(text).read_text())


# well-behavedness and levels ------------------------------------------------


def is_well_behaved(rule: SigmaRule, h_max: int | None = None) -> WellBehavedReport:
    """Check sigma(1) = 1 and that sigma and h - sigma never decrease on 1..h_max."""
    h_max = rule.h_max if h_max is None else h_max
    if h_max is None:
        raise ValueError("an unbounded rule needs an explicit h_max")
    violations = []
    prev = 0
    for h in range(1, h_max + 1):
        s = rule.sigma(h)
        if h == 1 and s != 1:
            violations.append((1, "sigma(1) != 1"))
        elif h > 1:
            step = s - prev
            if step < 0:
                violations.append((h, "sigma decreases"))
            elif step > 1:
                violations.append((h, "sigma_bar decreases"))
        prev = s
    return WellBehavedReport(not violations, tuple(violations))


def require_well_behaved(rule: SigmaRule) -> None:
    """Raise NotWellBehaved unless the rule is well-behaved on its whole domain."""
    if rule.kind in ("q", "levels"):
        return
    if rule._pick is None:
        report = is_well_behaved(rule)
        raise NotWellBehaved(f"{rule}: {list(report.violations[:3])}")


def picked_levels(rule: SigmaRule, h_max: int) -> list[int]:
    """Heights of the picked layers up to ``h_max``: the h where sigma steps up."""
    if rule.kind == "levels":
        return [h for h in rule.levels if h <= h_max]
    if rule.kind == "q":
        num, den = rule.q.numerator, rule.q.denominator
        out = []
        i = 1
        while True:
            # smallest h with q h > i - 1
            h = (i - 1) * den // num + 1
            if h > h_max:
                return out
            out.append(h)
            i += 1
    report = is_well_behaved(rule, h_max)
    if not report.ok:
        raise NotWellBehaved(str(report.violations[:3]))
    return [h for h in range(1, h_max + 1) if rule.sigma(h) > rule.sigma(h - 1)]


def _is_level(rule: SigmaRule, h: int) -> bool:
    return h == 1 or rule.sigma(h) > rule.sigma(h - 1)


def _with_pick_table(rule: SigmaRule) -> SigmaRule:
    if not is_well_behaved(rule).ok:
        return rule
    pick = [0] * (rule.h_max + 1)
    for h in range(1, rule.h_max + 1):
        pick[h] = h if _is_level(rule, h) else pick[h - rule.sigma(h)]
    object.__setattr__(rule, "_pick", tuple(pick))
    return rule


def pick_level(rule: SigmaRule, h: int) -> int:
    """Level at which a card now at height ``h`` will eventually be picked."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if rule.kind != "q":
        if rule._pick is None:
            raise NotWellBehaved(str(rule))
        if h > rule.h_max:
            raise PileTooLarge(f"rule defined up to {rule.h_max}")
        return rule._pick[h]
    while not _is_level(rule, h):
        h -= rule.sigma(h)
    return h


def rule_from_convex(p: Partition) -> SigmaRule:
    """A levels rule of which the convex partition ``p`` is a fixpoint.

    Between consecutive parts ``(p[i+1], p[i]]`` the required number of levels
    is chosen from the bottom of the interval.
    """
    if not p.parts or not is_convex(p):
        raise NotConvex(str(p))
    lam = p.parts + (0, 0)
    levels = []
    for i in range(p.ell):
        need = (lam[i] - lam[i + 1]) - (lam[i + 1] - lam[i + 2])
        levels.extend(range(lam[i + 1] + 1, lam[i + 1] + 1 + need))
    return make_levels_rule(sorted(levels), p.parts[0])
