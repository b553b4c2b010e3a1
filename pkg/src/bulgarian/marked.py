"""Surplus and deficit against a stable reference, and the marked solitaire.

Each pile of a marked configuration is a column of cards: unmarked cards at
the bottom, then either plus-cards or minus-cards on top (never both). The
plus and unmarked cards together form the live configuration; the minus and
unmarked cards together form the stable reference, pile by pile.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .dynamics import step
from .errors import MarkedInvariantBroken, NotStable
from .partitions import Partition, _trusted
from .rules import SigmaRule, picked_levels, require_well_behaved

UNMARKED, PLUS, MINUS = "u", "+", "-"


@dataclass(frozen=True)
class DeviationSummary:
    deviation: tuple[int, ...]
    surplus_total: int
    deficit_total: int


def deviation(p: Partition, ref: Partition) -> DeviationSummary:
    width = max(p.ell, ref.ell)
    d = tuple(p[i] - ref[i] for i in range(width))
    return DeviationSummary(d, sum(v for v in d if v > 0), sum(-v for v in d if v < 0))


@dataclass(frozen=True)
class MarkedConfig:
    piles: tuple[tuple[int, int, int], ...]  # (unmarked, plus, minus) per pile
    reference: Partition

    @property
    def plus_total(self) -> int:
        return sum(p for _, p, _ in self.piles)

    @property
    def minus_total(self) -> int:
        return sum(m for _, _, m in self.piles)

    def live(self) -> Partition:
        """Plus and unmarked cards, sorted into a partition."""
        return _trusted(sorted((u + p for u, p, _ in self.piles if u + p), reverse=True))

    def reference_view(self) -> tuple[int, ...]:
        """Minus and unmarked cards, pile by pile, trailing empties dropped."""
        view = [u + m for u, _, m in self.piles]
        while view and not view[-1]:
            view.pop()
        return tuple(view)

    def check(self) -> None:
        for i, (u, p, m) in enumerate(self.piles):
            if min(u, p, m) < 0 or (p and m):
                raise MarkedInvariantBroken(f"pile {i} holds {(u, p, m)}")
        if self.reference_view() != self.reference.parts:
            raise MarkedInvariantBroken(
                f"reference view {self.reference_view()} != {self.reference.parts}"
            )
        heights = [u + p for u, p, _ in self.piles]
        if any(a < b for a, b in zip(heights, heights[1:])):
            raise MarkedInvariantBroken(f"live piles out of order: {heights}")


def _require_stable(rule: SigmaRule, ref: Partition) -> None:
    if step(rule, ref) != ref:
        raise NotStable(f"{ref} is not a fixpoint of {rule}")


def mark(p: Partition, ref: Partition, rule: SigmaRule) -> MarkedConfig:
    """Mark surplus cards of ``p`` as plus-cards and pad deficits with minus-cards."""
    _require_stable(rule, ref)
    piles = []
    for i in range(max(p.ell, ref.ell)):
        a, b = p[i], ref[i]
        piles.append((min(a, b), max(a - b, 0), max(b - a, 0)))
    mc = MarkedConfig(tuple(piles), ref)
    mc.check()
    return mc


def _column(u: int, p: int, m: int) -> list[str]:
    return [UNMARKED] * u + [PLUS] * p + [MINUS] * m


def _counts(column: list[str]) -> tuple[int, int, int]:
    u = 0
    while u < len(column) and column[u] == UNMARKED:
        u += 1
    top = column[u:]
    if top and any(c != top[0] for c in top):
        raise MarkedInvariantBroken(f"mixed marks in one pile: {''.join(column)}")
    if not top:
        return u, 0, 0
    return (u, len(top), 0) if top[0] == PLUS else (u, 0, len(top))


def marked_step(rule: SigmaRule, mc: MarkedConfig) -> MarkedConfig:
    """One move of the marked solitaire.

    Picked layers form the new first pile, where plus- and minus-cards float up
    and cancel pairwise. Layers are then left-justified bottom to top; a
    minus-card of the new pile slides right past unmarked cards and cancels
    with the first plus-card it meets in its layer.
    """
    require_well_behaved(rule)
    columns = [_column(*pile) for pile in mc.piles]
    height = max((len(c) for c in columns), default=0)
    if not height:
        return mc
    picked = {h - 1 for h in picked_levels(rule, height)}

    new = {UNMARKED: 0, PLUS: 0, MINUS: 0}
    rest = []
    for col in columns:
        for j, card in enumerate(col):
            if j in picked:
                new[card] += 1
        rest.append([card for j, card in enumerate(col) if j not in picked])
    cancel = min(new[PLUS], new[MINUS])
    first = _column(new[UNMARKED] + cancel, new[PLUS] - cancel, new[MINUS] - cancel)
    columns = [first] + [c for c in rest if c]

    rows = []
    for j in range(max(len(c) for c in columns)):
        row = [c[j] if j < len(c) else None for c in columns]
        if row[0] == MINUS:
            i = 1
            while i < len(row) and row[i] == UNMARKED:
                row[i - 1], row[i] = UNMARKED, MINUS
                i += 1
            if i < len(row) and row[i] == PLUS:
                row[i - 1], row[i] = UNMARKED, None
        rows.append([c for c in row if c is not None])

    if any(len(a) < len(b) for a, b in zip(rows, rows[1:])):
        raise MarkedInvariantBroken("layers no longer form a diagram")
    width = len(rows[0]) if rows else 0
    piles = tuple(_counts([r[c] for r in rows if c < len(r)]) for c in range(width))
    out = MarkedConfig(piles, mc.reference)
    out.check()
    return out


def surplus_trace(
    rule: SigmaRule, p: Partition, ref: Partition, k: int
) -> list[tuple[int, int]]:
    """(plus_total, minus_total) before the first move and after each of ``k`` moves."""
    mc = mark(p, ref, rule)
    out = [(mc.plus_total, mc.minus_total)]
    for _ in range(k):
        mc = marked_step(rule, mc)
        out.append((mc.plus_total, mc.minus_total))
    return out


def trace_csv(trace: list[tuple[int, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "surplus", "deficit"])
    for t, (s, d) in enumerate(trace):
        w.writerow([t, s, d])
    return buf.getvalue()


def read_trace_csv(text: str) -> list[tuple[int, int]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if rows[0] != ["t", "surplus", "deficit"]:
        raise ValueError(f"unexpected header {rows[0]}")
    return [(int(s), int(d)) for _, s, d in rows[1:]]
