"""Integer partitions as card configurations.

A configuration of ``n`` cards is stored as its pile sizes sorted weakly
decreasing. Every accessor treats indices past the last pile as empty piles
of size zero, so ``p[i]`` never raises for ``i >= ell``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CardOverflow, EmptyPartition, NegativeX, NonPositivePart, NotSorted

INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=False)
class Partition:
    parts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def ell(self) -> int:
        return len(self.parts)

    def __getitem__(self, i: int) -> int:
        """Zero-based part access with a virtual zero tail."""
        if i < 0:
            raise IndexError(i)
        return self.parts[i] if i < len(self.parts) else 0

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    @property
    def top(self) -> int:
        return self.parts[0] if self.parts else 0

    def to_json(self) -> str:
        return json.dumps({"parts": list(self.parts)})

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        return validate_partition(json.loads(text)["parts"])


@dataclass(frozen=True)
class Composition:
    """Pile sizes in creation order; zeros allowed."""

    parts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.parts)


def _trusted(parts: Iterable[int]) -> Partition:
    # internal constructor for values already known to be sorted and positive
    return Partition(tuple(parts))


def validate_partition(raw: Sequence[int]) -> Partition:
    parts = tuple(int(v) for v in raw)
    total = 0
    for i, v in enumerate(parts):
        if v <= 0:
            raise NonPositivePart(f"part {i} is {v}")
        if i and parts[i - 1] < v:
            raise NotSorted(f"parts[{i - 1}]={parts[i - 1]} < parts[{i}]={v}")
        total += v
    if total > INT64_MAX:
        raise CardOverflow(f"total {total} exceeds 64-bit range")
    return Partition(parts)


def parse_partition(text: str) -> Partition:
    """Parse a comma-separated literal such as ``"7,3,2"``; empty text is the empty partition."""
    text = text.strip().strip("()")
    if not text:
        return Partition(())
    return validate_partition([int(tok) for tok in text.split(",") if tok.strip()])


def dominates(kappa: Partition, lam: Partition) -> bool:
    """True iff ``lam[i] <= kappa[i]`` for every index, virtual zeros included."""
    if lam.ell > kappa.ell:
        return False
    return all(a <= b for a, b in zip(lam.parts, kappa.parts))


def is_convex(p: Partition) -> bool:
    parts = p.parts + (0, 0)
    diffs = [parts[i] - parts[i + 1] for i in range(len(parts) - 1)]
    return all(d >= 0 for d in diffs) and all(
        diffs[i] >= diffs[i + 1] for i in range(len(diffs) - 1)
    )


def boundary(p: Partition, x: float) -> int:
    """Diagram-boundary function: height of the column containing abscissa ``x``."""
    if x < 0:
        raise NegativeX(x)
    return p[math.floor(x)]


def _floor_scaled(x, n: int, lam1: int) -> int:
    if isinstance(x, (int, Fraction)):
        return math.floor(Fraction(x) * n / lam1)
    return math.floor(x * (n / lam1))


def downscale_boundary(p: Partition, n: int, x) -> float:
    """Boundary rescaled to unit height and unit area for a deck of ``n`` cards.

    Rational ``x`` (int or Fraction) gives an exact column index; float ``x``
    is floored after a single multiplication.
    """
    if not p.parts:
        raise EmptyPartition("cannot downscale the empty partition")
    if x < 0:
        raise NegativeX(x)
    lam1 = p.parts[0]
    return p[_floor_scaled(x, n, lam1)] / lam1


def scaled_boundary(p: Partition, a: float, x: float) -> float:
    """Boundary under an arbitrary scaling factor ``a``: ``(a/n) * p[floor(a x)]``.

    ``downscale_boundary`` is the special case ``a = n / p.top``.
    """
    if not p.parts:
        raise EmptyPartition("cannot scale the empty partition")
    if x < 0:
        raise NegativeX(x)
    return a / p.n * p[math.floor(a * x)]


def sort_to_partition(c: Composition | Sequence[int]) -> Partition:
    parts = c.parts if isinstance(c, Composition) else tuple(c)
    return _trusted(sorted((v for v in parts if v > 0), reverse=True))


def enumerate_partitions(n: int) -> Iterator[Partition]:
    """Yield every partition of ``n`` once, in lexicographically descending order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        yield Partition(())
        return
    a = [n]
    while True:
        yield Partition(tuple(a))
        # drop trailing ones, decrement the last part > 1, refill greedily
        ones = 0
        while a and a[-1] == 1:
            a.pop()
            ones += 1
        if not a:
            return
        k = a.pop() - 1
        rest = ones + 1
        a.append(k)
        while rest > k:
            a.append(k)
            rest -= k
        if rest:
            a.append(rest)


def canonical_order(parts: Iterable[Partition]) -> list[Partition]:
    return sorted(parts, key=lambda p: p.parts, reverse=True)


def random_partition(n: int, rng: np.random.Generator) -> Partition:
    """Sort a uniformly random composition of ``n`` with a uniformly random number of parts."""
    if n == 0:
        return Partition(())
    k = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(n - 1, size=k - 1, replace=False) + 1) if k > 1 else np.empty(0, int)
    edges = np.concatenate(([0], cuts, [n]))
    return sort_to_partition(np.diff(edges).tolist())


def boundary_samples_csv(p: Partition, n: int, grid: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for x in sorted(grid):
        w.writerow([repr(float(x)), repr(downscale_boundary(p, n, x))])
    return buf.getvalue()


def read_boundary_samples_csv(text: str) -> list[tuple[float, float]]:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["x", "y"]:
        raise ValueError(f"unexpected header {rows[0]}")
    return [(float(x), float(y)) for x, y in rows[1:]]
