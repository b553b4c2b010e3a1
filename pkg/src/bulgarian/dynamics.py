"""The solitaire move, trajectories, and cycle structure."""

from __future__ import annotations

import json
import math
import os
from bisect import insort
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import BoundViolation, NoConvergence, NotWellBehaved, PileTooLarge, TooLarge
from .partitions import Partition, _trusted, canonical_order, enumerate_partitions, validate_partition
from .rules import SigmaRule, picked_levels, require_well_behaved

MAX_RECURRENT_N = 45
# below this many pile updates the interpreted step is faster than a kernel call
_KERNEL_MIN_WORK = 4096


def _well_behaved(rule: SigmaRule) -> bool:
    return rule.kind != "table" or rule._pick is not None


def step(rule: SigmaRule, p: Partition) -> Partition:
    """One move: take sigma(h) cards from every pile of size h and stack them as a new pile."""
    sig = rule.sigma
    taken = [sig(h) for h in p.parts]
    rest = [h - s for h, s in zip(p.parts, taken) if h > s]
    new = sum(taken)
    if not new:
        return p
    if _well_behaved(rule):
        # remaining piles are still sorted; only the new pile needs placing
        insort(rest, new, key=lambda v: -v)
        return _trusted(rest)
    rest.append(new)
    rest.sort(reverse=True)
    return _trusted(rest)


def _conjugate(parts) -> list[int]:
    if not parts:
        return []
    counts = [0] * (parts[0] + 1)
    for v in parts:
        counts[v] += 1
    out = []
    running = 0
    for h in range(parts[0], 0, -1):
        running += counts[h]
        out.append(running)
    return out[::-1]


def step_layers(rule: SigmaRule, p: Partition) -> Partition:
    """The same move computed on the Young diagram's layers instead of its piles.

    The picked layers are cut out, the surviving layers drop down, and the cut
    cards become a new leftmost column; each layer is then left-justified.
    """
    require_well_behaved(rule)
    if not p.parts:
        return p
    if not rule.supports(p.top):
        raise PileTooLarge(f"rule defined up to {rule.h_max}, pile has {p.top}")
    rows = _conjugate(p.parts)
    picked = set(picked_levels(rule, p.top))
    new_column = sum(rows[h - 1] for h in picked)
    kept = [r for level, r in enumerate(rows, start=1) if level not in picked]
    kept += [0] * (new_column - len(kept))
    rows = [r + 1 if level < new_column else r for level, r in enumerate(kept)]
    return _trusted(_conjugate([r for r in rows if r]))


def new_pile_size(rule: SigmaRule, p: Partition) -> int:
    return sum(rule.sigma(h) for h in p.parts)


def check_new_pile_bound(rule: SigmaRule, p: Partition) -> None:
    """For a proportion rule the new pile lies in ``[n q, n q + m)`` with m nonempty piles."""
    if rule.kind != "q":
        return
    size = new_pile_size(rule, p)
    lower = p.n * rule.q
    if not (lower <= size < lower + p.ell or (p.ell == 0 and size == 0)):
        raise BoundViolation(f"new pile {size} outside [{lower}, {lower} + {p.ell}) from {p}")


# long runs -----------------------------------------------------------------


def _kernel_for(rule: SigmaRule, n: int):
    from . import _kernels

    if not _well_behaved(rule):
        return None
    if rule.kind == "q":
        num, den = rule.q.numerator, rule.q.denominator
        if num * max(n, 1) + den >= 2**63:
            return None
        return lambda buf, ell, k: _kernels.advance_q(buf, ell, num, den, k)
    top = min(rule.h_max, n)
    sig = np.array([rule.sigma(h) for h in range(top + 1)], dtype=np.int64)
    return lambda buf, ell, k: _kernels.advance_table(buf, ell, sig, k)


def advance(rule: SigmaRule, p: Partition, k: int) -> tuple[Partition, int]:
    """Apply ``k`` moves; also return the most cards taken from one pile in any move."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = p.n
    kernel = _kernel_for(rule, n) if k * max(p.ell, 1) >= _KERNEL_MIN_WORK else None
    if kernel is None:
        most = 0
        for _ in range(k):
            if p.parts:
                most = max(most, rule.sigma(p.top))
            p = step(rule, p)
        return p, most
    buf = np.zeros(n + 2, dtype=np.int64)
    buf[: p.ell] = p.parts
    ell, most = kernel(buf, p.ell, k)
    if ell < 0:
        raise PileTooLarge(f"a pile outgrew the rule table (h_max={rule.h_max})")
    return _trusted(buf[:ell].tolist()), int(most)


def iterate(rule: SigmaRule, p: Partition, k: int) -> Partition:
    return advance(rule, p, k)[0]


@dataclass(frozen=True)
class Trajectory:
    start: Partition
    steps: tuple[tuple[int, Partition], ...]
    rule: SigmaRule = field(repr=False)

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"t": t, "parts": list(p.parts)}) + "\n" for t, p in self.steps)

    @staticmethod
    def read_jsonl(text: str) -> list[tuple[int, Partition]]:
        out = []
        for line in text.splitlines():
            if line.strip():
                row = json.loads(line)
                if "t" not in row:
                    continue  # header line
                out.append((row["t"], validate_partition(row["parts"])))
        return out


def trajectory(
    rule: SigmaRule, p: Partition, k: int, every: int = 1, diagnostics: bool = False
) -> Trajectory:
    """Record ``p`` and every ``every``-th configuration over ``k`` moves.

    With ``diagnostics`` on, each move of a proportion rule is checked against
    the new-pile bound and BoundViolation is raised on the first failure.
    """
    start = p
    steps = [(0, p)]
    for t in range(1, k + 1):
        if diagnostics:
            check_new_pile_bound(rule, p)
        p = step(rule, p)
        if t % every == 0 or t == k:
            steps.append((t, p))
    return Trajectory(start, tuple(steps), rule)


def iter_orbit(rule: SigmaRule, p: Partition) -> Iterator[Partition]:
    while True:
        yield p
        p = step(rule, p)


# cycles ----------------------------------------------------------------------


@dataclass(frozen=True)
class CycleInfo:
    tail_length: int
    cycle_length: int
    cycle: tuple[Partition, ...]

    def to_dict(self) -> dict:
        return {
            "tail": self.tail_length,
            "period": self.cycle_length,
            "cycle": [list(p.parts) for p in self.cycle],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CycleInfo":
        d = json.loads(text)
        return cls(d["tail"], d["period"], tuple(validate_partition(c) for c in d["cycle"]))


def find_cycle(rule: SigmaRule, p: Partition, max_steps: int | None = None) -> CycleInfo:
    """Tail and period of the orbit of ``p`` in constant memory (Brent), then the cycle itself."""
    f = lambda x: step(rule, x)  # noqa: E731
    power = period = 1
    tortoise, hare = p, f(p)
    spent = 1
    while tortoise != hare:
        if power == period:
            tortoise = hare
            power *= 2
            period = 0
        hare = f(hare)
        period += 1
        spent += 1
        if max_steps is not None and spent > max_steps:
            raise NoConvergence(f"no cycle within {max_steps} moves")
    tortoise = hare = p
    for _ in range(period):
        hare = f(hare)
    tail = 0
    while tortoise != hare:
        tortoise, hare = f(tortoise), f(hare)
        tail += 1
    cycle = [tortoise]
    for _ in range(period - 1):
        cycle.append(f(cycle[-1]))
    return CycleInfo(tail, period, tuple(cycle))


def _recurrent_from(rule: SigmaRule, starts: list[Partition]) -> set[Partition]:
    settled: set[Partition] = set()
    recurrent: set[Partition] = set()
    for x in starts:
        on_path: dict[Partition, int] = {}
        path = []
        while x not in settled and x not in on_path:
            on_path[x] = len(path)
            path.append(x)
            x = step(rule, x)
        if x in on_path:
            recurrent.update(path[on_path[x]:])
        settled.update(path)
    return recurrent


def default_workers() -> int:
    return max(1, int(os.environ.get("BULGARIAN_WORKERS", "1")))


def enumerate_recurrent(
    rule: SigmaRule, n: int, max_n: int = MAX_RECURRENT_N, workers: int | None = None
) -> list[Partition]:
    """All configurations of ``n`` cards lying on a cycle, in canonical order."""
    if n > max_n:
        raise TooLarge(f"n={n} exceeds enumeration bound {max_n}")
    starts = list(enumerate_partitions(n))
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        found = _recurrent_from(rule, starts)
    else:
        shards = [starts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = set().union(*pool.map(_recurrent_from, [rule] * workers, shards))
    return canonical_order(found)


def pile_lifetime(rule: SigmaRule, h: int) -> int:
    """Moves until a lone pile of size ``h`` is used up, ignoring the piles it feeds."""
    require_well_behaved(rule)
    moves = 0
    while h > 0:
        s = rule.sigma(h)
        if s <= 0:
            raise NotWellBehaved(f"sigma({h}) = 0")
        h -= s
        moves += 1
    return moves


def lifetime_bound(q: Fraction, h: int) -> float:
    """Upper bound on ``pile_lifetime`` for a proportion rule when ``q h >= 1``."""
    return (math.log(q * h) + 1) / q
