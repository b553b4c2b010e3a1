"""Compiled inner loops for long trajectories of well-behaved rules.

Configurations live in an int64 buffer sorted descending; ``ell`` is the
number of live piles. Because h - sigma(h) is monotone for well-behaved
rules, the shrunken piles stay sorted and only the new pile is inserted.
"""

from numba import njit


@njit(cache=True)
def _insert_desc(buf, j, value):
    i = j
    while i > 0 and buf[i - 1] < value:
        buf[i] = buf[i - 1]
        i -= 1
    buf[i] = value
    return j + 1


@njit(cache=True)
def advance_q(buf, ell, num, den, steps):
    """Apply ``steps`` moves of sigma(h) = ceil(num h / den).

    Returns ``(ell, max_sigma)``, the largest number of cards taken from a
    single pile over all moves (1 means every move was an ordinary move).
    """
    max_sigma = 0
    for _ in range(steps):
        total = 0
        j = 0
        for i in range(ell):
            h = buf[i]
            s = (num * h + den - 1) // den
            if s > max_sigma:
                max_sigma = s
            total += s
            r = h - s
            if r > 0:
                buf[j] = r
                j += 1
        ell = _insert_desc(buf, j, total)
    return ell, max_sigma


@njit(cache=True)
def advance_table(buf, ell, sig, steps):
    """Same as ``advance_q`` with sigma looked up in ``sig[h]``; returns ell = -1 past the table."""
    max_sigma = 0
    h_max = sig.shape[0] - 1
    for _ in range(steps):
        total = 0
        j = 0
        for i in range(ell):
            h = buf[i]
            if h > h_max:
                return -1, max_sigma
            s = sig[h]
            if s > max_sigma:
                max_sigma = s
            total += s
            r = h - s
            if r > 0:
                buf[j] = r
                j += 1
        ell = _insert_desc(buf, j, total)
    return ell, max_sigma
