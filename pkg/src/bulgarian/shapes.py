"""Limit shapes of stable configurations under proportion rules.

Shapes are functions on x >= 0 starting at height 1 (the downscaled boundary
of a configuration has unit height and unit area):

* triangle ``max(0, 1 - x/2)``,
* exponential ``exp(-x)``,
* interpolating: a convex piecewise-linear curve with ``ceil(z)`` sections,
  where ``z`` solves ``g(z) = 2C`` for ``C = lim n q**2``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    AreaExceedsOne,
    DerivativeNotMultipleOfC,
    EmptyPartition,
    NoConvergence,
    NonPositiveC,
    NonPositiveZ,
    NotConvexShape,
    QOutOfRange,
)
from .partitions import Partition, _trusted, downscale_boundary, scaled_boundary

C_LO = 0.05
C_HI = 50.0
SHAPE_TOL = 1e-9
Z_TOL = 1e-12
Z_MAX_ITER = 200


@dataclass(frozen=True)
class LimitShape:
    kind: str  # "triangle" | "exponential" | "interpolating" | "piecewise" | "steps"
    C: float | None = None
    z: float | None = None
    widths: tuple[float, ...] = ()
    slopes: tuple[float, ...] = ()  # magnitudes of the (downward) slopes
    heights: tuple[float, ...] = ()  # "steps" only: constant value on each section

    @property
    def Z(self) -> int | None:
        return math.ceil(self.z) if self.z is not None else None

    @property
    def linear(self) -> bool:
        return self.kind in ("interpolating", "piecewise")

    @property
    def height(self) -> float:
        if self.kind == "steps":
            return self.heights[0] if self.heights else 0.0
        if self.linear:
            return math.fsum(s * a for s, a in zip(self.slopes, self.widths))
        return 1.0

    @property
    def support_end(self) -> float:
        """Where the shape reaches zero; infinity for the exponential."""
        if self.kind == "triangle":
            return 2.0
        if self.kind == "exponential":
            return math.inf
        if self.kind == "steps":
            return self.widths[0] * len(self.heights) if self.heights else 0.0
        return math.fsum(self.widths)

    def __call__(self, x: float) -> float:
        return shape_eval(self, x)

    def right_derivative(self, x: float) -> float:
        if self.kind == "triangle":
            return -0.5 if x < 2.0 else 0.0
        if self.kind == "exponential":
            return -math.exp(-x)
        if self.kind == "steps":
            raise NotConvexShape("a step function has no finite derivative at its drops")
        left = 0.0
        for a, s in zip(self.widths, self.slopes):
            if x < left + a:
                return -s
            left += a
        return 0.0

    def area(self) -> float:
        if self.kind == "steps":
            return math.fsum(h * self.widths[0] for h in self.heights)
        if not self.linear:
            return 1.0
        y = self.height
        total = []
        for a, s in zip(self.widths, self.slopes):
            total.append(a * (y - s * a / 2))
            y -= s * a
        return math.fsum(total)

    def to_dict(self) -> dict:
        if self.kind in ("triangle", "exponential"):
            return {"kind": self.kind}
        if self.kind == "steps":
            return {"kind": "steps", "width": self.widths[0], "heights": list(self.heights)}
        d = {"kind": self.kind, "widths": list(self.widths), "slopes": list(self.slopes)}
        if self.kind == "interpolating":
            d = {"kind": self.kind, "C": self.C, "z": self.z, **d}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "LimitShape":
        kind = d["kind"]
        if kind in ("triangle", "exponential"):
            return cls(kind)
        if kind == "steps":
            return cls(kind, widths=(d["width"],) * len(d["heights"]), heights=tuple(d["heights"]))
        return cls(
            kind,
            C=d.get("C"),
            z=d.get("z"),
            widths=tuple(d["widths"]),
            slopes=tuple(d["slopes"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "LimitShape":
        return cls.from_dict(json.loads(text))


TRIANGLE = LimitShape("triangle")
EXPONENTIAL = LimitShape("exponential")


def piecewise_shape(widths: Sequence[float], slopes: Sequence[float]) -> LimitShape:
    """A generic piecewise-linear shape ending at zero; slopes are downward magnitudes."""
    return LimitShape("piecewise", widths=tuple(map(float, widths)), slopes=tuple(map(float, slopes)))


def staircase_shape(p: Partition, n: int | None = None) -> LimitShape:
    """The downscaled boundary of ``p`` itself, as a shape."""
    if not p.parts:
        raise EmptyPartition("empty partition has no shape")
    n = p.n if n is None else n
    w = p.top / n
    return LimitShape("steps", widths=(w,) * p.ell, heights=tuple(v / p.top for v in p.parts))


def shape_eval(shape: LimitShape, x: float) -> float:
    if shape.kind == "steps":
        k = math.floor(x / shape.widths[0]) if shape.widths else 0
        return shape.heights[k] if k < len(shape.heights) else 0.0
    if shape.kind == "triangle":
        return max(0.0, 1.0 - x / 2)
    if shape.kind == "exponential":
        return math.exp(-x)
    y = shape.height
    left = 0.0
    for a, s in zip(shape.widths, shape.slopes):
        if x < left + a:
            return max(0.0, y - s * (x - left))
        y -= s * a
        left += a
    return 0.0


# the z-equation -------------------------------------------------------------


def _harmonic(k: int) -> float:
    return math.fsum(1.0 / i for i in range(1, k + 1))


def g_of_z(z: float) -> float:
    """``(z^2 + Z^2)/Z - H_Z`` with ``Z = ceil(z)`` and ``H_Z`` the harmonic number."""
    if z <= 0:
        raise NonPositiveZ(z)
    k = math.ceil(z)
    return (z * z + k * k) / k - _harmonic(k)


def solve_z(C: float) -> float:
    """The unique ``z > 0`` with ``g_of_z(z) = 2 C``.

    Closed form ``sqrt(2C)`` on the first unit interval; otherwise scan
    integers for the bracketing interval ``(k-1, k]`` and bisect inside it.
    """
    if C <= 0:
        raise NonPositiveC(C)
    target = 2.0 * C
    if target <= 1.0:
        return math.sqrt(target)
    k = 1
    h = 1.0
    while 2 * k - h < target:
        k += 1
        h += 1.0 / k
    lo, hi = float(k - 1), float(k)
    g = lambda z: (z * z + k * k) / k - h  # noqa: E731  # g on (k-1, k]
    for _ in range(Z_MAX_ITER):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm - target) <= Z_TOL or mid in (lo, hi):
            return mid
        if gm < target:
            lo = mid
        else:
            hi = mid
    raise NoConvergence(f"z-equation for C={C} not solved in {Z_MAX_ITER} bisections")


def interpolating_shape(C: float) -> LimitShape:
    z = solve_z(C)
    k = math.ceil(z)
    if k == 1:
        # z*z == 2C analytically: a single section, the triangle itself
        return LimitShape("interpolating", C=float(C), z=z, widths=(2.0,), slopes=(0.5,))
    widths = [(z / C) * (1 + z - k) / k] + [(z / C) / (k - i) for i in range(1, k)]
    slopes = [C * (k - i) / (z * z) for i in range(k)]
    shape = LimitShape("interpolating", C=float(C), z=z, widths=tuple(widths), slopes=tuple(slopes))
    if abs(shape.height - 1) > SHAPE_TOL or abs(shape.area() - 1) > SHAPE_TOL:
        raise NoConvergence(f"C={C}: height {shape.height}, area {shape.area()}")
    return shape


def regime_shape(q, n: int, c_lo: float = C_LO, c_hi: float = C_HI) -> LimitShape:
    """Finite-n stand-in for the limit shape, classified by ``C_n = n q^2``."""
    q = Fraction(q)
    if not (0 < q <= 1):
        raise QOutOfRange(q)
    C = float(n * q * q)
    if C <= c_lo:
        return TRIANGLE
    if C >= c_hi:
        return EXPONENTIAL
    return interpolating_shape(C)


# empirical comparison ------------------------------------------------------------


@dataclass(frozen=True)
class ShapeDistance:
    grid: tuple[float, ...]
    empirical: tuple[float, ...]
    analytic: tuple[float, ...]
    errors: tuple[float, ...] = field(init=False)
    sup_error: float = field(init=False)

    def __post_init__(self):
        errs = tuple(abs(a - b) for a, b in zip(self.empirical, self.analytic))
        object.__setattr__(self, "errors", errs)
        object.__setattr__(self, "sup_error", max(errs, default=0.0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "empirical", "analytic", "abs_error"])
        for row in zip(self.grid, self.empirical, self.analytic, self.errors):
            w.writerow([repr(float(v)) for v in row])
        buf.write(f"# sup_error={self.sup_error!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ShapeDistance":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        rows = list(csv.reader(lines))
        if rows[0] != ["x", "empirical", "analytic", "abs_error"]:
            raise ValueError(f"unexpected header {rows[0]}")
        cols = list(zip(*[[float(v) for v in r] for r in rows[1:]])) or [(), (), (), ()]
        return cls(tuple(cols[0]), tuple(cols[1]), tuple(cols[2]))


def default_x_end(shape: LimitShape) -> float:
    if shape.kind == "triangle":
        return 1.9
    if shape.kind == "steps":
        return shape.support_end
    if shape.kind == "exponential":
        return 4.0
    return shape.support_end - 0.1


def make_grid(
    x_start: float = 0.1, x_end: float = 1.9, points: int = 256, step_width: float | None = None
) -> list[float]:
    """Uniform grid; points landing on a multiple of ``step_width`` move half a step right."""
    grid = np.linspace(x_start, x_end, points).tolist()
    if step_width:
        out = []
        for x in grid:
            r = x / step_width
            if abs(r - round(r)) < 1e-9:
                x += step_width / 2
            out.append(x)
        grid = sorted(set(out))
    return grid


def step_width(p: Partition, n: int | None = None) -> float:
    """Horizontal width of one pile in the downscaled diagram."""
    return p.top / (p.n if n is None else n)


def empirical_distance(
    p: Partition, n: int | None, shape: LimitShape, grid: Sequence[float] | None = None
) -> ShapeDistance:
    """Pointwise gap between the downscaled boundary of ``p`` and ``shape``."""
    if not p.parts:
        raise EmptyPartition("empty partition has no shape")
    n = p.n if n is None else n
    if grid is None:
        grid = make_grid(0.1, default_x_end(shape), 256, step_width(p, n))
    if any(x <= 0 for x in grid) or any(a > b for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending and strictly positive")
    emp = tuple(downscale_boundary(p, n, x) for x in grid)
    ana = tuple(shape_eval(shape, x) for x in grid)
    return ShapeDistance(tuple(grid), emp, ana)


def scaled_distance(
    p: Partition, a: float, shape: LimitShape, grid: Sequence[float]
) -> ShapeDistance:
    """Like ``empirical_distance`` but under the scaling factor ``a`` instead of ``n/lambda_1``."""
    emp = tuple(scaled_boundary(p, a, x) for x in grid)
    ana = tuple(shape_eval(shape, x) for x in grid)
    return ShapeDistance(tuple(grid), emp, ana)


def sup_distance_to(shape: LimitShape, other: LimitShape, x_end: float = 4.0, points: int = 4001) -> float:
    xs = np.linspace(0.0, x_end, points)
    return max(abs(shape_eval(shape, float(x)) - shape_eval(other, float(x))) for x in xs)


# building stable configurations from shapes ----------------------------------------


def _check_convex(phi: LimitShape) -> None:
    if phi.kind == "steps":
        raise NotConvexShape("a step function is not convex")
    if phi.linear:
        s = phi.slopes
        if any(v < 0 for v in s) or any(a < b - SHAPE_TOL for a, b in zip(s, s[1:])):
            raise NotConvexShape(f"slopes {s} must be nonnegative and non-increasing")
        if any(a < 0 for a in phi.widths):
            raise NotConvexShape("negative section width")
    if phi.area() > 1 + SHAPE_TOL:
        raise AreaExceedsOne(phi.area())


def _integer_multiple(value: float, c: float) -> int:
    m = value / c
    r = round(m)
    if abs(m - r) > 1e-9 * max(1.0, abs(m)):
        raise DerivativeNotMultipleOfC(f"slope {value} is not a multiple of c={c}")
    return int(r)


def _truncation_index(phi: LimitShape, n: int, a: float) -> int:
    """Smallest integer S with phi(S / a) < 1/sqrt(n)."""
    level = 1 / math.sqrt(n)
    lo, hi = 0.0, 1.0
    while shape_eval(phi, hi) >= level:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shape_eval(phi, mid) < level:
            hi = mid
        else:
            lo = mid
    S = max(1, math.ceil(hi * a))
    while shape_eval(phi, S / a) >= level:
        S += 1
    return S


def construction_scale(c: float, n: int) -> float:
    """Scaling factor used by ``shape_to_stable``: ``sqrt(c n)``, or ``n**0.375`` when c = 0."""
    return math.sqrt(c * n) if c > 0 else n ** 0.375


def shape_to_stable(phi: LimitShape, c: float, n: int, a: float | None = None) -> Partition:
    """A convex partition of ``n`` cards whose diagram approximates ``phi``.

    Piles below the first are differences of the right derivative sampled on
    the lattice ``i / a``; the first pile takes whatever cards remain. For
    ``c > 0`` every slope must be an integer multiple of ``c``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_convex(phi)
    if c > 0:
        if phi.kind == "exponential":
            raise DerivativeNotMultipleOfC("exp(-x) has non-lattice slopes")
        slopes = phi.slopes if phi.linear else (0.5,)
        for s in slopes:
            _integer_multiple(s, c)
        a = math.sqrt(c * n)
        end = phi.support_end
        top = math.ceil(end * a) + 1
        jumps = [0, 0] + [
            _integer_multiple(-phi.right_derivative(i / a), c) for i in range(2, top + 1)
        ]
    else:
        a = construction_scale(0.0, n) if a is None else a
        top = _truncation_index(phi, n, a)
        scale = n / (a * a)
        jumps = [0, 0] + [math.floor(-scale * phi.right_derivative(i / a)) for i in range(2, top + 1)]
    # lam[k] = sum of jumps[i] for i > k, for k = 1..top
    lam = [0] * (top + 2)
    for k in range(top - 1, 0, -1):
        lam[k] = lam[k + 1] + jumps[k + 1]
    tail = [v for v in lam[2:] if v > 0]
    first = n - sum(tail)
    if tail and first < tail[0]:
        raise AreaExceedsOne(f"construction needs {sum(tail) + tail[0]} > {n} cards")
    return _trusted([first] + tail)
