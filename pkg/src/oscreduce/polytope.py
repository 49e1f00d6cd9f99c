"""Momentum polytopes of diagonal torus actions on projective space and their
Bohr-Sommerfeld lattice points.

All coordinates are exact rationals in units of 2 pi: the point stored as x
stands for 2 pi x.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

Point = tuple[Fraction, ...]


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    m = [list(map(Fraction, r)) for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                factor = m[i][col] / m[rank][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


@dataclass(frozen=True)
class TorusAction:
    """Diagonal action of a rank-d torus on CP^N with integer weight rows."""

    W: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        W = tuple(tuple(int(x) for x in row) for row in self.W)
        if not W or len({len(r) for r in W}) != 1:
            raise ValueError("weight matrix must be a nonempty rectangular integer array")
        object.__setattr__(self, "W", W)
        if _rank(W) < self.d:
            raise ValueError("weight matrix does not have full column rank (action not effective)")

    @property
    def d(self) -> int:
        return len(self.W[0])

    @classmethod
    def parse(cls, text: str) -> "TorusAction":
        """Rows separated by ';', entries by ',' e.g. ``"0,0;1,1;3,0;0,3"``."""
        rows = [r for r in text.replace(" ", "").split(";") if r]
        return cls(tuple(tuple(int(x) for x in r.split(",")) for r in rows))


def cp3_example() -> TorusAction:
    """mu = (2pi/|z|^2)(|z1|^2 + 3|z2|^2, |z1|^2 + 3|z3|^2) on CP^3."""
    return TorusAction(((0, 0), (1, 1), (3, 0), (0, 3)))


def cp1_example() -> TorusAction:
    return TorusAction(((1,), (0,)))


@dataclass(frozen=True)
class HalfSpace:
    normal: tuple[int, ...]
    offset: int

    def contains(self, x: Sequence[Fraction]) -> bool:
        return sum(a * b for a, b in zip(self.normal, x)) <= self.offset


@dataclass(frozen=True)
class MomentumPolytope:
    vertices: tuple[Point, ...]
    hull_vertices: tuple[Point, ...]
    halfspaces: tuple[HalfSpace, ...]

    @property
    def d(self) -> int:
        return len(self.vertices[0])

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(h.contains(x) for h in self.halfspaces)


def _integer_halfspace(normal: Sequence[Fraction], point: Sequence[Fraction]) -> HalfSpace:
    den = 1
    for c in normal:
        den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in normal]
    g = 0
    for c in ints:
        g = math.gcd(g, abs(c))
    ints = [c // g for c in ints]
    off = sum(Fraction(a) * b for a, b in zip(ints, point))
    if off.denominator != 1:
        # scale so the offset is integral too
        ints = [c * off.denominator for c in ints]
        off = off * off.denominator
    return HalfSpace(tuple(ints), int(off))


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(points: list[Point]) -> tuple[list[Point], list[HalfSpace]]:
    """Gift wrapping (Jarvis march) from the lowest point; collinear points dropped."""
    start = min(points)
    hull = [start]
    current = start
    while True:
        candidate = points[0] if points[0] != current else points[1]
        for pt in points:
            if pt == current:
                continue
            turn = _cross(current, candidate, pt)
            far = (pt[0] - current[0]) ** 2 + (pt[1] - current[1]) ** 2 > \
                (candidate[0] - current[0]) ** 2 + (candidate[1] - current[1]) ** 2
            if turn < 0 or (turn == 0 and far):
                candidate = pt
        if candidate == start:
            break
        hull.append(candidate)
        current = candidate
    # orient each edge normal so the remaining points lie inside
    halfspaces = []
    for a, b in zip(hull, hull[1:] + hull[:1]):
        normal = (a[1] - b[1], b[0] - a[0])
        h = _integer_halfspace(normal, a)
        inside = [pt for pt in points if pt not in (a, b)]
        if inside and not all(h.contains(pt) for pt in inside):
            h = _integer_halfspace(tuple(-c for c in normal), a)
        halfspaces.append(h)
    return hull, halfspaces


def _solve_normal_3d(a, b, c):
    u = [b[i] - a[i] for i in range(3)]
    v = [c[i] - a[i] for i in range(3)]
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _hull_3d(points: list[Point]) -> tuple[list[Point], list[HalfSpace]]:
    """Facets by exhaustive search over point triples (exact, fine for a few points)."""
    halfspaces: set[HalfSpace] = set()
    for a, b, c in itertools.combinations(points, 3):
        normal = _solve_normal_3d(a, b, c)
        if all(x == 0 for x in normal):
            continue
        for sign in (1, -1):
            nrm = tuple(sign * x for x in normal)
            h = _integer_halfspace(nrm, a)
            if all(h.contains(pt) for pt in points):
                halfspaces.add(h)
    vertices = []
    for pt in points:
        tight = [h for h in halfspaces if sum(x * y for x, y in zip(h.normal, pt)) == h.offset]
        if tight and _rank([h.normal for h in tight]) == 3:
            vertices.append(pt)
    return vertices, sorted(halfspaces, key=lambda h: (h.normal, h.offset))


def fixed_point_values(action: TorusAction) -> MomentumPolytope:
    """Images of the coordinate fixed points (rows of W, in units of 2 pi) and their hull."""
    pts = sorted(set(tuple(Fraction(x) for x in row) for row in action.W))
    d = action.d
    diffs = [tuple(a - b for a, b in zip(pt, pts[0])) for pt in pts[1:]]
    if not diffs or _rank(diffs) < d:
        raise ValueError("fixed point values do not span a full-dimensional polytope")
    if d == 1:
        lo, hi = pts[0], pts[-1]
        hull = [lo, hi]
        halfspaces = [_integer_halfspace((-1,), lo), _integer_halfspace((1,), hi)]
    elif d == 2:
        hull, halfspaces = _hull_2d(pts)
    elif d == 3:
        hull, halfspaces = _hull_3d(pts)
    else:
        raise ValueError("hull computation supports d <= 3")
    return MomentumPolytope(tuple(pts), tuple(hull), tuple(halfspaces))


def bs_lattice_points(polytope: MomentumPolytope, k: int, base: int = 0) -> list[Point]:
    """Points of nu_base + (1/k) Z^d inside the closed hull, in units of 2 pi."""
    if k < 1:
        raise ValueError("k must be >= 1")
    nu = polytope.vertices[base]
    d = polytope.d
    lo = [min(v[i] for v in polytope.vertices) for i in range(d)]
    hi = [max(v[i] for v in polytope.vertices) for i in range(d)]
    ranges = [range(math.floor((lo[i] - nu[i]) * k), math.ceil((hi[i] - nu[i]) * k) + 1) for i in range(d)]
    out = []
    for m in itertools.product(*ranges):
        x = tuple(nu[i] + Fraction(m[i], k) for i in range(d))
        if polytope.contains(x):
            out.append(x)
    return sorted(out)


def _barycentric_inside(x: Point, simplex: Sequence[Point]) -> bool:
    """Exact test x in conv(simplex) for d+1 affinely independent points."""
    d = len(x)
    base = simplex[0]
    cols = [[simplex[j + 1][i] - base[i] for j in range(d)] for i in range(d)]
    rhs = [x[i] - base[i] for i in range(d)]
    m = [row[:] + [r] for row, r in zip(cols, rhs)]
    for c in range(d):
        pivot = next((r for r in range(c, d) if m[r][c] != 0), None)
        if pivot is None:
            return False
        m[c], m[pivot] = m[pivot], m[c]
        for r in range(d):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    lam = [m[i][d] / m[i][i] for i in range(d)]
    return all(v >= 0 for v in lam) and sum(lam) <= 1


def brute_force_lattice_points(vertices: Sequence[Sequence[int]], k: int) -> list[Point]:
    """Independent oracle: grid points N/k lying in some simplex spanned by the vertices.

    Uses Caratheodory's theorem instead of a half-space description.
    """
    pts = [tuple(Fraction(x) for x in v) for v in vertices]
    d = len(pts[0])
    simplices = []
    for combo in itertools.combinations(pts, d + 1):
        diffs = [tuple(a - b for a, b in zip(c, combo[0])) for c in combo[1:]]
        if _rank(diffs) == d:
            simplices.append(combo)
    lo = [min(p[i] for p in pts) for i in range(d)]
    hi = [max(p[i] for p in pts) for i in range(d)]
    found = []
    for N in itertools.product(*[range(math.floor(lo[i] * k), math.ceil(hi[i] * k) + 1) for i in range(d)]):
        x = tuple(Fraction(c, k) for c in N)
        if any(_barycentric_inside(x, s) for s in simplices):
            found.append(x)
    return sorted(found)


def ehrhart_exponent(polytope: MomentumPolytope, ks: Sequence[int]) -> float:
    """Fitted log-log slope of the lattice-point count."""
    counts = [len(bs_lattice_points(polytope, k)) for k in ks]
    return float(np.polyfit(np.log(ks), np.log(counts), 1)[0])
