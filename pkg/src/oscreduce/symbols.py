"""Polynomial symbols c * k^-l * zbar^gamma z^delta and their mini-language.

Grammar accepted by :func:`parse_symbol`::

    expr   := ['-'] term (('+' | '-') term)*
    term   := (coeff | factor) ('*' factor)*
    factor := 'z(' i ')' | 'zb(' i ')' | 's(' i ')' | 'kinv'   [ '^' int ]
    coeff  := real | real 'i' | real ('+'|'-') real 'i' | '(' coeff ')'

A sign glued to a number without whitespace and followed by an imaginary
part (``2+3i``) belongs to the complex literal; ``2 + 3i`` is two terms.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .fock import MultiIndex, WeightVector, as_weights

TermKey = tuple[MultiIndex, MultiIndex, int]


class SymbolSyntaxError(ValueError):
    """Invalid symbol text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        self.text = text
        super().__init__(f"{message} at byte offset {self.offset}")


def _add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class PolySymbol:
    """Finite sum of terms ``c * k^-l * zbar^gamma z^delta`` on C^n."""

    n: int
    terms: Mapping[TermKey, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[TermKey, complex] = {}
        for (g, d, l), c in self.terms.items():
            g, d = tuple(int(x) for x in g), tuple(int(x) for x in d)
            if len(g) != self.n or len(d) != self.n:
                raise ValueError(f"term exponents {g},{d} do not match n={self.n}")
            if l < 0 or min(g + d, default=0) < 0:
                raise ValueError("exponents must be non-negative")
            c = complex(c)
            if c != 0:
                key = (g, d, int(l))
                clean[key] = clean.get(key, 0) + c
                if clean[key] == 0:
                    del clean[key]
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def constant(cls, n: int, c: complex = 1.0) -> "PolySymbol":
        zero = (0,) * n
        return cls(n, {(zero, zero, 0): c})

    @classmethod
    def monomial(cls, gamma: Sequence[int], delta: Sequence[int], l: int = 0, c: complex = 1.0) -> "PolySymbol":
        return cls(len(gamma), {(tuple(gamma), tuple(delta), l): c})

    @classmethod
    def action(cls, n: int, i: int) -> "PolySymbol":
        """The action variable s_i = |z_i|^2 (0-based index)."""
        e = tuple(1 if j == i else 0 for j in range(n))
        return cls(n, {(e, e, 0): 1.0})

    def with_n(self, n: int) -> "PolySymbol":
        """Pad exponents with zeros to live on C^n (n >= self.n)."""
        if n == self.n:
            return self
        if n < self.n:
            if any(any(g[n:]) or any(d[n:]) for g, d, _ in self.terms):
                raise ValueError(f"symbol uses variables beyond n={n}")
            return PolySymbol(n, {(g[:n], d[:n], l): c for (g, d, l), c in self.terms.items()})
        pad = (0,) * (n - self.n)
        return PolySymbol(n, {(g + pad, d + pad, l): c for (g, d, l), c in self.terms.items()})

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def _aligned(self, other: "PolySymbol"):
        n = max(self.n, other.n)
        return self.with_n(n), other.with_n(n), n

    def __add__(self, other):
        if not isinstance(other, PolySymbol):
            other = PolySymbol.constant(self.n, other)
        a, b, n = self._aligned(other)
        out = dict(a.terms)
        for key, c in b.terms.items():
            out[key] = out.get(key, 0) + c
        return PolySymbol(n, out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol(self.n, {key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, PolySymbol):
            return PolySymbol(self.n, {key: c * other for key, c in self.terms.items()})
        a, b, n = self._aligned(other)
        out: dict[TermKey, complex] = {}
        for (g1, d1, l1), c1 in a.terms.items():
            for (g2, d2, l2), c2 in b.terms.items():
                key = (_add_index(g1, g2), _add_index(d1, d2), l1 + l2)
                out[key] = out.get(key, 0) + c1 * c2
        return PolySymbol(n, out)

    __rmul__ = __mul__

    def adjoint(self) -> "PolySymbol":
        """Complex conjugate symbol: swap gamma and delta, conjugate c."""
        return PolySymbol(self.n, {(d, g, l): c.conjugate() for (g, d, l), c in self.terms.items()})

    def is_hermitian(self, tol: float = 0.0) -> bool:
        for (g, d, l), c in self.terms.items():
            partner = self.terms.get((d, g, l), 0)
            if abs(partner - c.conjugate()) > tol * max(1.0, abs(c)):
                return False
        return True

    def degree(self) -> int:
        return max((sum(g) + sum(d) for g, d, _ in self.terms), default=0)

    def principal(self) -> "PolySymbol":
        """Terms with l = 0."""
        return PolySymbol(self.n, {key: c for key, c in self.terms.items() if key[2] == 0})

    def diagonal(self) -> "PolySymbol":
        """Terms with gamma = delta, i.e. functions of the actions only."""
        return PolySymbol(self.n, {key: c for key, c in self.terms.items() if key[0] == key[1]})

    def is_action_function(self) -> bool:
        return all(g == d for g, d, _ in self.terms)

    def charge(self, key: TermKey, weights) -> int:
        """Circle weight <p, delta - gamma> of one term."""
        p = as_weights(weights).p
        g, d, _ = key
        return sum(pi * (di - gi) for pi, gi, di in zip(p, g, d))

    def evaluate(self, z: Sequence[complex], k: float | None = None) -> complex:
        """Pointwise value at z in C^n; terms with l > 0 need ``k``."""
        z = np.asarray(z, dtype=complex)
        zb = z.conj()
        total = 0j
        for (g, d, l), c in self.terms.items():
            if l and k is None:
                raise ValueError("k is required to evaluate terms with l > 0")
            val = c * (k ** -l if l else 1.0)
            val *= np.prod(zb ** np.array(g)) * np.prod(z ** np.array(d))
            total += val
        return complex(total)

    def evaluate_actions(self, s: Sequence[float], k: float | None = None) -> complex:
        """Value of an action-only symbol at action coordinates s."""
        s = np.asarray(s, dtype=float)
        total = 0j
        for (g, d, l), c in self.terms.items():
            if g != d:
                raise ValueError("evaluate_actions needs gamma = delta terms only")
            if l and k is None:
                raise ValueError("k is required to evaluate terms with l > 0")
            total += c * (k ** -l if l else 1.0) * np.prod(s ** np.array(g))
        return complex(total)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class ReducedPoint:
    """A point of the level set in action-angle form.

    ``s`` are the actions with sum p_i s_i = 1 and ``phi`` the n-1 residual
    angles.  The lift to C^n puts theta_i = phi_i for i < n-1 and theta = 0
    on the last coordinate.
    """

    s: tuple[float, ...]
    phi: tuple[float, ...] = ()

    def __post_init__(self):
        s = tuple(float(x) for x in self.s)
        phi = tuple(float(x) for x in self.phi) or (0.0,) * (len(s) - 1)
        if len(phi) != len(s) - 1:
            raise ValueError("need n-1 residual angles")
        if any(x < 0 for x in s):
            raise ValueError("actions must be non-negative")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def on_level_set(cls, s: Sequence[float], weights, phi: Sequence[float] = ()) -> "ReducedPoint":
        pt = cls(tuple(s), tuple(phi))
        pt.check(weights)
        return pt

    def check(self, weights, tol: float = 1e-12) -> None:
        w = as_weights(weights)
        if len(self.s) != w.n:
            raise ValueError("point dimension does not match weights")
        level = sum(p * x for p, x in zip(w.p, self.s))
        if abs(level - 1.0) > tol:
            raise ValueError(f"point is off the level set: sum p_i s_i = {level!r}")

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.phi + (0.0,))

    def lift(self) -> np.ndarray:
        return np.sqrt(np.array(self.s)) * np.exp(1j * self.theta)


def average_circle(f: PolySymbol, weights) -> PolySymbol:
    """Circle average: keep exactly the terms of zero circle weight."""
    w = as_weights(weights)
    f = f.with_n(w.n) if f.n < w.n else f
    return PolySymbol(f.n, {key: c for key, c in f.terms.items() if f.charge(key, w) == 0})


def eval_principal(f: PolySymbol, point: ReducedPoint) -> complex:
    """Value of the l = 0 part at a reduced point (through its lift)."""
    n = len(point.s)
    f = f.with_n(n) if f.n < n else f
    s = np.array(point.s)
    theta = point.theta
    total = 0j
    for (g, d, l), c in f.terms.items():
        if l:
            continue
        g_, d_ = np.array(g), np.array(d)
        mag = np.prod(s ** ((g_ + d_) / 2.0))
        if g == d:
            total += c * mag
        else:
            total += c * mag * np.exp(1j * float(np.dot(d_ - g_, theta)))
    return complex(total)


def _derivative(f: PolySymbol, i: int, conj: bool) -> PolySymbol:
    out: dict[TermKey, complex] = {}
    for (g, d, l), c in f.terms.items():
        e = g if conj else d
        if e[i] == 0:
            continue
        lowered = tuple(x - (1 if j == i else 0) for j, x in enumerate(e))
        key = (lowered, d, l) if conj else (g, lowered, l)
        out[key] = out.get(key, 0) + c * e[i]
    return PolySymbol(f.n, out)


def poisson_bracket_ambient(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """{f, g} = i sum_j (d_zj f d_zbj g - d_zbj f d_zj g), for omega = i sum dz ^ dzbar."""
    n = max(f.n, g.n)
    f, g = f.with_n(n), g.with_n(n)
    total = PolySymbol(n)
    for j in range(n):
        total = total + _derivative(f, j, False) * _derivative(g, j, True)
        total = total - _derivative(f, j, True) * _derivative(g, j, False)
    return total * 1j


# ---------------------------------------------------------------- parsing

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"({_NUM})([+-])({_NUM})?i(?![A-Za-z0-9_(])")
_IMAG_RE = re.compile(rf"({_NUM})?i(?![A-Za-z0-9_(])")
_REAL_RE = re.compile(_NUM)
_FACTOR_RE = re.compile(r"(zb|z|s)\(\s*(\d+)\s*\)|kinv")
_POWER_RE = re.compile(r"\^\s*(\d+)")
_FACTOR_HEAD_RE = re.compile(r"(zb|z|s)\(\s*(\d*)\s*")


class _Parser:
    def __init__(self, text: str, n: int | None):
        self.text = text
        self.pos = 0
        self.n = n
        self.raw: list[tuple[complex, list[tuple[str, int]], int]] = []

    def error(self, message: str, pos: int | None = None):
        raise SymbolSyntaxError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        if not self.text.strip():
            self.error("empty symbol")
        sign = 1.0
        if self.peek() in "+-":
            sign = -1.0 if self.text[self.pos] == "-" else 1.0
            self.pos += 1
        self.term(sign)
        while self.peek():
            ch = self.peek()
            if ch not in "+-":
                self.error(f"expected '+' or '-', found {ch!r}")
            self.pos += 1
            self.term(-1.0 if ch == "-" else 1.0)

    def coeff(self) -> complex | None:
        self.skip()
        if self.peek() == "(":
            start = self.pos
            self.pos += 1
            self.skip()
            neg = False
            if self.peek() in "+-":
                neg = self.text[self.pos] == "-"
                self.pos += 1
            value = self.coeff()
            if value is None:
                self.error("expected a number inside parentheses")
            if self.peek() != ")":
                self.error("missing ')'", start)
            self.pos += 1
            return -value if neg else value
        m = _COMPLEX_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            im = float(m.group(3)) if m.group(3) else 1.0
            return complex(float(m.group(1)), -im if m.group(2) == "-" else im)
        m = _IMAG_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return complex(0.0, float(m.group(1)) if m.group(1) else 1.0)
        m = _REAL_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return complex(float(m.group(0)), 0.0)
        return None

    def factor(self) -> tuple[str, int, int]:
        self.skip()
        start = self.pos
        m = _FACTOR_RE.match(self.text, self.pos)
        if not m:
            head = _FACTOR_HEAD_RE.match(self.text, self.pos)
            if head and not head.group(2):
                self.error("expected an index after '('", head.end())
            if head:
                self.error("missing ')'", head.end())
            self.error("expected a factor z(i), zb(i), s(i) or kinv")
        self.pos = m.end()
        if m.group(0) == "kinv":
            kind, index = "kinv", 0
        else:
            kind, index = m.group(1), int(m.group(2))
            if index < 1 or (self.n is not None and index > self.n):
                bound = self.n if self.n is not None else "n"
                self.error(f"index {index} out of range 1..{bound}", start + len(kind) + 1)
        power = 1
        self.skip()
        pm = _POWER_RE.match(self.text, self.pos)
        if pm:
            self.pos = pm.end()
            power = int(pm.group(1))
        return kind, index, power

    def term(self, sign: float):
        c = self.coeff()
        factors: list[tuple[str, int]] = []
        if c is None:
            c = 1.0
            kind, index, power = self.factor()
            factors.extend([(kind, index)] * power)
        while self.peek() == "*":
            self.pos += 1
            kind, index, power = self.factor()
            factors.extend([(kind, index)] * power)
        self.raw.append((sign * c, factors, self.pos))

    def build(self) -> PolySymbol:
        used = [i for _, fs, _ in self.raw for kind, i in fs if kind != "kinv"]
        n = self.n if self.n is not None else max(used, default=1)
        out: dict[TermKey, complex] = {}
        for c, fs, _ in self.raw:
            g, d, l = [0] * n, [0] * n, 0
            for kind, i in fs:
                if kind == "kinv":
                    l += 1
                elif kind == "z":
                    d[i - 1] += 1
                elif kind == "zb":
                    g[i - 1] += 1
                else:
                    g[i - 1] += 1
                    d[i - 1] += 1
            key = (tuple(g), tuple(d), l)
            out[key] = out.get(key, 0) + c
        return PolySymbol(n, out)


def parse_symbol(text: str, n: int | None = None) -> PolySymbol:
    """Parse the symbol mini-language; ``n`` defaults to the largest index used."""
    parser = _Parser(text, n)
    parser.parse()
    return parser.build()


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    sign = "-" if c.imag < 0 or (c.imag == 0 and math.copysign(1, c.imag) < 0) else "+"
    return f"({c.real!r}{sign}{abs(c.imag)!r}i)"


def render(f: PolySymbol) -> str:
    """Inverse printer: ``parse_symbol(render(f), f.n) == f``."""
    if not f.terms:
        return "0.0"
    parts = []
    for (g, d, l), c in f.terms.items():
        negative = c.real < 0 or (c.real == 0 and c.imag < 0)
        if negative:
            c = -c
        factors = ["kinv"] * l
        for i in range(f.n):
            factors += [f"zb({i + 1})"] * g[i] + [f"z({i + 1})"] * d[i]
        body = "*".join([_format_coeff(c)] + factors)
        parts.append(("- " if negative else "+ ", body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "- " else "") + first
    for sign, body in parts[1:]:
        text += f" {sign}{body}"
    return text


# ---------------------------------------------------------------- test functions

_POLY_TERM_RE = re.compile(rf"\s*([+-])?\s*(?:({_NUM})\s*(\*)?\s*)?(x(?:\s*\^\s*(\d+))?)?")


def parse_test_function(text: str) -> Polynomial:
    """Parse a real polynomial in x such as ``"x"``, ``"x^2"``, ``"1"``, ``"2*x^2 - x + 3"``."""
    if not text.strip():
        raise SymbolSyntaxError("empty test function", text, 0)
    coeffs: dict[int, float] = {}
    pos = 0
    first = True
    while pos < len(text) and text[pos:].strip():
        m = _POLY_TERM_RE.match(text, pos)
        if not (m.group(2) or m.group(4)):
            raise SymbolSyntaxError("expected a number or x", text, m.end())
        if not first and not m.group(1):
            raise SymbolSyntaxError("expected '+' or '-'", text, pos)
        if m.group(3) and not m.group(4):
            raise SymbolSyntaxError("expected x after '*'", text, m.end())
        sign = -1.0 if m.group(1) == "-" else 1.0
        c = float(m.group(2)) if m.group(2) else 1.0
        deg = int(m.group(5)) if m.group(5) else (1 if m.group(4) else 0)
        coeffs[deg] = coeffs.get(deg, 0.0) + sign * c
        pos = m.end()
        first = False
    top = max(coeffs)
    return Polynomial([coeffs.get(i, 0.0) for i in range(top + 1)])


def compose_polynomial(f: Polynomial, g: PolySymbol) -> PolySymbol:
    """The symbol f(g) for a real polynomial f, by Horner's rule."""
    result = PolySymbol.constant(g.n, 0.0)
    for c in reversed(list(f.coef)):
        result = result * g + PolySymbol.constant(g.n, c)
    return result


def symbol_from_terms(n: int, items: Iterable[tuple[Sequence[int], Sequence[int], int, complex]]) -> PolySymbol:
    return PolySymbol(n, {(tuple(g), tuple(d), l): c for g, d, l, c in items})
