"""Univariate polynomials in the power basis, with exact real-root isolation.

Coefficients are stored in ascending degree order.  They may be floats or
:class:`fractions.Fraction`; every float is an exact dyadic rational, so
``Polynomial.exact()`` lifts a binary64 polynomial into exact arithmetic
without changing its value.  Root isolation always runs exactly (Sturm
sequences over the rationals) and only rounds when the isolated root is
reported as a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, List, Sequence, Tuple, Union

Number = Union[float, int, Fraction]


class RootIsolationError(ArithmeticError):
    """Raised when root isolation does not converge within its budget."""


def _trim(coeffs: Sequence[Number]) -> Tuple[Number, ...]:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """p(x) = sum_i coeffs[i] * x**i."""

    coeffs: Tuple[Number, ...]

    def __init__(self, coeffs: Iterable[Number]):
        c = tuple(coeffs)
        if not c:
            raise ValueError("polynomial needs at least one coefficient")
        for a in c:
            if not isinstance(a, (Real, Fraction)):
                raise TypeError(f"coefficient {a!r} is not a real number")
            if isinstance(a, float) and not math.isfinite(a):
                raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", _trim(c))

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls((c,))

    @classmethod
    def identity(cls) -> "Polynomial":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, x):
        # Horner; works for floats, Fractions and numpy arrays alike
        acc = self.coeffs[-1]
        for a in reversed(self.coeffs[:-1]):
            acc = acc * x + a
        if len(self.coeffs) == 1 and hasattr(x, "shape"):
            return acc + 0 * x
        return acc

    def exact(self) -> "Polynomial":
        return Polynomial(Fraction(a) for a in self.coeffs)

    def to_float(self) -> "Polynomial":
        return Polynomial(float(a) for a in self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-a for a in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(a * other for a in self.coeffs)
        out: List[Number] = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0 * self.coeffs[0],))
        return Polynomial(i * a for i, a in enumerate(self.coeffs) if i > 0)

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """Return x -> self(inner(x)), expanded symbolically."""
        acc = Polynomial((self.coeffs[-1],))
        for a in reversed(self.coeffs[:-1]):
            acc = acc * inner + a
        return acc

    def __repr__(self) -> str:
        return f"Polynomial({[float(a) for a in self.coeffs]})"


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial((p,))


# ---------------------------------------------------------------------------
# exact helpers on ascending lists of Fractions
# ---------------------------------------------------------------------------


def _ptrim(c: List[Fraction]) -> List[Fraction]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _pdivmod(a: List[Fraction], b: List[Fraction]):
    a = list(a)
    b = _ptrim(list(b))
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [Fraction(0)], _ptrim(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] / lead
        q[i] = coef
        if coef:
            for j, bj in enumerate(b):
                a[i + j] -= coef * bj
    rem = _ptrim(a[: len(b) - 1] or [Fraction(0)])
    return _ptrim(q), rem


def _peval(c: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = c[-1]
    for a in reversed(c[:-1]):
        acc = acc * x + a
    return acc


def _pderiv(c: List[Fraction]) -> List[Fraction]:
    if len(c) == 1:
        return [Fraction(0)]
    return [i * a for i, a in enumerate(c) if i > 0]


def _is_zero(c: Sequence[Fraction]) -> bool:
    return len(c) == 1 and c[0] == 0


def _pgcd(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while not _is_zero(b):
        _, r = _pdivmod(a, b)
        a, b = b, r
    return [x / a[-1] for x in a]


def sturm_sequence(p: Polynomial) -> List[List[Fraction]]:
    """Exact Sturm sequence p, p', -rem(p, p'), ... over the rationals."""
    c = _ptrim([Fraction(a) for a in p.coeffs])
    seq = [c, _pderiv(c)]
    while not _is_zero(seq[-1]) and len(seq[-1]) > 1:
        _, r = _pdivmod(seq[-2], seq[-1])
        if _is_zero(r):
            break
        seq.append([-x for x in r])
    if _is_zero(seq[-1]):
        seq.pop()
    return seq


def _variations(seq: List[List[Fraction]], x: Fraction) -> int:
    signs = []
    for s in seq:
        v = _peval(s, x)
        if v:
            signs.append(v > 0)
    return sum(1 for u, w in zip(signs, signs[1:]) if u != w)


def sturm_count(p: Polynomial, lo: float, hi: float) -> int:
    """Number of distinct real roots of p in the half-open interval (lo, hi]."""
    if p.degree == 0:
        return 0
    seq = sturm_sequence(p)
    return _variations(seq, Fraction(lo)) - _variations(seq, Fraction(hi))


def real_roots(
    p: Polynomial,
    lo: float,
    hi: float,
    rel_tol: float = 1e-15,
    max_steps: int = 4000,
) -> List[float]:
    """Distinct real roots of ``p`` in the closed interval [lo, hi], sorted.

    Roots are isolated exactly with a Sturm sequence of the square-free part
    of ``p`` and then refined by sign-change bisection until the bracket is
    narrower than ``rel_tol * max(1, |x|)``.  The identically-zero polynomial
    has no isolated roots and yields ``[]``.
    """
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    c = _ptrim([Fraction(a) for a in p.coeffs])
    if len(c) == 1:
        return []
    a, b = Fraction(lo), Fraction(hi)
    found: List[Fraction] = []
    for end in (a, b):
        while len(c) > 1 and _peval(c, end) == 0:
            if end not in found:
                found.append(end)
            c, _ = _pdivmod(c, [-end, Fraction(1)])
    if a == b or len(c) == 1:
        return sorted(float(r) for r in found)

    g = _pgcd(c, _pderiv(c))
    sqfree, _ = _pdivmod(c, g)
    seq = sturm_sequence(Polynomial(sqfree))

    def count(u: Fraction, w: Fraction) -> int:
        return _variations(seq, u) - _variations(seq, w)

    steps = 0
    stack = [(a, b)]
    brackets = []
    while stack:
        u, w = stack.pop()
        n = count(u, w)
        if n == 0:
            continue
        if n == 1:
            brackets.append((u, w))
            continue
        steps += 1
        if steps > max_steps:
            raise RootIsolationError("root isolation exceeded its bisection budget")
        m = (u + w) / 2
        if _peval(sqfree, m) == 0:
            found.append(m)
            d = (w - u) / 4
            while True:
                ml, mr = m - d, m + d
                if _peval(sqfree, ml) and _peval(sqfree, mr) and count(ml, mr) == 1:
                    break
                d /= 2
            stack.append((mr, w))
            stack.append((u, ml))
        else:
            stack.append((m, w))
            stack.append((u, m))

    for u, w in brackets:
        found.append(_refine(sqfree, u, w, rel_tol, max_steps))
    return sorted({float(r) for r in found})


def _refine(c: List[Fraction], u: Fraction, w: Fraction, rel_tol: float, max_steps: int) -> Fraction:
    if len(c) == 2:
        return -c[0] / c[1]
    su = _peval(c, u) > 0
    tol = Fraction(rel_tol)
    for _ in range(max_steps):
        m = (u + w) / 2
        scale = max(Fraction(1), abs(m))
        if w - u <= tol * scale:
            return m
        fm = _peval(c, m)
        if fm == 0:
            return m
        if (fm > 0) == su:
            u = m
        else:
            w = m
    raise RootIsolationError("root refinement did not converge")
