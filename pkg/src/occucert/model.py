"""Scalar system model: polynomial dynamics per disturbance mode and interval sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .polynomial import Polynomial, real_roots

PROBABILITY_TOL = 1e-12


class ValidationError(ValueError):
    """A model, certificate or configuration violates one of its invariants."""


class DomainError(ValueError):
    """A state was passed outside the domain an operation is defined on."""


@dataclass(frozen=True, order=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValidationError(f"malformed interval: lo={self.lo} > hi={self.hi}")

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def normalize_interval_set(raw: Iterable) -> "IntervalSet":
    """Sort and fuse touching or overlapping closed intervals."""
    ivs = sorted(iv if isinstance(iv, Interval) else Interval(*iv) for iv in raw)
    merged: List[Interval] = []
    for iv in ivs:
        if merged and iv.lo <= merged[-1].hi:
            last = merged[-1]
            merged[-1] = Interval(last.lo, max(last.hi, iv.hi))
        else:
            merged.append(iv)
    return IntervalSet._from_normalized(tuple(merged))


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of closed intervals, kept sorted and disjoint."""

    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self):
        ivs = self.intervals
        for a, b in zip(ivs, ivs[1:]):
            if not a.hi < b.lo:
                raise ValidationError("interval set is not normalized; use normalize_interval_set")

    @classmethod
    def _from_normalized(cls, ivs: Tuple[Interval, ...]) -> "IntervalSet":
        return cls(ivs)

    @classmethod
    def of(cls, *pairs) -> "IntervalSet":
        return normalize_interval_set(pairs)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __contains__(self, x: float) -> bool:
        return any(iv.lo <= x <= iv.hi for iv in self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0].lo

    @property
    def hi(self) -> float:
        return self.intervals[-1].hi

    def endpoints(self) -> List[float]:
        out = []
        for iv in self.intervals:
            out.extend((iv.lo, iv.hi))
        return out

    def issubset(self, other: "IntervalSet") -> bool:
        return all(
            any(o.lo <= iv.lo and iv.hi <= o.hi for o in other.intervals) for iv in self.intervals
        )

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return normalize_interval_set(self.intervals + other.intervals)

    def minus(self, other: "IntervalSet") -> List["Span"]:
        """Set difference as a list of spans with open/closed ends."""
        pieces = [Span(iv.lo, iv.hi, True, True) for iv in self.intervals]
        for cut in other.intervals:
            nxt = []
            for s in pieces:
                if cut.hi < s.lo or cut.lo > s.hi:
                    nxt.append(s)
                    continue
                left = Span(s.lo, cut.lo, s.lo_closed, False)
                right = Span(cut.hi, s.hi, False, s.hi_closed)
                nxt.extend(p for p in (left, right) if not p.empty)
            pieces = nxt
        return pieces

    def to_list(self) -> List[List[float]]:
        return [[iv.lo, iv.hi] for iv in self.intervals]


@dataclass(frozen=True)
class Span:
    """An interval whose ends may each be open or closed."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def __contains__(self, x: float) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    def intersect(self, other: "Span") -> "Span":
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return Span(lo, hi, lc, hc)


@dataclass(frozen=True)
class DisturbanceMode:
    dynamics: Polynomial
    probability: float

    def __post_init__(self):
        if not (0.0 < self.probability <= 1.0):
            raise ValidationError(f"mode probability must lie in (0, 1], got {self.probability}")


@dataclass(frozen=True)
class SystemSpec:
    """X_{t+1} = f(X_t, d_t) with finitely many disturbance modes.

    ``augmented`` defaults to the exact one-step reachable set of ``safe``.
    """

    modes: Tuple[DisturbanceMode, ...]
    safe: IntervalSet
    target: IntervalSet
    x0: float
    augmented: Optional[IntervalSet] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValidationError("system needs at least one disturbance mode")
        if not self.safe:
            raise ValidationError("safe set must be nonempty")
        total = math.fsum(m.probability for m in self.modes)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValidationError(f"modes.probability: probabilities sum to {total:g}, expected 1")
        if not self.target.issubset(self.safe):
            raise ValidationError("target not contained in safe set (target set is T ⊆ X)")
        if self.x0 not in self.safe:
            raise ValidationError(f"x0={self.x0} is not in the safe set")
        reach = one_step_reachable(self)
        if self.augmented is None:
            object.__setattr__(self, "augmented", reach)
        else:
            if not self.safe.issubset(self.augmented):
                raise ValidationError("augmented space must contain the safe set")
            if not reach.issubset(self.augmented):
                raise ValidationError(
                    f"augmented space {self.augmented.to_list()} does not contain the "
                    f"one-step reachable set {reach.to_list()}"
                )

    @property
    def probabilities(self) -> Tuple[float, ...]:
        return tuple(m.probability for m in self.modes)

    def sink(self) -> List[Span]:
        """The absorbing region: augmented space minus the safe set."""
        return self.augmented.minus(self.safe)


def mode_successor(spec: SystemSpec, x: float, j: int) -> float:
    return float(spec.modes[j].dynamics(x))


def _exact_value(p: Polynomial, x: float) -> float:
    return float(p.exact()(Fraction(x)))


def polynomial_extrema(p: Polynomial, lo: float, hi: float) -> Tuple[float, float, float, float]:
    """(min, argmin, max, argmax) of p over [lo, hi], from endpoints and critical points."""
    candidates = [lo, hi]
    if p.degree >= 2 and lo < hi:
        candidates.extend(real_roots(p.derivative(), lo, hi))
    exact = p.exact()
    vals = [(float(exact(Fraction(x))), x) for x in candidates]
    vmin, xmin = min(vals)
    vmax, xmax = max(vals, key=lambda t: (t[0], -t[1]))
    return vmin, xmin, vmax, xmax


def polynomial_range(p: Polynomial, iv: Interval) -> Interval:
    vmin, _, vmax, _ = polynomial_extrema(p, iv.lo, iv.hi)
    return Interval(vmin, vmax)


def one_step_reachable(spec: SystemSpec) -> IntervalSet:
    images = list(spec.safe.intervals)
    for mode in spec.modes:
        for iv in spec.safe.intervals:
            images.append(polynomial_range(mode.dynamics, iv))
    return normalize_interval_set(images)


def make_spec(
    modes: Sequence[Tuple[Sequence[float], float]],
    safe,
    target,
    x0: float,
    augmented=None,
) -> SystemSpec:
    """Convenience constructor from plain lists."""
    return SystemSpec(
        modes=tuple(DisturbanceMode(Polynomial(c), p) for c, p in modes),
        safe=normalize_interval_set(safe),
        target=normalize_interval_set(target),
        x0=x0,
        augmented=None if augmented is None else normalize_interval_set(augmented),
    )
