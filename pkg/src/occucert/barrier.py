"""Piecewise-polynomial barriers, their global bound, and the side conditions
each certificate kind imposes on the target and on the sink set."""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .model import DomainError, IntervalSet, Span, SystemSpec, ValidationError, polynomial_extrema
from .polynomial import Polynomial


class Kind(str, enum.Enum):
    DISSIPATIVE = "dissipative"
    ATTRACTIVE = "attractive"
    WEIGHTED_ATTRACTIVE = "weighted_attractive"


@dataclass(frozen=True)
class PiecewiseBarrier:
    """v(x) = pieces[i](x) on [breakpoints[i], breakpoints[i+1]).

    The last piece also owns its right endpoint.  Symmetric shapes such as
    |x| or dead zones are written out as explicit piece lists.
    """

    breakpoints: Tuple[float, ...]
    pieces: Tuple[Polynomial, ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        pieces = tuple(p if isinstance(p, Polynomial) else Polynomial(p) for p in self.pieces)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)
        if len(bps) < 2:
            raise ValidationError("a barrier needs at least two breakpoints")
        if any(not math.isfinite(b) for b in bps):
            raise ValidationError("barrier breakpoints must be finite")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValidationError("barrier breakpoints must be strictly increasing")
        if len(pieces) != len(bps) - 1:
            raise ValidationError(
                f"barrier has {len(pieces)} pieces but {len(bps)} breakpoints; expected {len(bps) - 1}"
            )

    @classmethod
    def single(cls, coeffs: Sequence[float], lo: float, hi: float) -> "PiecewiseBarrier":
        return cls((lo, hi), (Polynomial(coeffs),))

    @property
    def span(self) -> Tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    def covers(self, domain: IntervalSet) -> bool:
        return self.breakpoints[0] <= domain.lo and domain.hi <= self.breakpoints[-1]

    def piece_index(self, x: float) -> int:
        lo, hi = self.span
        if not lo <= x <= hi:
            raise DomainError(f"x={x} is outside the barrier span [{lo}, {hi}]")
        i = bisect.bisect_right(self.breakpoints, x) - 1
        return min(i, len(self.pieces) - 1)

    def owned(self, i: int) -> Span:
        last = i == len(self.pieces) - 1
        return Span(self.breakpoints[i], self.breakpoints[i + 1], True, last)

    def __call__(self, x: float) -> float:
        return float(self.pieces[self.piece_index(x)](x))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.span
        if np.any((xs < lo) | (xs > hi)):
            raise DomainError(f"some states fall outside the barrier span [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self.breakpoints, xs, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(xs)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = p.to_float()(xs[mask])
        return out

    def extents(self, region: Span) -> Iterator[Tuple[int, float, float]]:
        """Yield (piece, lo, hi) for every piece whose owned set meets ``region``.

        ``[lo, hi]`` is the closure of the intersection.  A polynomial's sup and
        inf over an interval with nonempty interior equal its max and min over
        the closure, so exact ranges over these closures are exact over the
        owned sets as well.
        """
        for i in range(len(self.pieces)):
            s = self.owned(i).intersect(region)
            if not s.empty:
                yield i, s.lo, s.hi


def barrier_eval(v: PiecewiseBarrier, x: float) -> float:
    return v(x)


def _spans(domain) -> List[Span]:
    if isinstance(domain, IntervalSet):
        return [Span(iv.lo, iv.hi) for iv in domain]
    return list(domain)


def barrier_extrema(v: PiecewiseBarrier, domain) -> Tuple[float, float, float, float]:
    """(min, argmin, max, argmax) of v over an IntervalSet or a list of Spans."""
    best_lo = (math.inf, math.nan)
    best_hi = (-math.inf, math.nan)
    for region in _spans(domain):
        lo, hi = v.span
        if region.lo < lo or region.hi > hi:
            raise DomainError(f"domain [{region.lo}, {region.hi}] exceeds the barrier span [{lo}, {hi}]")
        for i, a, b in v.extents(region):
            vmin, xmin, vmax, xmax = polynomial_extrema(v.pieces[i], a, b)
            if vmin < best_lo[0]:
                best_lo = (vmin, xmin)
            if vmax > best_hi[0]:
                best_hi = (vmax, xmax)
    return best_lo[0], best_lo[1], best_hi[0], best_hi[1]


def barrier_sup_abs(v: PiecewiseBarrier, domain: IntervalSet) -> float:
    vmin, _, vmax, _ = barrier_extrema(v, domain)
    return max(abs(vmin), abs(vmax))


@dataclass(frozen=True)
class BarrierCertificate:
    barrier: PiecewiseBarrier
    kind: Kind
    alpha: float
    beta: float

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        a, b = float(self.alpha), float(self.beta)
        if kind is Kind.DISSIPATIVE and not (0 < a < 1 and b >= 0):
            raise ValidationError(f"dissipative certificate needs alpha in (0,1) and beta >= 0, got {a}, {b}")
        if kind is Kind.ATTRACTIVE and not (a > 1 and b <= 0):
            raise ValidationError(f"attractive certificate needs alpha > 1 and beta <= 0, got {a}, {b}")
        if kind is Kind.WEIGHTED_ATTRACTIVE and not (a > 1 and b >= 0):
            raise ValidationError(f"weighted attractive certificate needs alpha > 1 and beta >= 0, got {a}, {b}")

    def target_weight(self) -> float:
        """Multiplier rho applied to the barrier inside the target."""
        if self.kind is Kind.DISSIPATIVE:
            return 1.0 / self.alpha
        if self.kind is Kind.ATTRACTIVE:
            return self.alpha
        return self.alpha**2

    def sink_threshold(self) -> float:
        return -self.beta / (self.alpha - 1.0)


@dataclass(frozen=True)
class Violation:
    condition: str
    x: float
    value: float
    bound: float


@dataclass(frozen=True)
class SideConditionReport:
    violations: Tuple[Violation, ...] = ()
    notes: Tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.violations


def check_side_conditions(cert: BarrierCertificate, spec: SystemSpec) -> SideConditionReport:
    v = cert.barrier
    if not v.covers(spec.augmented):
        raise ValidationError(
            f"barrier span {list(v.span)} does not cover the augmented space {spec.augmented.to_list()}"
        )
    found: List[Violation] = []
    notes: List[str] = []

    def at_least(name, domain, bound):
        for region in _spans(domain):
            for i, a, b in v.extents(region):
                vmin, xmin, _, _ = polynomial_extrema(v.pieces[i], a, b)
                if vmin < bound:
                    found.append(Violation(name, xmin, vmin, bound))

    def at_most(name, domain, bound):
        for region in _spans(domain):
            for i, a, b in v.extents(region):
                _, _, vmax, xmax = polynomial_extrema(v.pieces[i], a, b)
                if vmax > bound:
                    found.append(Violation(name, xmax, vmax, bound))

    if cert.kind is Kind.DISSIPATIVE:
        at_least("nonnegativity", spec.augmented, 0.0)
        at_least("target_lower", spec.target, 1.0)
    else:
        at_most("target_upper", spec.target, 1.0)
        sink = spec.sink()
        if sink:
            at_most("sink", sink, cert.sink_threshold())
        else:
            notes.append("sink set is empty; sink condition holds vacuously")
    return SideConditionReport(tuple(found), tuple(notes))
