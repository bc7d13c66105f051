"""Rigorous checking of the barrier drift inequalities.

The safe set is cut into cells on which, for every disturbance mode, the
successor stays on one side of the target boundary and inside one barrier
piece.  On each cell the expectation in the drift inequality is then a single
polynomial, and its nonnegativity is proved with Bernstein coefficients and
bisection.  All of this runs in exact rational arithmetic on the binary64
inputs, so a ``CERTIFIED`` verdict carries no rounding error.
"""

from __future__ import annotations

import bisect
import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence, Tuple

from .barrier import BarrierCertificate, Kind, check_side_conditions
from .model import Interval, SystemSpec
from .polynomial import Polynomial, RootIsolationError, real_roots

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 40
DEFAULT_SLACK = 0.0
DEDUP_TOL = 1e-12
MAX_NODES = 200_000


class Status(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


class PartitionError(RootIsolationError):
    """The partition could not be built (root isolation or flag verification failed)."""


@dataclass(frozen=True)
class Cell:
    interval: Interval
    own_piece: int
    in_target: Tuple[bool, ...]
    piece_index: Tuple[int, ...]


@dataclass(frozen=True)
class CertVerdict:
    status: Status
    witness: Optional[Tuple[float, float]] = None
    inconclusive_cells: tuple = ()
    max_depth_used: int = 0
    slack: float = 0.0
    detail: str = ""

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= DEDUP_TOL * max(1.0, abs(a), abs(b))


def _owner(breakpoints: Sequence[float], y) -> int:
    i = bisect.bisect_right(breakpoints, y) - 1
    return min(max(i, 0), len(breakpoints) - 2)


def _in_set(ivs, y) -> bool:
    return any(iv.lo <= y <= iv.hi for iv in ivs)


def partition_breakpoints(spec: SystemSpec, cert: BarrierCertificate) -> List[float]:
    """Safe-set endpoints, barrier breakpoints inside the safe set, and every
    preimage in the safe set of a target endpoint or barrier breakpoint.

    Target endpoints themselves are not needed: the residual depends on where
    x sits only through the barrier piece owning x.
    """
    v = cert.barrier
    canonical = set(spec.safe.endpoints()) | {b for b in v.breakpoints if b in spec.safe}
    levels = sorted(set(spec.target.endpoints()) | set(v.breakpoints))
    preimages = []
    for j, mode in enumerate(spec.modes):
        f = mode.dynamics.exact()
        for c in levels:
            for iv in spec.safe:
                try:
                    preimages.extend(real_roots(f - Fraction(c), iv.lo, iv.hi))
                except RootIsolationError as exc:
                    raise PartitionError(f"root isolation failed for mode {j} at level {c}: {exc}") from exc
    points: List[float] = []
    # canonical points first so they win ties against rounded preimages
    for x in sorted(canonical) + sorted(preimages):
        k = bisect.bisect_left(points, x)
        near = [p for p in points[max(k - 1, 0) : k + 1] if _close(p, x)]
        if not near:
            points.insert(k, x)
    return points


def build_partition(spec: SystemSpec, cert: BarrierCertificate) -> List[Cell]:
    v = cert.barrier
    points = partition_breakpoints(spec, cert)
    cells = []
    for iv in spec.safe:
        inside = [p for p in points if iv.lo <= p <= iv.hi]
        for a, b in zip(inside, inside[1:]):
            if _close(a, b):
                continue
            cells.append(_make_cell(spec, v, a, b))
    return cells


def _flags(spec, v, x):
    own = _owner(v.breakpoints, x)
    tgt, idx = [], []
    for mode in spec.modes:
        y = float(mode.dynamics(x))
        tgt.append(y in spec.target)
        idx.append(_owner(v.breakpoints, y))
    return own, tuple(tgt), tuple(idx)


def _make_cell(spec, v, a, b) -> Cell:
    own, tgt, idx = _flags(spec, v, 0.5 * (a + b))
    w = b - a
    for s in (1e-7, 0.1, 0.25, 0.4, 0.6, 0.75, 0.9, 1 - 1e-7):
        x = a + s * w
        if _flags(spec, v, x) != (own, tgt, idx):
            raise PartitionError(f"successor flags are not constant on cell [{a}, {b}] (differ at x={x})")
    return Cell(Interval(a, b), own, tgt, idx)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def _weights(cert: BarrierCertificate) -> Tuple[Fraction, Fraction]:
    """(weight inside target, weight outside target) on successor barrier values."""
    a = Fraction(cert.alpha)
    if cert.kind is Kind.DISSIPATIVE:
        return Fraction(1), a
    if cert.kind is Kind.ATTRACTIVE:
        return a, Fraction(1)
    return a * a, Fraction(1)


def drift_residual(spec: SystemSpec, cert: BarrierCertificate, cell: Cell) -> Polynomial:
    """Polynomial whose nonnegativity on ``cell`` is the drift inequality there."""
    v = cert.barrier
    alpha, beta = Fraction(cert.alpha), Fraction(cert.beta)
    w_in, w_out = _weights(cert)
    expect = Polynomial((Fraction(0),))
    for j, mode in enumerate(spec.modes):
        comp = v.pieces[cell.piece_index[j]].exact().compose(mode.dynamics.exact())
        w = w_in if cell.in_target[j] else w_out
        expect = expect + comp * (Fraction(mode.probability) * w)
    current = v.pieces[cell.own_piece].exact() * alpha + beta
    if cert.kind is Kind.DISSIPATIVE:
        return current - expect
    return expect - current


def direct_residual(spec: SystemSpec, cert: BarrierCertificate, x: float) -> float:
    """Drift inequality slack at one state, evaluated pointwise (no composition).

    Successors, target membership and barrier ownership are all computed
    exactly, so the sign of the result is the sign of the true residual.
    """
    v = cert.barrier
    bps = v.breakpoints
    alpha, beta = Fraction(cert.alpha), Fraction(cert.beta)
    w_in, w_out = _weights(cert)
    X = Fraction(x)
    vx = v.pieces[_owner(bps, X)].exact()(X)
    expect = Fraction(0)
    for mode in spec.modes:
        y = mode.dynamics.exact()(X)
        vy = v.pieces[_owner(bps, y)].exact()(y)
        w = w_in if _in_set(spec.target, y) else w_out
        expect += Fraction(mode.probability) * w * vy
    current = alpha * vx + beta
    r = current - expect if cert.kind is Kind.DISSIPATIVE else expect - current
    return float(r)


# ---------------------------------------------------------------------------
# Bernstein certification
# ---------------------------------------------------------------------------


def bernstein_coefficients(p: Polynomial, lo, hi) -> List[Fraction]:
    """Exact Bernstein coefficients of p on [lo, hi] (degree = deg p)."""
    lo, hi = Fraction(lo), Fraction(hi)
    q = p.exact().compose(Polynomial((lo, hi - lo)))
    c = list(q.coeffs)
    n = len(c) - 1
    return [sum(Fraction(comb(i, j), comb(n, j)) * c[j] for j in range(i + 1)) for i in range(n + 1)]


def _split(b: List[Fraction]) -> Tuple[List[Fraction], List[Fraction]]:
    # de Casteljau at t = 1/2
    left, right = [b[0]], [b[-1]]
    cur = list(b)
    while len(cur) > 1:
        cur = [(u + w) / 2 for u, w in zip(cur, cur[1:])]
        left.append(cur[0])
        right.append(cur[-1])
    return left, right[::-1]


def _probe_points(lo: Fraction, hi: Fraction, n: int) -> List[Fraction]:
    pts = [lo + (hi - lo) * i / n for i in range(1, n)] if n > 1 else []
    pts += [(lo + hi) / 2, lo, hi]
    return pts


def certify_nonneg_bernstein(
    r: Polynomial,
    iv: Interval,
    max_depth: int = DEFAULT_MAX_DEPTH,
    slack: float = DEFAULT_SLACK,
) -> CertVerdict:
    """Prove r >= -slack on iv, find a point where r < -slack, or give up at max_depth."""
    if max_depth < 0 or slack < 0:
        raise ValueError("max_depth and slack must be nonnegative")
    exact = r.exact()
    floor = -Fraction(slack)
    a0, b0 = Fraction(iv.lo), Fraction(iv.hi)
    n = exact.degree
    stack = [(bernstein_coefficients(exact, a0, b0), a0, b0, 0)]
    undecided: List[Interval] = []
    depth_used = 0
    nodes = 0
    while stack:
        coeffs, a, b, depth = stack.pop()
        nodes += 1
        depth_used = max(depth_used, depth)
        if min(coeffs) >= floor:
            continue
        for x in _probe_points(a, b, n):
            xf = min(max(float(x), iv.lo), iv.hi)
            val = exact(Fraction(xf))
            if val < floor:
                return CertVerdict(Status.REFUTED, (xf, float(val)), (), depth_used, slack)
        if depth >= max_depth or nodes >= MAX_NODES:
            undecided.append(Interval(float(a), float(b)))
            continue
        left, right = _split(coeffs)
        m = (a + b) / 2
        stack.append((right, m, b, depth + 1))
        stack.append((left, a, m, depth + 1))
    if undecided:
        return CertVerdict(Status.INCONCLUSIVE, None, tuple(undecided), depth_used, slack)
    return CertVerdict(Status.CERTIFIED, None, (), depth_used, slack)


# ---------------------------------------------------------------------------
# full check
# ---------------------------------------------------------------------------


def _confirmed_witness(spec, cert, cell, r, verdict, slack):
    """A state in ``cell`` where the pointwise inequality itself fails, if any."""
    x, _ = verdict.witness
    candidates = [x]
    lo, hi = cell.interval.lo, cell.interval.hi
    candidates += [lo + (hi - lo) * i / 64 for i in range(1, 64)]
    exact = r.exact()
    for c in candidates:
        if lo < c < hi and exact(Fraction(c)) < -Fraction(slack):
            d = direct_residual(spec, cert, c)
            if d < -slack:
                return c, d
    d = direct_residual(spec, cert, x)
    if d < -slack:
        return x, d
    return None


def check_certificate(
    spec: SystemSpec,
    cert: BarrierCertificate,
    max_depth: int = DEFAULT_MAX_DEPTH,
    slack: float = DEFAULT_SLACK,
) -> CertVerdict:
    side = check_side_conditions(cert, spec)
    if not side.passed:
        v = side.violations[0]
        return CertVerdict(
            Status.REFUTED,
            (v.x, -abs(v.value - v.bound)),
            (),
            0,
            slack,
            f"side condition '{v.condition}' fails: v({v.x:g}) = {v.value:g} vs bound {v.bound:g}",
        )
    try:
        cells = build_partition(spec, cert)
        points = partition_breakpoints(spec, cert)
    except PartitionError as exc:
        return CertVerdict(Status.INCONCLUSIVE, None, (), 0, slack, str(exc))

    undecided = []
    depth_used = 0
    for cell in cells:
        r = drift_residual(spec, cert, cell)
        verdict = certify_nonneg_bernstein(r, cell.interval, max_depth, slack)
        depth_used = max(depth_used, verdict.max_depth_used)
        if verdict.status is Status.REFUTED:
            hit = _confirmed_witness(spec, cert, cell, r, verdict, slack)
            if hit is not None:
                return CertVerdict(
                    Status.REFUTED,
                    hit,
                    (),
                    depth_used,
                    slack,
                    f"drift inequality fails on cell [{cell.interval.lo:g}, {cell.interval.hi:g}]",
                )
            logger.warning("cell %s: polynomial witness not confirmed pointwise", cell.interval)
            undecided.append(cell)
        elif verdict.status is Status.INCONCLUSIVE:
            undecided.append(cell)
    # breakpoints are single states whose successors may sit exactly on a
    # barrier or target boundary; check them pointwise
    for x in points:
        if x in spec.safe:
            d = direct_residual(spec, cert, x)
            if d < -slack:
                return CertVerdict(
                    Status.REFUTED, (x, d), (), depth_used, slack, f"drift inequality fails at breakpoint x={x:g}"
                )
    if undecided:
        return CertVerdict(
            Status.INCONCLUSIVE, None, tuple(undecided), depth_used, slack, f"{len(undecided)} cell(s) undecided"
        )
    notes = "; ".join(side.notes)
    return CertVerdict(Status.CERTIFIED, None, (), depth_used, slack, notes or f"{len(cells)} cells certified")
