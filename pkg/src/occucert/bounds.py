"""Closed-form probability bounds on reaching at least k target visits while safe.

Each function takes a :class:`BoundQuery` and returns a :class:`BoundResult`
rather than raising, so that sweeps over (N, k) grids can report the cells
whose preconditions fail next to the ones that hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .barrier import BarrierCertificate, Kind, barrier_eval, barrier_sup_abs
from .model import SystemSpec

INF = math.inf


@dataclass(frozen=True)
class BoundQuery:
    horizon: float  # positive integer or math.inf
    visits: int
    x0_in_target: bool
    v0: float
    M: float
    alpha: float
    beta: float
    kind: Kind

    @property
    def k_prime(self) -> int:
        return self.visits - int(self.x0_in_target)

    @property
    def finite(self) -> bool:
        return not math.isinf(self.horizon)


@dataclass(frozen=True)
class BoundResult:
    side: str  # "upper" or "lower"
    horizon: float
    visits: int
    value: Optional[float]
    raw_value: Optional[float]
    valid: bool
    invalid_reason: Optional[str] = None
    drift_term: float = 0.0
    rho0: float = 1.0


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _invalid(side: str, q: BoundQuery, reason: str) -> BoundResult:
    return BoundResult(side, q.horizon, q.visits, None, None, False, reason)


def _ok(side, q, raw, drift, rho0) -> BoundResult:
    return BoundResult(side, q.horizon, q.visits, _clamp(raw), raw, True, None, drift, rho0)


def _range_problem(q: BoundQuery) -> Optional[str]:
    if q.visits < 1:
        return f"k={q.visits} must be at least 1"
    if q.finite:
        if q.horizon < 1 or q.horizon != int(q.horizon):
            return f"horizon N={q.horizon} must be a positive integer or inf"
        if q.visits > q.horizon + 1:
            return f"k={q.visits} exceeds N+1={int(q.horizon) + 1}"
    return None


def _pow(a: float, e: float) -> float:
    try:
        return a**e
    except OverflowError:
        return math.inf


def inverse_geometric_sum(alpha: float, n: int) -> float:
    """sum_{t=1}^{n} alpha**(-t) in closed form."""
    if alpha == 1.0:
        return float(n)
    return (_pow(alpha, -n) - 1.0) / (1.0 - alpha)


def upper_bound(q: BoundQuery) -> BoundResult:
    side = "upper"
    if q.kind is not Kind.DISSIPATIVE:
        return _invalid(side, q, "upper bounds need a dissipative certificate")
    if not (0 < q.alpha < 1 and q.beta >= 0):
        return _invalid(side, q, "dissipative certificate needs alpha in (0,1) and beta >= 0")
    problem = _range_problem(q)
    if problem:
        return _invalid(side, q, problem)
    rho0 = 1.0 / q.alpha if q.x0_in_target else 1.0
    a = q.alpha
    if not q.finite:
        if q.beta != 0:
            return _invalid(side, q, "bound diverges as N -> inf when beta > 0")
        return _ok(side, q, q.v0 * rho0 * a**q.visits, 0.0, rho0)
    n = int(q.horizon)
    drift = q.beta / a * inverse_geometric_sum(a, n) if q.beta else 0.0
    raw = (q.v0 * rho0 + drift) * a**q.visits
    return _ok(side, q, raw, drift, rho0)


def lower_bound_attractive(q: BoundQuery) -> BoundResult:
    side = "lower"
    if q.kind is not Kind.ATTRACTIVE:
        return _invalid(side, q, "this lower bound needs an attractive certificate")
    if not (q.alpha > 1 and q.beta <= 0):
        return _invalid(side, q, "attractive certificate needs alpha > 1 and beta <= 0")
    problem = _range_problem(q)
    if problem:
        return _invalid(side, q, problem)
    rho0 = q.alpha if q.x0_in_target else 1.0
    if not q.finite:
        if q.beta != 0:
            return _invalid(side, q, "penalty beta*N diverges as N -> inf; the bound is vacuous unless beta = 0")
        return _ok(side, q, q.v0, 0.0, rho0)
    n = int(q.horizon)
    if q.k_prime > n:
        return _invalid(side, q, f"k' = k - 1_T(x0) = {q.k_prime} exceeds N={n}")
    tail = q.M * q.alpha ** (-(n - q.visits + 1))
    den = rho0 - tail
    if den <= 0:
        return _invalid(side, q, "precondition rho(x0) > M*alpha^-(N-k+1) fails")
    drift = q.beta * n
    return _ok(side, q, (q.v0 * rho0 + drift - tail) / den, drift, rho0)


def weighted_drift(beta: float, alpha: float, k_prime: int) -> float:
    return beta / (alpha - 1.0) * (1.0 - alpha ** (-k_prime))


def lower_bound_weighted(q: BoundQuery) -> BoundResult:
    side = "lower"
    if q.kind is not Kind.WEIGHTED_ATTRACTIVE:
        return _invalid(side, q, "this lower bound needs a weighted attractive certificate")
    if not (q.alpha > 1 and q.beta >= 0):
        return _invalid(side, q, "weighted attractive certificate needs alpha > 1 and beta >= 0")
    problem = _range_problem(q)
    if problem:
        return _invalid(side, q, problem)
    a = q.alpha
    rho0 = a * a if q.x0_in_target else 1.0
    drift = weighted_drift(q.beta, a, q.k_prime)
    success = _pow(a, q.visits + int(q.x0_in_target))
    if not q.finite:
        return _ok(side, q, (q.v0 * rho0 + drift) / success, drift, rho0)
    n = int(q.horizon)
    if q.k_prime > n:
        return _invalid(side, q, f"k' = k - 1_T(x0) = {q.k_prime} exceeds N={n}")
    tail = q.M * _pow(a, -(n - 2 * q.visits + 2))
    den = success - tail
    if den <= 0:
        return _invalid(side, q, "denominator alpha^(k+1_T(x0)) - M*alpha^-(N-2k+2) is not positive")
    return _ok(side, q, (q.v0 * rho0 + drift - tail) / den, drift, rho0)


def make_query(spec: SystemSpec, cert: BarrierCertificate, horizon: float, k: int) -> BoundQuery:
    v = cert.barrier
    return BoundQuery(
        horizon=horizon,
        visits=k,
        x0_in_target=spec.x0 in spec.target,
        v0=barrier_eval(v, spec.x0),
        M=barrier_sup_abs(v, spec.augmented),
        alpha=cert.alpha,
        beta=cert.beta,
        kind=cert.kind,
    )


def certified_bound(q: BoundQuery) -> BoundResult:
    """Dispatch on certificate kind."""
    if q.kind is Kind.DISSIPATIVE:
        return upper_bound(q)
    if q.kind is Kind.ATTRACTIVE:
        return lower_bound_attractive(q)
    return lower_bound_weighted(q)
