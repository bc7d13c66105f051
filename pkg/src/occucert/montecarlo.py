"""Seeded Monte Carlo: occupation probabilities, bound validation, drift diagnostics.

Randomness comes from the counter-based Philox generator.  Trajectories are
grouped into fixed blocks of ``BLOCK`` paths; block ``b`` draws from the key
``(seed, b)`` and at step ``t`` consumes one uniform per path in the block.
The mode used by trajectory ``i`` at step ``t`` is therefore a fixed function
of ``(seed, i, t)``: it does not depend on the horizon, on how many samples
were requested, or on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .barrier import BarrierCertificate, Kind
from .bounds import BoundResult
from .model import IntervalSet, SystemSpec

BLOCK = 4096
DEFAULT_CONFIDENCE = 0.99


def _members(s: IntervalSet, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape, dtype=bool)
    for iv in s:
        out |= (x >= iv.lo) & (x <= iv.hi)
    return out


def _block_rng(seed: int, block: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=(block << 64) | seed))


def _blocks(samples: int) -> List[Tuple[int, int]]:
    return [(b, min(BLOCK, samples - b * BLOCK)) for b in range((samples + BLOCK - 1) // BLOCK)]


def _run_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _step(spec: SystemSpec, x: np.ndarray, modes: np.ndarray) -> np.ndarray:
    y = np.empty_like(x)
    for j, mode in enumerate(spec.modes):
        mask = modes == j
        if mask.any():
            y[mask] = mode.dynamics.to_float()(x[mask])
    return y


def _draw_modes(rng: np.random.Generator, cum: np.ndarray, n: int) -> np.ndarray:
    # always consume a full block so a path's draws do not depend on the block fill
    u = rng.random(BLOCK)[:n]
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


def _cumulative(spec: SystemSpec) -> np.ndarray:
    return np.cumsum(spec.probabilities)


def simulate_block(
    spec: SystemSpec,
    horizon: int,
    seed: int,
    block: int,
    size: int,
    x0: Optional[float] = None,
    semantics: str = "switched",
    keep_states: bool = False,
):
    """Occupation counts (and optionally the state matrix) for one block of paths.

    ``semantics="switched"`` freezes paths outside the safe set and counts all
    target visits; ``"constrained"`` follows the original dynamics and counts
    only visits before the first safety exit.
    """
    if semantics not in ("switched", "constrained"):
        raise ValueError(f"unknown semantics {semantics!r}")
    rng = _block_rng(seed, block)
    cum = _cumulative(spec)
    x = np.full(size, spec.x0 if x0 is None else x0, dtype=float)
    safe_so_far = _members(spec.safe, x)
    count = (_members(spec.target, x) & safe_so_far).astype(np.int64)
    states = [x.copy()] if keep_states else None
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(horizon):
            modes = _draw_modes(rng, cum, size)
            y = _step(spec, x, modes)
            if semantics == "switched":
                x = np.where(_members(spec.safe, x), y, x)
                count += _members(spec.target, x)
            else:
                x = y
                safe_so_far &= _members(spec.safe, x)
                count += _members(spec.target, x) & safe_so_far
            if keep_states:
                states.append(x.copy())
    if keep_states:
        return count, np.stack(states, axis=1)
    return count


def occupation_counts(
    spec: SystemSpec,
    horizon: int,
    samples: int,
    seed: int,
    x0: Optional[float] = None,
    semantics: str = "switched",
    workers: int = 1,
) -> np.ndarray:
    """Occupation count of every sampled path, in trajectory-index order."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    parts = _run_map(
        lambda bs: simulate_block(spec, horizon, seed, bs[0], bs[1], x0, semantics),
        _blocks(samples),
        workers,
    )
    return np.concatenate(parts)


def sample_paths(spec: SystemSpec, horizon: int, n_paths: int, seed: int) -> np.ndarray:
    """States of the first ``n_paths`` switched trajectories, shape (n_paths, horizon + 1)."""
    rows = []
    for b, size in _blocks(n_paths):
        _, states = simulate_block(spec, horizon, seed, b, size, keep_states=True)
        rows.append(states)
    return np.concatenate(rows, axis=0)


def sample_mode_sequences(spec: SystemSpec, horizon: int, samples: int, seed: int) -> np.ndarray:
    """Mode indices drawn for each path, shape (samples, horizon), same stream as the simulator."""
    cum = _cumulative(spec)
    rows = []
    for b, size in _blocks(samples):
        rng = _block_rng(seed, b)
        rows.append(np.stack([_draw_modes(rng, cum, size) for _ in range(horizon)], axis=1).reshape(size, horizon))
    return np.concatenate(rows, axis=0)


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalEstimate:
    horizon: int
    visits: int
    successes: int
    samples: int
    p_hat: float
    ci_lo: float
    ci_hi: float


def clopper_pearson(successes: int, n: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
    """Exact binomial interval; one-sided at the boundaries 0 and n."""
    if not 0 <= successes <= n or n < 1:
        raise ValueError(f"need 0 <= successes <= n and n >= 1, got {successes}, {n}")
    if successes == 0:
        return 0.0, float(stats.beta.ppf(confidence, 1, n))
    if successes == n:
        return float(stats.beta.ppf(1 - confidence, n, 1)), 1.0
    tail = (1 - confidence) / 2
    lo = float(stats.beta.ppf(tail, successes, n - successes + 1))
    hi = float(stats.beta.ppf(1 - tail, successes + 1, n - successes))
    return lo, hi


def estimate_occupation_probability(
    spec: SystemSpec,
    horizon: int,
    ks: Sequence[int],
    samples: int,
    seed: int,
    confidence: float = DEFAULT_CONFIDENCE,
    workers: int = 1,
) -> List[EmpiricalEstimate]:
    for k in ks:
        if not 1 <= k <= horizon + 1:
            raise ValueError(f"k={k} must lie in 1..{horizon + 1}")
    counts = occupation_counts(spec, horizon, samples, seed, workers=workers)
    out = []
    for k in ks:
        hits = int(np.count_nonzero(counts >= k))
        lo, hi = clopper_pearson(hits, samples, confidence)
        out.append(EmpiricalEstimate(horizon, k, hits, samples, hits / samples, lo, hi))
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    horizon: int
    visits: int
    side: str
    bound: Optional[float]
    p_hat: float
    ci_lo: float
    ci_hi: float
    margin: Optional[float]
    status: str  # "pass", "fail" or "skipped"


@dataclass(frozen=True)
class ValidationReport:
    comparisons: Tuple[Comparison, ...]

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.comparisons)

    @property
    def skipped(self) -> int:
        return sum(c.status == "skipped" for c in self.comparisons)


def validate_bounds(estimates: Sequence[EmpiricalEstimate], bounds: Sequence[BoundResult]) -> ValidationReport:
    """Check that no certified bound is contradicted by the estimate's confidence interval."""
    if len(estimates) != len(bounds):
        raise ValueError(f"got {len(estimates)} estimates but {len(bounds)} bounds")
    rows = []
    for est, b in zip(estimates, bounds):
        if (est.horizon, est.visits) != (b.horizon, b.visits):
            raise ValueError(
                f"misaligned pair: estimate (N={est.horizon}, k={est.visits}) vs bound (N={b.horizon}, k={b.visits})"
            )
        if not b.valid:
            rows.append(Comparison(est.horizon, est.visits, b.side, None, est.p_hat, est.ci_lo, est.ci_hi, None, "skipped"))
            continue
        if b.side == "lower":
            ok = est.ci_hi >= b.value
            margin = est.p_hat - b.value
        else:
            ok = est.ci_lo <= b.value
            margin = b.value - est.p_hat
        rows.append(
            Comparison(est.horizon, est.visits, b.side, b.value, est.p_hat, est.ci_lo, est.ci_hi, margin, "pass" if ok else "fail")
        )
    return ValidationReport(tuple(rows))


# ---------------------------------------------------------------------------
# drift diagnostics on the scaled process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftDiagnostic:
    times: Tuple[int, ...]
    empirical_drift: Tuple[float, ...]
    ci_halfwidth: Tuple[float, ...]
    direction: str  # "supermartingale" or "submartingale"

    def violations(self) -> List[int]:
        """Times at which the drift leaves the certified direction by more than the half-width."""
        if self.direction == "supermartingale":
            bad = [d > h for d, h in zip(self.empirical_drift, self.ci_halfwidth)]
        else:
            bad = [d < -h for d, h in zip(self.empirical_drift, self.ci_halfwidth)]
        return [t for t, b in zip(self.times, bad) if b]


def _scaled(cert: BarrierCertificate, t: int, visits: np.ndarray, v: np.ndarray) -> np.ndarray:
    a = cert.alpha
    if cert.kind is Kind.DISSIPATIVE:
        exponent = -visits
    elif cert.kind is Kind.ATTRACTIVE:
        exponent = -(t - visits)
    else:
        exponent = -(t - 2 * visits)
    return np.power(a, exponent.astype(float)) * v


def _drift_allowance(cert: BarrierCertificate, t: int, visits: np.ndarray) -> np.ndarray:
    a, b = cert.alpha, cert.beta
    if cert.kind is Kind.DISSIPATIVE:
        return (b / a) * np.power(a, -visits.astype(float))
    if cert.kind is Kind.ATTRACTIVE:
        return np.full(visits.shape, b)
    return np.full(visits.shape, b * a ** (-(t + 1)))


def martingale_diagnostic(
    spec: SystemSpec,
    cert: BarrierCertificate,
    x0: float,
    t_max: int,
    samples: int,
    seed: int,
    confidence: float = DEFAULT_CONFIDENCE,
) -> DriftDiagnostic:
    """Per-step mean of Z_{t+1} - Z_t minus the certified drift allowance.

    Dissipative certificates should give a supermartingale (mean <= 0), the
    attractive kinds a submartingale (mean >= 0), up to sampling error.
    """
    increments = [[] for _ in range(t_max)]
    cum = _cumulative(spec)
    v = cert.barrier
    for b, size in _blocks(samples):
        rng = _block_rng(seed, b)
        x = np.full(size, float(x0))
        visits = _members(spec.target, x).astype(np.int64)
        z = _scaled(cert, 0, visits, v.eval_array(x))
        for t in range(t_max):
            allowance = _drift_allowance(cert, t, visits)
            modes = _draw_modes(rng, cum, size)
            x = np.where(_members(spec.safe, x), _step(spec, x, modes), x)
            visits = visits + _members(spec.target, x)
            z_next = _scaled(cert, t + 1, visits, v.eval_array(x))
            increments[t].append(z_next - z - allowance)
            z = z_next
    zq = float(stats.norm.ppf(0.5 + confidence / 2))
    drifts, halfwidths = [], []
    for parts in increments:
        d = np.concatenate(parts)
        mean = math.fsum(d) / d.size
        sd = float(np.std(d, ddof=1)) if d.size > 1 else 0.0
        drifts.append(mean)
        halfwidths.append(zq * sd / math.sqrt(d.size))
    direction = "supermartingale" if cert.kind is Kind.DISSIPATIVE else "submartingale"
    return DriftDiagnostic(tuple(range(t_max)), tuple(drifts), tuple(halfwidths), direction)
