"""Switched-system semantics and occupation counting along single trajectories.

The switched system copies the original dynamics while the state is safe and
freezes it once it leaves the safe set.  Because the target lies inside the
safe set, counting target visits on the frozen trajectory gives exactly the
constrained occupation count of the original one, path by path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .model import DomainError, SystemSpec, mode_successor

ModeSequence = Sequence[int]


@dataclass(frozen=True)
class OccupationTrace:
    states: Tuple[float, ...]
    visit_flags: Tuple[bool, ...]
    exit_time: float  # first index outside the safe set, math.inf if none
    count: int


def switched_successor(spec: SystemSpec, x: float, j: int) -> float:
    if x not in spec.augmented:
        raise DomainError(f"state {x} lies outside the augmented space {spec.augmented.to_list()}")
    if x in spec.safe:
        return mode_successor(spec, x, j)
    return x


def _check_modes(spec: SystemSpec, modes: ModeSequence) -> None:
    m = len(spec.modes)
    for j in modes:
        if not 0 <= j < m:
            raise IndexError(f"mode index {j} out of range for a system with {m} modes")


def occupation_count(spec: SystemSpec, x0: float, modes: ModeSequence) -> OccupationTrace:
    """Visits to the target of the switched trajectory over t = 0..len(modes)."""
    _check_modes(spec, modes)
    x = x0
    states = [x]
    for j in modes:
        x = switched_successor(spec, x, j)
        states.append(x)
    flags = tuple(s in spec.target for s in states)
    exit_time = next((t for t, s in enumerate(states) if s not in spec.safe), math.inf)
    return OccupationTrace(tuple(states), flags, exit_time, sum(flags))


def constrained_occupation_count(spec: SystemSpec, x0: float, modes: ModeSequence) -> OccupationTrace:
    """Visits to the target of the original trajectory made before the safety exit."""
    _check_modes(spec, modes)
    x = x0
    states = [x]
    for j in modes:
        x = mode_successor(spec, x, j)
        states.append(x)
    exit_time = next((t for t, s in enumerate(states) if s not in spec.safe), math.inf)
    flags = tuple(s in spec.target and t < exit_time for t, s in enumerate(states))
    return OccupationTrace(tuple(states), flags, exit_time, sum(flags))
