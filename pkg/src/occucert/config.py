"""JSON run configurations: parsing, validation and a round-tripping serializer.

Layout::

    {
      "system":      {"modes": [{"coefficients": [...], "probability": p}, ...],
                      "safe": [[lo, hi], ...], "target": [[lo, hi], ...],
                      "augmented": [[lo, hi], ...],   # optional
                      "x0": x},
      "certificate": {"kind": "dissipative" | "attractive" | "weighted_attractive",
                      "alpha": a, "beta": b,
                      "breakpoints": [...], "pieces": [[...], ...]},
      "run":         {"horizons": [10, 20, "inf"], "visit_counts": [1, 3],
                      "samples": n, "seed": s, "depth": d, "slack": e,
                      "output": "path"}               # output optional
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from .barrier import BarrierCertificate, PiecewiseBarrier
from .certifier import DEFAULT_MAX_DEPTH, DEFAULT_SLACK
from .model import DisturbanceMode, SystemSpec, ValidationError, normalize_interval_set
from .polynomial import Polynomial

Horizon = Union[int, float]


@dataclass(frozen=True)
class RunConfig:
    spec: SystemSpec
    certificate: BarrierCertificate
    horizons: Tuple[Horizon, ...]
    visit_counts: Tuple[int, ...]
    samples: int = 100_000
    seed: int = 0
    depth: int = DEFAULT_MAX_DEPTH
    slack: float = DEFAULT_SLACK
    output_path: str = ""

    def __post_init__(self):
        if not self.horizons or not self.visit_counts:
            raise ValidationError("run.horizons and run.visit_counts must be nonempty")
        if self.samples < 1:
            raise ValidationError("run.samples must be at least 1")
        if self.depth < 0:
            raise ValidationError("run.depth must be nonnegative")
        if self.slack < 0:
            raise ValidationError("run.slack must be nonnegative")
        v = self.certificate.barrier
        if not v.covers(self.spec.augmented):
            raise ValidationError(
                f"certificate.breakpoints: barrier span {list(v.span)} does not cover "
                f"the augmented space {self.spec.augmented.to_list()}"
            )


def _require(tree: Dict[str, Any], key: str, where: str):
    if key not in tree:
        raise ValidationError(f"{where}.{key} is missing")
    return tree[key]


def _intervals(raw, where: str):
    try:
        return normalize_interval_set([tuple(map(float, pair)) for pair in raw])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def parse_horizon(h) -> Horizon:
    if isinstance(h, str):
        if h.strip().lower() == "inf":
            return math.inf
        raise ValidationError(f"run.horizons: cannot read {h!r}")
    if isinstance(h, bool) or not isinstance(h, int) or h < 1:
        raise ValidationError(f"run.horizons: {h!r} is not a positive integer or \"inf\"")
    return h


def format_horizon(h: Horizon):
    return "inf" if math.isinf(h) else int(h)


def config_from_tree(tree: Dict[str, Any]) -> RunConfig:
    system = _require(tree, "system", "config")
    cert = _require(tree, "certificate", "config")
    run = tree.get("run", {})
    modes = []
    for i, m in enumerate(_require(system, "modes", "system")):
        modes.append(
            DisturbanceMode(
                Polynomial([float(c) for c in _require(m, "coefficients", f"system.modes[{i}]")]),
                float(_require(m, "probability", f"system.modes[{i}]")),
            )
        )
    augmented = system.get("augmented")
    spec = SystemSpec(
        modes=tuple(modes),
        safe=_intervals(_require(system, "safe", "system"), "system.safe"),
        target=_intervals(_require(system, "target", "system"), "system.target"),
        x0=float(_require(system, "x0", "system")),
        augmented=None if augmented is None else _intervals(augmented, "system.augmented"),
    )
    barrier = PiecewiseBarrier(
        tuple(float(b) for b in _require(cert, "breakpoints", "certificate")),
        tuple(Polynomial([float(c) for c in p]) for p in _require(cert, "pieces", "certificate")),
    )
    certificate = BarrierCertificate(
        barrier,
        _require(cert, "kind", "certificate"),
        float(_require(cert, "alpha", "certificate")),
        float(_require(cert, "beta", "certificate")),
    )
    return RunConfig(
        spec=spec,
        certificate=certificate,
        horizons=tuple(parse_horizon(h) for h in run.get("horizons", [10])),
        visit_counts=tuple(int(k) for k in run.get("visit_counts", [1])),
        samples=int(run.get("samples", 100_000)),
        seed=int(run.get("seed", 0)),
        depth=int(run.get("depth", DEFAULT_MAX_DEPTH)),
        slack=float(run.get("slack", DEFAULT_SLACK)),
        output_path=str(run.get("output", "")),
    )


def parse_spec_file(path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_tree(tree)


def _coeffs(p: Polynomial) -> List[float]:
    return [float(c) for c in p.to_float().coeffs]


def config_to_tree(cfg: RunConfig) -> Dict[str, Any]:
    spec, cert = cfg.spec, cfg.certificate
    run: Dict[str, Any] = {
        "horizons": [format_horizon(h) for h in cfg.horizons],
        "visit_counts": list(cfg.visit_counts),
        "samples": cfg.samples,
        "seed": cfg.seed,
        "depth": cfg.depth,
        "slack": cfg.slack,
    }
    if cfg.output_path:
        run["output"] = cfg.output_path
    return {
        "system": {
            "modes": [{"coefficients": _coeffs(m.dynamics), "probability": m.probability} for m in spec.modes],
            "safe": spec.safe.to_list(),
            "target": spec.target.to_list(),
            "augmented": spec.augmented.to_list(),
            "x0": spec.x0,
        },
        "certificate": {
            "kind": cert.kind.value,
            "alpha": cert.alpha,
            "beta": cert.beta,
            "breakpoints": list(cert.barrier.breakpoints),
            "pieces": [_coeffs(p) for p in cert.barrier.pieces],
        },
        "run": run,
    }


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_tree(cfg), indent=2) + "\n"


def write_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")
