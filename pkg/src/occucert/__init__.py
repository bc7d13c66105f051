"""Certified bounds on constrained occupation times of scalar stochastic systems."""

from .barrier import BarrierCertificate, Kind, PiecewiseBarrier, check_side_conditions
from .bounds import BoundQuery, BoundResult, certified_bound, make_query
from .certifier import CertVerdict, Status, build_partition, check_certificate
from .config import RunConfig, dump_config, parse_spec_file
from .model import (
    DomainError,
    Interval,
    IntervalSet,
    SystemSpec,
    ValidationError,
    make_spec,
    normalize_interval_set,
    one_step_reachable,
)
from .montecarlo import estimate_occupation_probability, martingale_diagnostic, validate_bounds
from .polynomial import Polynomial
from .switched import constrained_occupation_count, occupation_count

__version__ = "0.1.0"
