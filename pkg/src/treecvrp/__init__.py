"""Splittable capacitated vehicle routing on trees with a certified 4/3 guarantee."""

from .instance import (
    Instance,
    InstanceError,
    Solution,
    Tour,
    lower_bound,
    normalize,
    parse_instance,
    serialize_instance,
    serialize_solution,
    tour_cost,
    verify_solution,
)
from .oracle import exact_opt, itp_baseline
from .solver import SolveReport, solve
from .strategies import CertificateViolation

__all__ = [
    "Instance",
    "InstanceError",
    "Solution",
    "Tour",
    "lower_bound",
    "normalize",
    "parse_instance",
    "serialize_instance",
    "serialize_solution",
    "tour_cost",
    "verify_solution",
    "exact_opt",
    "itp_baseline",
    "SolveReport",
    "solve",
    "CertificateViolation",
]
