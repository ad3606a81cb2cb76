"""Exact computational algebra over strongly Z^2-graded rings."""

from .coeffs import QQ, GF101, PrimeField, RationalField, field_from_name
from .grading import Degree, Involution, IDENTITY, FLIP_X, FLIP_Y, SWAP, FLIP_BOTH
from .rings import (
    GradedElement,
    PartitionOfUnity,
    RingInstance,
    check_strongly_graded,
    compose_partitions,
    find_partition,
    make_cone,
    make_kbar,
    make_khat,
    make_laurent,
    make_ring,
    mu_map,
    pi_map,
)

__all__ = [
    "QQ", "GF101", "PrimeField", "RationalField", "field_from_name",
    "Degree", "Involution", "IDENTITY", "FLIP_X", "FLIP_Y", "SWAP", "FLIP_BOTH",
    "GradedElement", "PartitionOfUnity", "RingInstance",
    "check_strongly_graded", "compose_partitions", "find_partition",
    "make_cone", "make_kbar", "make_khat", "make_laurent", "make_ring",
    "mu_map", "pi_map",
]
