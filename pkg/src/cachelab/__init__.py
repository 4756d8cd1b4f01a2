"""Exact storage-rate tradeoff analysis for cache-aided networks.

Computes achievable delivery rates and information-theoretic lower bounds
exactly (rational arithmetic end to end), simulates the repetition-based
coded caching schemes bit-exactly, and verifies constant-gap and dominance
properties over parameter grids.
"""

from .core import (
    CacheLabError,
    DecodeFailureError,
    DeliveryMode,
    DemandMatrix,
    DivisibilityError,
    DomainError,
    InsufficientCollectiveStorageError,
    Library,
    ModeMismatchError,
    NotCornerError,
    OutOfRangeError,
    PlacementMismatchError,
    SystemConfig,
    format_rational,
    make_config,
    parse_rational,
    random_demands,
    subsets,
    worst_case_demands,
)
from .bounds import (
    BoundResult,
    BoundTerm,
    EvalMode,
    convex_envelope,
    corner_points,
    lb_centralized,
    lb_cutset_centralized,
    lb_cutset_d2d,
    lb_d2d,
    lb_term_centralized,
    lb_term_d2d,
    lower_convex_hull,
    rate_ach_centralized,
    rate_ach_d2d,
)
from .schemes import (
    CacheContents,
    SimReport,
    Transmission,
    TransmissionLog,
    decode,
    default_file_bits,
    deliver_centralized,
    deliver_d2d,
    place_centralized,
    place_d2d,
    simulate,
)
from .analysis import (
    GapRecord,
    RegimeLabel,
    case_study,
    curve,
    curve_csv,
    gap_at,
    memory_grid,
    regime_classify,
    sweep,
)

__all__ = [
    "BoundResult",
    "BoundTerm",
    "CacheContents",
    "CacheLabError",
    "DecodeFailureError",
    "DeliveryMode",
    "DemandMatrix",
    "DivisibilityError",
    "DomainError",
    "EvalMode",
    "GapRecord",
    "InsufficientCollectiveStorageError",
    "Library",
    "ModeMismatchError",
    "NotCornerError",
    "OutOfRangeError",
    "PlacementMismatchError",
    "RegimeLabel",
    "SimReport",
    "SystemConfig",
    "Transmission",
    "TransmissionLog",
    "case_study",
    "convex_envelope",
    "corner_points",
    "curve",
    "curve_csv",
    "decode",
    "default_file_bits",
    "deliver_centralized",
    "deliver_d2d",
    "format_rational",
    "gap_at",
    "lb_centralized",
    "lb_cutset_centralized",
    "lb_cutset_d2d",
    "lb_d2d",
    "lb_term_centralized",
    "lb_term_d2d",
    "lower_convex_hull",
    "make_config",
    "memory_grid",
    "parse_rational",
    "place_centralized",
    "place_d2d",
    "random_demands",
    "rate_ach_centralized",
    "rate_ach_d2d",
    "regime_classify",
    "simulate",
    "subsets",
    "sweep",
    "worst_case_demands",
]

__version__ = "0.1.0"
