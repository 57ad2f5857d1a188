"""Multi-level GI/G/1 heavy-traffic simulator (Python bindings)."""

from ._core import (
    CoverageError,
    ParameterError,
    __version__,
    canonical_json,
    config_hash,
    ks_distance,
    reflect,
    run,
    selftest,
    simulate,
    solve_sde,
)

__all__ = [
    "CoverageError",
    "ParameterError",
    "__version__",
    "canonical_json",
    "config_hash",
    "ks_distance",
    "reflect",
    "run",
    "selftest",
    "simulate",
    "solve_sde",
]
