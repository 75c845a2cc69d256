"""Curvature-integrated MPCC racing planner (Python bindings)."""

from ._core import (
    Centerline,
    ConfigurationError,
    CurvatureProfile,
    DomainError,
    Error,
    LapStats,
    ParseError,
    RaceResult,
    RunConfig,
    Track,
    circle,
    compare,
    curvature_profile,
    load_centerline,
    load_track,
    map_nsc_to_beta,
    parse_centerline,
    parse_run_config,
    rk4_step,
    run_race,
    stadium_chicane,
)

__all__ = [
    "Centerline",
    "ConfigurationError",
    "CurvatureProfile",
    "DomainError",
    "Error",
    "LapStats",
    "ParseError",
    "RaceResult",
    "RunConfig",
    "Track",
    "circle",
    "compare",
    "curvature_profile",
    "load_centerline",
    "load_track",
    "map_nsc_to_beta",
    "parse_centerline",
    "parse_run_config",
    "rk4_step",
    "run_race",
    "stadium_chicane",
]
