"""Hierarchical multi-UAV collision avoidance simulator."""

from ._hca import (
    ConfigError,
    GeometryError,
    InvalidCommand,
    Region,
    RegionConfig,
    Scenario,
    UavState,
    Vec2,
    VehicleParams,
    avg_collision_free_distance,
    classify_region,
    compare,
    count_failures,
    load_scenario,
    parse_scenario,
    reactive_input,
    rollout,
    run,
    saturate,
    step,
)

__all__ = [
    "ConfigError",
    "GeometryError",
    "InvalidCommand",
    "Region",
    "RegionConfig",
    "Scenario",
    "UavState",
    "Vec2",
    "VehicleParams",
    "avg_collision_free_distance",
    "classify_region",
    "compare",
    "count_failures",
    "load_scenario",
    "parse_scenario",
    "reactive_input",
    "rollout",
    "run",
    "saturate",
    "step",
]
