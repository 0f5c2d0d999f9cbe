"""Group-aware crowd navigation: simulation, policy, and statistics bindings."""

from ._core import (
    CrowdEnv,
    Observation,
    Policy,
    action_velocity,
    convex_hull,
    mix_seed,
    n_actions,
    pooled_t_test,
    robot_frame,
)

__all__ = [
    "CrowdEnv",
    "Observation",
    "Policy",
    "action_velocity",
    "convex_hull",
    "mix_seed",
    "n_actions",
    "pooled_t_test",
    "robot_frame",
]
