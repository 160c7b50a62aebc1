"""Closed-chain multi-arm manipulation planning with IK-switch regrasps."""

from ._core import (  # noqa: F401
    ArmModel,
    CompositeConfig,
    FormatError,
    NoGoalIk,
    Pose2,
    Scenario,
    check,
    differential_ik_step,
    elbow_class,
    enumerate_ik,
    equilibrium_feasible,
    flexibility_score,
    forward_kinematics,
    jacobian,
    load_scenario,
    normalize_angle,
    parse_scenario,
    plan,
    pose_distance,
    render,
    simulate,
)

__version__ = "0.1.0"
