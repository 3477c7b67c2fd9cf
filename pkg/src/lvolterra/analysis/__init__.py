"""Lyapunov functions, fixed points, orbits and ω-limit bounds."""

from lvolterra.analysis.fixed_points import (
    FixedPointKind,
    FixedPointRecord,
    enumerate_face_fixed_points,
    face_interior_fixed_point,
    numeric_fixed_points,
    vertex_fixed_points,
)
from lvolterra.analysis.lyapunov import (
    LyapunovFamily,
    LyapunovFunction,
    empirical_lyapunov_check,
)
from lvolterra.analysis.omega import omega_upper_bound, partial_sum_check, verify_omega_bound
from lvolterra.analysis.trajectory import Trajectory, detect_cycle, simulate

__all__ = [
    "FixedPointKind",
    "FixedPointRecord",
    "LyapunovFamily",
    "LyapunovFunction",
    "Trajectory",
    "detect_cycle",
    "empirical_lyapunov_check",
    "enumerate_face_fixed_points",
    "face_interior_fixed_point",
    "numeric_fixed_points",
    "omega_upper_bound",
    "partial_sum_check",
    "simulate",
    "verify_omega_bound",
    "vertex_fixed_points",
]
