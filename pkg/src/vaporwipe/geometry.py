"""Closed-form tilt geometry: angle/length inversion, normal composition,
arc viewpoints around an anchor point, and the spraying-speed budget.

All angles are stored in radians; degrees appear only at reporting
interfaces.  Lengths are millimetres, times are seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArc, InfeasibleLength

WORLD_UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Angle:
    """A plane angle, stored in radians."""

    radians: float

    def __post_init__(self):
        if not math.isfinite(self.radians):
            raise ValueError("angle must be finite")

    @classmethod
    def from_degrees(cls, degrees: float) -> "Angle":
        return cls(math.radians(degrees))

    @property
    def degrees(self) -> float:
        return math.degrees(self.radians)

    def __neg__(self) -> "Angle":
        return Angle(-self.radians)


@dataclass(frozen=True)
class UnitVec3:
    """Unit-norm direction vector (checked to 1e-12)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"not unit norm: |v| = {n!r}")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVec3":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return cls(x / n, y / n, z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SprayGeometry:
    """Spray/sweep geometry: trajectory half-length, standoff, sweep span,
    wrist speed and the completion-time budget."""

    half_length: float          # l, mm
    standoff: float             # r, mm
    sweep_angle: Angle          # beta
    wrist_speed: float          # mm/s
    completion_budget: float    # s

    def __post_init__(self):
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if self.standoff <= 0:
            raise ValueError("standoff must be positive")
        if not 0 < self.sweep_angle.radians < math.pi:
            raise ValueError("sweep_angle must lie in (0, pi)")
        if self.wrist_speed <= 0:
            raise ValueError("wrist_speed must be positive")
        if self.completion_budget <= 0:
            raise ValueError("completion_budget must be positive")


@dataclass(frozen=True)
class SpraySpeedCheck:
    feasible: bool
    min_speed: float        # mm/s needed to finish inside the budget
    traverse_time: float    # s to cover the full sweep arc


@dataclass(frozen=True)
class CameraPose:
    """Camera position plus an orthonormal (right, up, forward) basis."""

    position: np.ndarray
    forward: np.ndarray
    right: np.ndarray
    up: np.ndarray

    @classmethod
    def looking_at(cls, position, target) -> "CameraPose":
        position = np.asarray(position, dtype=float)
        target = np.asarray(target, dtype=float)
        forward = target - position
        n = np.linalg.norm(forward)
        if n == 0.0:
            raise ValueError("camera position coincides with target")
        forward = forward / n
        right = np.cross(forward, WORLD_UP)
        rn = np.linalg.norm(right)
        if rn < 1e-12:
            raise ValueError("optical axis parallel to world up")
        right = right / rn
        up = np.cross(right, forward)
        return cls(position=position, forward=forward, right=right, up=up)


def angle_from_projected_length(half_length: float, measured_length: float,
                                tol: float | None = None) -> tuple[Angle, Angle]:
    """Invert the foreshortening relation L = 2l / cos(theta).

    Returns both signed solutions (+theta, -theta); the sign is resolved
    later by the viewpoint sweep.  Lengths within ``tol`` below the true
    trajectory length 2l clamp to zero tilt (segmentation noise can shave
    the footprint slightly).  Default tol is 1% of 2l.
    """
    if half_length <= 0:
        raise ValueError("half_length must be positive")
    if measured_length <= 0:
        raise ValueError("measured_length must be positive")
    full = 2.0 * half_length
    if tol is None:
        tol = 0.01 * full
    if measured_length < full - tol:
        raise InfeasibleLength(
            f"measured length {measured_length:.3f} mm below trajectory length {full:.3f} mm")
    if measured_length < full:
        return Angle(0.0), Angle(-0.0)
    theta = math.acos(full / measured_length)
    return Angle(theta), Angle(-theta)


def normal_from_angles(azimuth: Angle, elevation: Angle) -> UnitVec3:
    """Compose the plane normal from azimuth/elevation tilt angles."""
    half_pi = math.pi / 2.0
    if not -half_pi < azimuth.radians < half_pi:
        raise ValueError("azimuth must lie in (-90 deg, +90 deg)")
    if not -half_pi < elevation.radians < half_pi:
        raise ValueError("elevation must lie in (-90 deg, +90 deg)")
    cp, sp = math.cos(elevation.radians), math.sin(elevation.radians)
    ct, st = math.cos(azimuth.radians), math.sin(azimuth.radians)
    return UnitVec3.normalized(cp * ct, cp * st, sp)


def check_spray_speed(g: SprayGeometry) -> SpraySpeedCheck:
    """Check the arc-traverse budget r*beta / v_wrist < T_completion."""
    arc = g.standoff * g.sweep_angle.radians
    traverse = arc / g.wrist_speed
    return SpraySpeedCheck(
        feasible=traverse < g.completion_budget,
        min_speed=arc / g.completion_budget,
        traverse_time=traverse,
    )


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def arc_viewpoint(initial: CameraPose, anchor, offset: Angle,
                  axis: str = "azimuth") -> CameraPose:
    """Move the camera along a circle of constant radius about ``anchor``.

    ``axis`` selects the rotation plane: ``azimuth`` rotates about the
    world vertical, ``elevation`` about the horizontal axis perpendicular
    to the initial viewing direction.  Offset 0 returns the initial pose;
    the returned pose always aims at the anchor.
    """
    anchor = np.asarray(anchor, dtype=float)
    radial = initial.position - anchor
    r = np.linalg.norm(radial)
    if r < 1e-9:
        raise DegenerateArc("camera sits on the anchor point")
    if axis == "azimuth":
        rot_axis = WORLD_UP
    elif axis == "elevation":
        d0 = -initial.forward  # anchor -> camera direction
        rot_axis = np.cross(d0, WORLD_UP)
        n = np.linalg.norm(rot_axis)
        if n < 1e-12:
            raise DegenerateArc("elevation arc undefined for vertical viewing")
        rot_axis = rot_axis / n
    else:
        raise ValueError(f"unknown arc axis {axis!r}")
    position = anchor + _rotation_matrix(rot_axis, offset.radians) @ radial
    return CameraPose.looking_at(position, anchor)
