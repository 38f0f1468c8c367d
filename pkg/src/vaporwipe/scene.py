"""World state: target plane, background, sprayed cross mist and its
evaporation dynamics, plus the spray feasibility rules.

Scene values are immutable snapshots; advancing time never mutates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SprayOutOfRange, SurfaceTooThick, UnderDeposited
from .geometry import Angle, SprayGeometry, UnitVec3, WORLD_UP, normal_from_angles

# Physical limits observed for mist deposition at desk scale.
MAX_SPRAY_STANDOFF_MM = 100.0
MAX_SURFACE_THICKNESS_MM = 3.0
MIN_ONE_WAY_SPRAY_S = 2.0

DEFAULT_ONSET_TIME_S = 6.0
DEFAULT_ARM_WIDTH_MM = 10.0

# (room temperature degC, seconds until the misted cross is fully dry)
DEFAULT_EVAPORATION_ROWS = ((20.0, 92.0), (25.0, 74.0), (30.0, 68.0))


@dataclass(frozen=True)
class PlaneTarget:
    """Tilted rectangular plate the mist is sprayed onto.

    ``azimuth``/``elevation`` are the ground-truth tilts of the plate
    normal relative to the initial viewing direction (+x).
    """

    azimuth: Angle
    elevation: Angle
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    extent: tuple[float, float] = (400.0, 400.0)   # width x height, mm
    surface_kind: str = "mirror"                   # "mirror" | "glass"
    thickness: float = 3.0                         # mm

    def __post_init__(self):
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError("plane extent must be positive")
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")
        if self.surface_kind not in ("mirror", "glass"):
            raise ValueError(f"unknown surface kind {self.surface_kind!r}")

    @property
    def normal(self) -> UnitVec3:
        return normal_from_angles(self.azimuth, self.elevation)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane horizontal and vertical unit axes."""
        n = self.normal.as_array()
        e_az = np.cross(WORLD_UP, n)
        e_az = e_az / np.linalg.norm(e_az)
        e_el = np.cross(n, e_az)
        return e_az, e_el


@dataclass(frozen=True)
class CrossMist:
    """Cross-shaped mist footprint in on-plane coordinates."""

    center_on_plane: tuple[float, float]
    arm_half_length: float              # trajectory half-length l, mm
    azimuth_arm_half: float             # on-plane half length l / cos(theta)
    elevation_arm_half: float           # on-plane half length l / cos(phi)
    arm_width: float
    deposited_per_arm: dict
    spray_end_time: float               # s, mist clock zero
    onset_time: float = DEFAULT_ONSET_TIME_S
    dry_time: float = 74.0

    def __post_init__(self):
        if not 0 < self.onset_time <= self.dry_time:
            raise ValueError("need 0 < onset_time <= dry_time")
        if self.arm_half_length <= 0 or self.arm_width <= 0:
            raise ValueError("arm dimensions must be positive")


@dataclass(frozen=True)
class Background:
    """What the camera sees around/through the plane."""

    placement: str = "textureless"      # "reflected" | "transmitted" | "textureless"
    image: np.ndarray | None = None     # uint8 grid, 1 or 3 channels
    level: int = 90                     # gray level used when textureless

    def __post_init__(self):
        if self.placement not in ("reflected", "transmitted", "textureless"):
            raise ValueError(f"unknown background placement {self.placement!r}")
        if self.placement != "textureless" and (self.image is None or self.image.size == 0):
            raise ValueError("non-textureless background needs an image")


@dataclass(frozen=True)
class EvaporationTable:
    """Room temperature -> full drying time, piecewise linear."""

    entries: tuple = DEFAULT_EVAPORATION_ROWS

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("evaporation table needs at least one entry")
        temps = [t for t, _ in self.entries]
        drys = [d for _, d in self.entries]
        if any(d <= 0 for d in drys):
            raise ValueError("dry times must be positive")
        if sorted(temps) != temps:
            raise ValueError("entries must be sorted by temperature")
        if any(b > a for a, b in zip(drys, drys[1:])):
            raise ValueError("dry time must be monotone non-increasing with temperature")


@dataclass(frozen=True)
class Scene:
    """Immutable world snapshot used by the renderer and estimator."""

    plane: PlaneTarget
    mist: CrossMist
    background: Background = Background()
    mist_level: int = 220       # diffuse gray of fully visible mist (contrast knob)

    def with_mist(self, mist: CrossMist) -> "Scene":
        return replace(self, mist=mist)


def dry_time_for_temperature(table: EvaporationTable, temperature: float) -> float:
    """Interpolate drying time at the given room temperature (clamped at ends)."""
    temps = np.array([t for t, _ in table.entries])
    drys = np.array([d for _, d in table.entries])
    return float(np.interp(temperature, temps, drys))


def spray_cross(plane: PlaneTarget, spray: SprayGeometry, per_arm_duration: float,
                reciprocations: int, *, arm_width: float = DEFAULT_ARM_WIDTH_MM,
                onset_time: float = DEFAULT_ONSET_TIME_S,
                dry_time: float | None = None,
                temperature: float | None = None,
                evaporation: EvaporationTable = EvaporationTable()) -> CrossMist:
    """Deposit a cross-shaped mist footprint by reciprocating linear passes.

    The wrist trajectory spans 2l parallel to the initial image plane, so a
    tilted plate stretches the on-plane footprint to 2l/cos(theta) along the
    azimuth axis and 2l/cos(phi) along the elevation axis.

    Error precedence: standoff range, then plate thickness, then deposition.
    """
    if per_arm_duration <= 0:
        raise ValueError("per_arm_duration must be positive")
    if reciprocations < 1:
        raise ValueError("need at least one reciprocation")
    if spray.standoff > MAX_SPRAY_STANDOFF_MM:
        raise SprayOutOfRange(
            f"standoff {spray.standoff:.1f} mm exceeds {MAX_SPRAY_STANDOFF_MM:.0f} mm")
    if plane.thickness > MAX_SURFACE_THICKNESS_MM:
        raise SurfaceTooThick(
            f"thickness {plane.thickness:.1f} mm exceeds {MAX_SURFACE_THICKNESS_MM:.0f} mm")
    if per_arm_duration < MIN_ONE_WAY_SPRAY_S:
        raise UnderDeposited(
            f"one-way spray pass of {per_arm_duration:.2f} s deposits no usable mist")

    l = spray.half_length
    deposition = per_arm_duration * reciprocations
    # one reciprocation = two one-way passes; two arms
    spray_end = 2.0 * 2.0 * reciprocations * per_arm_duration
    if dry_time is None:
        temp = 25.0 if temperature is None else temperature
        dry_time = dry_time_for_temperature(evaporation, temp)
    return CrossMist(
        center_on_plane=(0.0, 0.0),
        arm_half_length=l,
        azimuth_arm_half=l / math.cos(plane.azimuth.radians),
        elevation_arm_half=l / math.cos(plane.elevation.radians),
        arm_width=arm_width,
        deposited_per_arm={"azimuth": deposition, "elevation": deposition},
        spray_end_time=spray_end,
        onset_time=onset_time,
        dry_time=dry_time,
    )


def mist_visibility(mist: CrossMist, now: float) -> float:
    """Visibility fraction of the mist at absolute time ``now``.

    Full visibility until ``onset_time`` after spraying ends, then linear
    decay reaching zero at ``dry_time``.
    """
    if now < mist.spray_end_time:
        raise ValueError("visibility queried before spraying finished")
    elapsed = now - mist.spray_end_time
    if elapsed < mist.onset_time:
        return 1.0
    if elapsed >= mist.dry_time:
        return 0.0
    return 1.0 - (elapsed - mist.onset_time) / (mist.dry_time - mist.onset_time)
