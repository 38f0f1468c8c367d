"""Viewpoint sweep and argmax selection: resolves the sign ambiguity of the
length inversion and produces the plane-normal estimate under the arc
time budget.

Two routes to the tilt estimate are computed on every sweep: the primary
one reads the angle of the arc viewpoint where the measured footprint
length peaks (refined by a local parabola fit over the discrete samples);
the secondary one inverts the foreshortening relation at the peak length.
Reporting both is a free integrity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, EmptyInput, InfeasibleLength, MistEvaporated
from .geometry import (Angle, CameraPose, SprayGeometry, UnitVec3,
                       angle_from_projected_length, arc_viewpoint,
                       check_spray_speed, normal_from_angles)
from .imaging import (CameraView, Intrinsics, NoiseModel, centered_seed_rect,
                      extract_misted_area, f_score, measure_axes, render_view)
from .scene import Scene, mist_visibility

REFINE_HALF_WINDOW = 5   # samples on each side of the argmax used by the fit


@dataclass(frozen=True)
class SweepPlan:
    """Ordered arc offsets for one estimation axis."""

    axis: str                       # "azimuth" | "elevation"
    offsets: tuple[Angle, ...]
    geometry: SprayGeometry

    def __post_init__(self):
        if self.axis not in ("azimuth", "elevation"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if len(self.offsets) < 3:
            raise ValueError("a sweep needs at least 3 viewpoints")
        rads = [o.radians for o in self.offsets]
        if any(b <= a for a, b in zip(rads, rads[1:])):
            raise ValueError("offsets must be strictly increasing")
        if rads[-1] - rads[0] > self.geometry.sweep_angle.radians + 1e-12:
            raise ValueError("offset span exceeds the sweep angle")


@dataclass(frozen=True)
class ViewpointSample:
    offset_deg: float
    length_mm: float
    visibility: float
    timestamp: float
    f_score: float = float("nan")   # extraction vs render truth


@dataclass(frozen=True)
class AxisSweepResult:
    axis: str
    estimate_deg: float            # primary route: refined argmax angle
    closed_form_deg: float | None  # secondary route: length inversion
    argmax_index: int
    argmax_offset_deg: float
    span_saturated: bool
    time_spent: float
    samples: tuple[ViewpointSample, ...]


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: Angle
    phi_hat: Angle
    normal: UnitVec3
    per_axis: tuple[AxisSweepResult, ...]
    time_spent: float
    flags: tuple[str, ...] = field(default=())

    @property
    def span_saturated(self) -> bool:
        return "SpanSaturated" in self.flags


def plan_sweep(geometry: SprayGeometry, step: Angle,
               axis: str = "azimuth") -> SweepPlan:
    """Lay out arc viewpoints spanning [-beta/2, +beta/2] at ``step``."""
    if step.radians <= 0:
        raise ValueError("step must be positive")
    speed = check_spray_speed(geometry)
    if not speed.feasible:
        raise BudgetExceeded(
            f"traverse takes {speed.traverse_time:.2f} s, budget is "
            f"{geometry.completion_budget:.2f} s")
    half = geometry.sweep_angle.radians / 2.0
    n_side = int(math.floor(half / step.radians + 1e-9))
    offsets = tuple(Angle(k * step.radians) for k in range(-n_side, n_side + 1))
    return SweepPlan(axis=axis, offsets=offsets, geometry=geometry)


def _argmax_with_ties(lengths: np.ndarray, offsets_rad: np.ndarray) -> int:
    """Largest length; ties break to the smallest |offset|, then negative."""
    best = lengths.max()
    tied = np.flatnonzero(lengths == best)
    keys = sorted(tied, key=lambda i: (abs(offsets_rad[i]), offsets_rad[i]))
    return int(keys[0])


def _refine_peak(offsets_rad: np.ndarray, lengths: np.ndarray, i_star: int) -> float:
    """Parabola fit around the discrete argmax; falls back to the sample."""
    lo = max(0, i_star - REFINE_HALF_WINDOW)
    hi = min(len(lengths), i_star + REFINE_HALF_WINDOW + 1)
    xs = offsets_rad[lo:hi] - offsets_rad[i_star]
    ys = lengths[lo:hi]
    if len(xs) < 3:
        return float(offsets_rad[i_star])
    a, b, _ = np.polyfit(xs, ys, 2)
    if a >= 0:
        return float(offsets_rad[i_star])
    vertex = -b / (2.0 * a)
    vertex = min(max(vertex, xs[0]), xs[-1])
    return float(offsets_rad[i_star] + vertex)


def sweep_axis(scene: Scene, plan: SweepPlan, noise: NoiseModel,
               intrinsics: Intrinsics, start_time: float | None = None,
               frame_sink=None) -> AxisSweepResult:
    """Capture the arc, measure footprint length per viewpoint, locate the
    peak and read the tilt as the angle of the peak viewpoint."""
    geo = plan.geometry
    anchor = scene.plane.center
    initial = CameraPose.looking_at(anchor + np.array([geo.standoff, 0.0, 0.0]),
                                    anchor)
    if start_time is None:
        start_time = scene.mist.spray_end_time
    offsets_rad = np.array([o.radians for o in plan.offsets])
    seed_rect = centered_seed_rect(intrinsics)

    lengths = np.empty(len(plan.offsets))
    samples = []
    for i, offset in enumerate(plan.offsets):
        t_i = start_time + (offset.radians - offsets_rad[0]) * geo.standoff / geo.wrist_speed
        vis = mist_visibility(scene.mist, t_i)
        if vis <= 0.0:
            raise MistEvaporated(
                f"mist fully dry at t={t_i:.1f} s (viewpoint {i})")
        pose = arc_viewpoint(initial, anchor, offset, plan.axis)
        view = CameraView(pose=pose, intrinsics=intrinsics)
        frame = render_view(scene, view, t_i, noise.reseeded(i))
        if frame_sink is not None:
            frame_sink(plan.axis, i, frame)
        mask = extract_misted_area(frame, seed_rect)
        obs = measure_axes(mask, view, geo.standoff, viewpoint_index=i)
        length = obs.length_azimuth if plan.axis == "azimuth" else obs.length_elevation
        lengths[i] = length
        # truth annotation is only available while the mist is clearly
        # visible; score is undefined (nan) otherwise
        score = (f_score(mask, frame.truth_mask)
                 if frame.truth_mask.any() else float("nan"))
        samples.append(ViewpointSample(offset_deg=offset.degrees,
                                       length_mm=length, visibility=vis,
                                       timestamp=t_i, f_score=score))

    i_star = _argmax_with_ties(lengths, offsets_rad)
    saturated = i_star in (0, len(lengths) - 1)
    estimate_rad = (offsets_rad[i_star] if saturated
                    else _refine_peak(offsets_rad, lengths, i_star))

    closed_form = None
    try:
        candidates = angle_from_projected_length(geo.half_length, float(lengths[i_star]))
        closed_form = resolve_sign(candidates, plan.offsets[i_star]).degrees
    except InfeasibleLength:
        pass

    traverse = (offsets_rad[-1] - offsets_rad[0]) * geo.standoff / geo.wrist_speed
    return AxisSweepResult(
        axis=plan.axis,
        estimate_deg=math.degrees(estimate_rad),
        closed_form_deg=closed_form,
        argmax_index=i_star,
        argmax_offset_deg=float(math.degrees(offsets_rad[i_star])),
        span_saturated=saturated,
        time_spent=traverse,
        samples=tuple(samples),
    )


def sweep_and_estimate(scene: Scene, plans, noise: NoiseModel,
                       intrinsics: Intrinsics,
                       frame_sink=None) -> EstimationResult:
    """Run one sweep per plan sequentially on a shared evaporation clock
    and compose the estimated plane normal."""
    clock = scene.mist.spray_end_time
    per_axis = []
    flags = []
    theta_deg = 0.0
    phi_deg = 0.0
    for plan in plans:
        result = sweep_axis(scene, plan, noise, intrinsics,
                            start_time=clock, frame_sink=frame_sink)
        clock += result.time_spent
        per_axis.append(result)
        if result.span_saturated:
            flags.append("SpanSaturated")
        if plan.axis == "azimuth":
            theta_deg = result.estimate_deg
        else:
            phi_deg = result.estimate_deg
    theta = Angle.from_degrees(theta_deg)
    phi = Angle.from_degrees(phi_deg)
    return EstimationResult(
        theta_hat=theta,
        phi_hat=phi,
        normal=normal_from_angles(theta, phi),
        per_axis=tuple(per_axis),
        time_spent=clock - scene.mist.spray_end_time,
        flags=tuple(dict.fromkeys(flags)),
    )


def resolve_sign(candidates: tuple[Angle, Angle], argmax_offset: Angle) -> Angle:
    """Pick the inversion candidate whose sign matches the peak viewpoint."""
    if argmax_offset.radians == 0.0:
        return Angle(0.0)
    want = math.copysign(1.0, argmax_offset.radians)
    for cand in candidates:
        if math.copysign(1.0, cand.radians) == want:
            return cand
    return candidates[0]


def rmse(errors_deg) -> float:
    """Root-mean-square of angle errors, in degrees."""
    errors = np.asarray(list(errors_deg), dtype=float)
    if errors.size == 0:
        raise EmptyInput("rmse of an empty list")
    return float(np.sqrt(np.mean(errors ** 2)))
