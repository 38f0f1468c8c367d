"""Synthetic camera: renders views of the misted scene, extracts the
misted region, fits cross axes and measures intersection lengths.

Rendering is a plain pinhole model.  Mirror surfaces show the background
reflected about the plane, glass shows it transmitted, and the mist is an
opaque diffuse gray blended by its current visibility.  Everything is
deterministic for a fixed noise seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .errors import DegenerateView, EmptyTruth, MaskTooSmall, NoForeground
from .geometry import CameraPose
from .scene import Scene, mist_visibility

MIRROR_REFLECTANCE = 0.90
GLASS_TRANSMITTANCE = 0.92
BACKGROUND_FOV_RAD = 1.5      # angular span mapped onto a background image
DEFAULT_MIN_MASK_AREA_PX = 100
DEFAULT_INTENSITY_TOL = 28.0
_JITTER_SMOOTH_PX = 3.0


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics; principal point defaults to the image center."""

    width: int = 1280
    height: int = 720
    focal_px: float = 800.0
    cx: float | None = None
    cy: float | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("resolution must be positive")
        if self.focal_px <= 0:
            raise ValueError("focal length must be positive")
        if self.cx is None:
            object.__setattr__(self, "cx", (self.width - 1) / 2.0)
        if self.cy is None:
            object.__setattr__(self, "cy", (self.height - 1) / 2.0)


@dataclass(frozen=True)
class CameraView:
    pose: CameraPose
    intrinsics: Intrinsics


@dataclass(frozen=True)
class NoiseModel:
    """Segmentation-boundary jitter and pixel dropout, fully seeded."""

    boundary_jitter_sigma: float = 0.0   # px
    dropout_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.boundary_jitter_sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must lie in [0, 1)")

    def reseeded(self, *key: int) -> "NoiseModel":
        """Derive an independent stream for a sub-draw (e.g. one viewpoint)."""
        mix = np.random.SeedSequence([self.seed, *key]).generate_state(1)[0]
        return NoiseModel(self.boundary_jitter_sigma, self.dropout_rate, int(mix))


@dataclass(frozen=True)
class RenderedFrame:
    image: np.ndarray        # uint8 (H, W)
    truth_mask: np.ndarray   # bool (H, W), noise-free mist pixels
    timestamp: float


@dataclass(frozen=True)
class MistObservation:
    contour: np.ndarray          # (K, 2) boundary pixel coords (row, col)
    centroid: tuple[float, float]
    major_axis: np.ndarray       # 2D unit direction (dx, dy) image coords
    minor_axis: np.ndarray
    length_azimuth: float        # mm, chord along the horizontal-ish axis
    length_elevation: float      # mm, chord along the vertical-ish axis
    viewpoint_index: int = -1


@lru_cache(maxsize=8)
def _pixel_grids(width: int, height: int, focal: float, cx: float, cy: float):
    u = (np.arange(width, dtype=np.float32) - cx) / focal
    v = (cy - np.arange(height, dtype=np.float32)) / focal
    x = np.broadcast_to(u[None, :], (height, width))
    y = np.broadcast_to(v[:, None], (height, width))
    return x, y


def _sample_background(scene: Scene, dirs: np.ndarray) -> np.ndarray:
    """Sample the background image by viewing direction (image at infinity)."""
    from .imageio import to_grayscale

    bg = to_grayscale(scene.background.image).astype(np.float32)
    h, w = bg.shape
    az = np.arctan2(dirs[..., 1], -dirs[..., 0])
    el = np.arcsin(np.clip(dirs[..., 2] / np.linalg.norm(dirs, axis=-1), -1, 1))
    col = np.clip((az / BACKGROUND_FOV_RAD + 0.5) * (w - 1), 0, w - 1).astype(np.intp)
    row = np.clip((0.5 - el / BACKGROUND_FOV_RAD) * (h - 1), 0, h - 1).astype(np.intp)
    return bg[row, col]


def _jitter_region(inside: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Perturb a binary region: Gaussian boundary displacement plus dropout."""
    rows = np.flatnonzero(inside.any(axis=1))
    cols = np.flatnonzero(inside.any(axis=0))
    if rows.size == 0:
        return inside
    pad = int(math.ceil(4 * noise.boundary_jitter_sigma + 3 * _JITTER_SMOOTH_PX))
    r0 = max(0, rows[0] - pad)
    r1 = min(inside.shape[0], rows[-1] + pad + 1)
    c0 = max(0, cols[0] - pad)
    c1 = min(inside.shape[1], cols[-1] + pad + 1)
    box = inside[r0:r1, c0:c1]
    rng = np.random.default_rng(noise.seed)
    out = inside.copy()
    patch = box
    if noise.boundary_jitter_sigma > 0:
        # chamfer distance is close enough for jitter and much cheaper than
        # the exact euclidean transform
        signed = (ndimage.distance_transform_cdt(box, metric="taxicab")
                  - ndimage.distance_transform_cdt(~box, metric="taxicab")).astype(np.float32)
        field = ndimage.gaussian_filter(
            rng.standard_normal(box.shape).astype(np.float32), _JITTER_SMOOTH_PX)
        std = float(field.std())
        if std > 0:
            field /= std
        patch = (signed + noise.boundary_jitter_sigma * field) > 0
    if noise.dropout_rate > 0:
        patch = patch & (rng.random(box.shape) >= noise.dropout_rate)
    out[r0:r1, c0:c1] = patch
    return out


def render_view(scene: Scene, view: CameraView, now: float,
                noise: NoiseModel | None = None) -> RenderedFrame:
    """Render one camera view of the scene at absolute time ``now``."""
    intr = view.intrinsics
    pose = view.pose
    plane = scene.plane
    n = plane.normal.as_array()
    if abs(float(np.dot(pose.forward, n))) < 1e-6:
        raise DegenerateView("target plane is edge-on to the camera")

    vis = mist_visibility(scene.mist, now)
    x, y = _pixel_grids(intr.width, intr.height, intr.focal_px, intr.cx, intr.cy)

    # ray direction = x*right + y*up + forward; all dot products are linear in (x, y)
    def dot_field(w: np.ndarray) -> np.ndarray:
        return (np.float32(w @ pose.right) * x
                + np.float32(w @ pose.up) * y
                + np.float32(w @ pose.forward))

    rel = pose.position - plane.center
    ndotd = dot_field(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(np.abs(ndotd) > 1e-12, -np.float32(n @ rel) / ndotd, -1.0)
    hit = t > 0
    if not hit.any():
        raise DegenerateView("target plane projects to zero area")

    e_az, e_el = plane.basis()
    s = np.float32(rel @ e_az) + t * dot_field(e_az)
    e = np.float32(rel @ e_el) + t * dot_field(e_el)

    half_w, half_h = plane.extent[0] / 2.0, plane.extent[1] / 2.0
    on_plane = hit & (np.abs(s) <= half_w) & (np.abs(e) <= half_h)
    cs, ce = scene.mist.center_on_plane
    ds, de = np.abs(s - cs), np.abs(e - ce)
    half_band = scene.mist.arm_width / 2.0
    in_cross = on_plane & (
        ((ds <= scene.mist.azimuth_arm_half) & (de <= half_band))
        | ((de <= scene.mist.elevation_arm_half) & (ds <= half_band)))

    truth_mask = in_cross if vis > 0.5 else np.zeros_like(in_cross)

    visible = in_cross
    if noise is not None and vis > 0 and (noise.boundary_jitter_sigma > 0
                                          or noise.dropout_rate > 0):
        visible = _jitter_region(in_cross, noise)

    if scene.background.placement == "textureless" or scene.background.image is None:
        bg = np.full((intr.height, intr.width), float(scene.background.level),
                     dtype=np.float32)
    else:
        dirs = (x[..., None] * pose.right + y[..., None] * pose.up
                + pose.forward).astype(np.float32)
        if scene.background.placement == "reflected":
            refl = dirs - 2.0 * (dirs @ n)[..., None] * n.astype(np.float32)
            sampled = _sample_background(scene, np.where(on_plane[..., None], refl, dirs))
            bg = np.where(on_plane, MIRROR_REFLECTANCE * sampled, sampled)
        else:
            sampled = _sample_background(scene, dirs)
            bg = np.where(on_plane, GLASS_TRANSMITTANCE * sampled, sampled)

    weight = np.where(visible, np.float32(vis), np.float32(0.0))
    image = np.clip(bg * (1.0 - weight) + scene.mist_level * weight + 0.5,
                    0, 255).astype(np.uint8)
    return RenderedFrame(image=image, truth_mask=truth_mask, timestamp=now)


def centered_seed_rect(intr: Intrinsics, size: int = 41) -> tuple[int, int, int, int]:
    """Seed rectangle (r0, c0, r1, c1) centered on the principal point."""
    half = size // 2
    r, c = int(round(intr.cy)), int(round(intr.cx))
    return (max(0, r - half), max(0, c - half),
            min(intr.height, r + half + 1), min(intr.width, c + half + 1))


def extract_misted_area(frame: RenderedFrame, seed_rect: tuple[int, int, int, int],
                        intensity_tol: float = DEFAULT_INTENSITY_TOL) -> np.ndarray:
    """Segment the misted region: intensity-homogeneous pixels grown from
    the seed rectangle (deterministic stand-in for interactive graph cut).

    Qualifying pixels lie within ``intensity_tol`` of the median intensity
    inside the seed rectangle; the result is the union of connected
    components touching the rectangle.
    """
    r0, c0, r1, c1 = seed_rect
    h, w = frame.image.shape
    if not (0 <= r0 < r1 <= h and 0 <= c0 < c1 <= w):
        raise ValueError(f"seed rect {seed_rect} outside image bounds {(h, w)}")
    img = frame.image.astype(np.float32)
    ref = float(np.median(img[r0:r1, c0:c1]))
    border = np.concatenate([img[0, :], img[-1, :], img[:, 0], img[:, -1]])
    if abs(ref - float(np.median(border))) <= intensity_tol:
        # seed patch indistinguishable from the surround: nothing misted
        raise NoForeground("seed rectangle does not differ from the background")
    candidate = np.abs(img - ref) <= intensity_tol
    if not candidate[r0:r1, c0:c1].any():
        raise NoForeground("no homogeneous pixels inside the seed rectangle")
    labels, _ = ndimage.label(candidate)
    seed_labels = np.unique(labels[r0:r1, c0:c1])
    seed_labels = seed_labels[seed_labels > 0]
    if seed_labels.size == 0:
        raise NoForeground("no homogeneous pixels inside the seed rectangle")
    return np.isin(labels, seed_labels)


def _chord_along(coords: np.ndarray, centroid: np.ndarray, axis: np.ndarray,
                 band: float = 1.5) -> float:
    """Pixel chord between extreme mask points lying on the axis line."""
    rel = coords - centroid
    proj = rel @ axis
    perp = rel @ np.array([-axis[1], axis[0]])
    on_line = np.abs(perp) <= band
    if not on_line.any():
        return 0.0
    return float(proj[on_line].max() - proj[on_line].min()) + 1.0


def measure_axes(mask: np.ndarray, view: CameraView, plane_distance: float,
                 min_area_px: int = DEFAULT_MIN_MASK_AREA_PX,
                 viewpoint_index: int = -1) -> MistObservation:
    """Fit the cross axes from second central moments and measure the
    intersection chord along each axis, converted to millimetres with the
    pinhole model at the known standoff."""
    ys, xs = np.nonzero(mask)
    if ys.size < min_area_px:
        raise MaskTooSmall(f"mask area {ys.size} px below minimum {min_area_px} px")
    coords = np.column_stack([xs, ys]).astype(np.float64)  # (x, y) image coords
    centroid = coords.mean(axis=0)
    rel = coords - centroid
    mxx = float(np.mean(rel[:, 0] ** 2))
    myy = float(np.mean(rel[:, 1] ** 2))
    mxy = float(np.mean(rel[:, 0] * rel[:, 1]))
    angle = 0.5 * math.atan2(2.0 * mxy, mxx - myy)
    major = np.array([math.cos(angle), math.sin(angle)])
    minor = np.array([-math.sin(angle), math.cos(angle)])

    chord_major = _chord_along(coords, centroid, major)
    chord_minor = _chord_along(coords, centroid, minor)
    mm_per_px = plane_distance / view.intrinsics.focal_px

    # assign chords to scene axes by image orientation (no camera roll)
    if abs(major[0]) >= abs(major[1]):
        horiz_px, vert_px = chord_major, chord_minor
    else:
        horiz_px, vert_px = chord_minor, chord_major

    eroded = ndimage.binary_erosion(mask)
    by, bx = np.nonzero(mask & ~eroded)
    contour = np.column_stack([by, bx])
    return MistObservation(
        contour=contour,
        centroid=(float(centroid[0]), float(centroid[1])),
        major_axis=major,
        minor_axis=minor,
        length_azimuth=horiz_px * mm_per_px,
        length_elevation=vert_px * mm_per_px,
        viewpoint_index=viewpoint_index,
    )


def f_score(predicted: np.ndarray, truth: np.ndarray) -> float:
    """F1 between binary masks: 2PR/(P+R); zero when both P and R vanish."""
    if predicted.shape != truth.shape:
        raise ValueError("mask shapes differ")
    truth = truth.astype(bool)
    predicted = predicted.astype(bool)
    n_truth = int(truth.sum())
    if n_truth == 0:
        raise EmptyTruth("truth mask has no positive pixels")
    tp = int((predicted & truth).sum())
    n_pred = int(predicted.sum())
    if tp == 0:
        return 0.0
    precision = tp / n_pred
    recall = tp / n_truth
    return 2.0 * precision * recall / (precision + recall)
