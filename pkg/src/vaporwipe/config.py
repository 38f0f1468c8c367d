"""Experiment configuration: defaults, named presets, TOML overlays.

Configs are plain nested dicts.  Resolution order: built-in defaults,
then a named preset, then the user's config file, then CLI overrides.
"""

from __future__ import annotations

import copy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .geometry import Angle, SprayGeometry
from .imaging import Intrinsics, NoiseModel

DEFAULTS: dict = {
    "experiment": {
        "surface": "mirror",
        "azimuth_truths_deg": [-20.0, 0.0, 20.0],
        "trials_per_angle": 3,
        "temperature_c": 23.0,
        "seed": 0,
        "axes": ["azimuth"],
    },
    "spray": {
        "half_length_mm": 50.0,
        "standoff_mm": 100.0,
        "sweep_deg": 60.0,
        "wrist_speed_mm_s": 50.0,
        "completion_budget_s": 6.0,
        "per_arm_duration_s": 2.5,
        "reciprocations": 3,
        "arm_width_mm": 10.0,
        "onset_time_s": 6.0,
    },
    "camera": {
        "width": 1280,
        "height": 720,
        "focal_px": 800.0,
    },
    "sweep": {
        "step_deg": 1.0,
    },
    "noise": {
        "boundary_jitter_sigma_px": 0.0,
        "dropout_rate": 0.0,
    },
    "background": {
        "kind": "textureless",      # "textureless" | "images"
        "images": [],
        "level": 90,
    },
    "wipe": {
        "stiffness_n_mm": 1.5,
        "f_min_n": 3.0,
        "f_max_n": 8.0,
        "stroke_mm": 150.0,
        "reciprocations": 3,
        "trials": 3,
        "tool_mm": 20.0,
        "step_mm": 1.0,
    },
    "timing": {
        "spray_durations_s": [1.0, 1.5, 2.0, 2.5, 3.0],
        "capture_budgets_s": [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        "fps": 30.0,
        "settling_margin": 1.5,
    },
}

PRESET_NAMES = ("zero", "mirror-calibrated", "glass-calibrated")


def _deep_merge(base: dict, overlay: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_preset(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    text = resources.files("vaporwipe.presets").joinpath(f"{name}.toml").read_text()
    return tomllib.loads(text)


def load_config(path=None, preset: str | None = None,
                overrides: dict | None = None) -> dict:
    """Resolve a full config dict from defaults, preset, file and overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        cfg = _deep_merge(cfg, load_preset(preset))
    if path is not None:
        path = Path(path)
        try:
            file_cfg = tomllib.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        if "preset" in file_cfg and preset is None:
            cfg = _deep_merge(cfg, load_preset(file_cfg["preset"]))
            cfg = _deep_merge(cfg, file_cfg)
        else:
            cfg = _deep_merge(cfg, file_cfg)
    if overrides:
        cfg = _deep_merge(cfg, overrides)
    cfg.pop("preset", None)
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    exp = cfg.get("experiment", {})
    if exp.get("surface") not in ("mirror", "glass"):
        raise ConfigError("experiment.surface must be 'mirror' or 'glass'")
    if int(exp.get("trials_per_angle", 0)) < 1:
        raise ConfigError("experiment.trials_per_angle must be >= 1")
    if not exp.get("azimuth_truths_deg"):
        raise ConfigError("experiment.azimuth_truths_deg must be non-empty")
    half_sweep = float(cfg["spray"]["sweep_deg"]) / 2.0
    for angle in exp["azimuth_truths_deg"]:
        if abs(float(angle)) >= 90.0:
            raise ConfigError(f"azimuth truth {angle} out of (-90, 90)")
        if abs(float(angle)) > half_sweep:
            raise ConfigError(
                f"azimuth truth {angle} deg outside sweep capability "
                f"+/-{half_sweep} deg")
    for axis in exp.get("axes", []):
        if axis not in ("azimuth", "elevation"):
            raise ConfigError(f"unknown sweep axis {axis!r}")
    bg = cfg.get("background", {})
    if bg.get("kind") not in ("textureless", "images"):
        raise ConfigError("background.kind must be 'textureless' or 'images'")
    if bg.get("kind") == "images" and not bg.get("images"):
        raise ConfigError("background.kind = 'images' needs background.images")
    noise = cfg.get("noise", {})
    if float(noise.get("boundary_jitter_sigma_px", 0)) < 0:
        raise ConfigError("noise sigma must be >= 0")
    if not 0 <= float(noise.get("dropout_rate", 0)) < 1:
        raise ConfigError("noise dropout_rate must lie in [0, 1)")


def spray_geometry_from(cfg: dict) -> SprayGeometry:
    s = cfg["spray"]
    return SprayGeometry(
        half_length=float(s["half_length_mm"]),
        standoff=float(s["standoff_mm"]),
        sweep_angle=Angle.from_degrees(float(s["sweep_deg"])),
        wrist_speed=float(s["wrist_speed_mm_s"]),
        completion_budget=float(s["completion_budget_s"]),
    )


def intrinsics_from(cfg: dict) -> Intrinsics:
    c = cfg["camera"]
    return Intrinsics(width=int(c["width"]), height=int(c["height"]),
                      focal_px=float(c["focal_px"]))


def noise_from(cfg: dict, seed: int) -> NoiseModel:
    n = cfg["noise"]
    return NoiseModel(
        boundary_jitter_sigma=float(n["boundary_jitter_sigma_px"]),
        dropout_rate=float(n["dropout_rate"]),
        seed=int(seed),
    )
