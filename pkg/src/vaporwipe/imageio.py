"""Minimal PGM/PPM reader/writer (P2/P3 ascii, P5/P6 binary)."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ImageLoadError


def _tokens(data: bytes):
    pos = 0
    while pos < len(data):
        m = re.compile(rb"\s*(#[^\n]*\n|\S+)").match(data, pos)
        if m is None:
            return
        pos = m.end()
        tok = m.group(1)
        if not tok.startswith(b"#"):
            yield tok, pos


def read_pnm(path) -> np.ndarray:
    """Read a PGM/PPM file into a uint8 array, (H, W) or (H, W, 3)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageLoadError(f"cannot read {path}: {exc}") from exc
    it = _tokens(data)
    try:
        magic, _ = next(it)
        magic = magic.decode()
        if magic not in ("P2", "P3", "P5", "P6"):
            raise ImageLoadError(f"{path}: unsupported format {magic!r}")
        (w, _), (h, _), (maxval, end) = ((int(t), p) for t, p in
                                         (next(it), next(it), next(it)))
    except (StopIteration, ValueError) as exc:
        raise ImageLoadError(f"{path}: malformed header") from exc
    if maxval <= 0 or maxval > 255:
        raise ImageLoadError(f"{path}: unsupported maxval {maxval}")
    channels = 3 if magic in ("P3", "P6") else 1
    count = w * h * channels
    if magic in ("P5", "P6"):
        raw = data[end + 1:end + 1 + count]
        if len(raw) < count:
            raise ImageLoadError(f"{path}: truncated pixel data")
        arr = np.frombuffer(raw, dtype=np.uint8, count=count)
    else:
        vals = data[end:].split()
        if len(vals) < count:
            raise ImageLoadError(f"{path}: truncated pixel data")
        arr = np.array([int(v) for v in vals[:count]], dtype=np.uint8)
    arr = arr.reshape((h, w, channels)) if channels == 3 else arr.reshape((h, w))
    return arr


def write_pnm(path, image: np.ndarray, *, binary: bool = True) -> None:
    """Write a uint8 array as PGM (2-D) or PPM (3-channel)."""
    path = Path(path)
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim == 2:
        magic = "P5" if binary else "P2"
    elif image.ndim == 3 and image.shape[2] == 3:
        magic = "P6" if binary else "P3"
    else:
        raise ValueError(f"unsupported image shape {image.shape}")
    h, w = image.shape[:2]
    header = f"{magic}\n{w} {h}\n255\n".encode()
    if binary:
        path.write_bytes(header + image.tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in
                         image.reshape(h, -1))
        path.write_bytes(header + body.encode() + b"\n")


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse a color image to uint8 luminance; grayscale passes through."""
    if image.ndim == 2:
        return image
    weights = np.array([0.299, 0.587, 0.114])
    return np.clip(image[..., :3] @ weights, 0, 255).astype(np.uint8)
