"""Soft face-region masks: file input, external segmentation, or ellipse fallback."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BackendFailed, InvalidEllipse, MaskShapeMismatch
from .imgcore import ImageF, ImageU8, load_png, save_png, to_u8
from .transforms.resample import filter_plane_clamped, gaussian_taps


@dataclass(frozen=True)
class RegionMask:
    """Single-channel soft mask, shape (height, width), samples in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2:
            raise MaskShapeMismatch(f"mask must be 2-D, got shape {a.shape}")
        if float(a.min()) < 0.0 or float(a.max()) > 1.0:
            raise ValueError("mask samples must lie in [0, 1]")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class MaskSource:
    """Where the mask comes from: file(path), external(command), or ellipse."""

    kind: str
    path: Optional[str] = None
    command: Optional[str] = None
    timeout_s: float = 300.0
    cx: float = 0.5
    cy: float = 0.5
    rx: float = 0.35
    ry: float = 0.45

    def __post_init__(self):
        if self.kind not in ("file", "external", "ellipse"):
            raise ValueError(f"unknown mask source kind {self.kind!r}")
        if self.kind == "ellipse":
            for v in (self.cx, self.cy):
                if not 0.0 < v <= 1.0:
                    raise InvalidEllipse(f"center fraction {v} outside (0, 1]")
            for v in (self.rx, self.ry):
                if not 0.0 < v <= 1.0:
                    raise InvalidEllipse(f"radius fraction {v} outside (0, 1]")


DEFAULT_MASK_SOURCE = MaskSource("ellipse", cx=0.5, cy=0.5, rx=0.35, ry=0.45)


def default_feather_radius(width: int) -> int:
    return max(2, width // 64)


def _ellipse_mask(width, height, src: MaskSource) -> RegionMask:
    xs = (np.arange(width, dtype=np.float64) + 0.5) / width
    ys = (np.arange(height, dtype=np.float64) + 0.5) / height
    nx = (xs[None, :] - src.cx) / src.rx
    ny = (ys[:, None] - src.cy) / src.ry
    inside = (nx * nx + ny * ny) <= 1.0
    return RegionMask(inside.astype(np.float64))


def _mask_from_u8(img: ImageU8, width, height) -> RegionMask:
    if img.channels != 1:
        raise MaskShapeMismatch(f"mask file must be grayscale, got {img.channels} channels")
    if img.width != width or img.height != height:
        raise MaskShapeMismatch(
            f"mask is {img.width}x{img.height}, image is {width}x{height}")
    return RegionMask(img.data[0].astype(np.float64) / 255.0)


def _external_mask(img: ImageF, command, width, height, timeout_s=300.0) -> RegionMask:
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    with tempfile.TemporaryDirectory(prefix="purikit-mask-") as tmp:
        in_path = os.path.join(tmp, "input.png")
        out_path = os.path.join(tmp, "mask.png")
        save_png(to_u8(img), in_path)
        try:
            proc = subprocess.run(argv + [in_path, out_path],
                                  capture_output=True, text=True, timeout=timeout_s)
        except FileNotFoundError as exc:
            raise BackendFailed(f"mask backend not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise BackendFailed("mask backend timed out") from exc
        if proc.returncode != 0:
            tail = proc.stderr.strip()[-500:]
            raise BackendFailed(f"mask backend exited {proc.returncode}: {tail}",
                                exit_code=proc.returncode, stderr=tail)
        if not os.path.exists(out_path):
            raise BackendFailed("mask backend produced no output file")
        try:
            out = load_png(out_path)
            return _mask_from_u8(out, width, height)
        except MaskShapeMismatch as exc:
            raise BackendFailed(f"mask backend output rejected: {exc}") from exc


def build_mask(img: ImageF, source: MaskSource) -> RegionMask:
    """Produce the face-region mask (1 = face path) at image resolution."""
    if source.kind == "ellipse":
        return _ellipse_mask(img.width, img.height, source)
    if source.kind == "file":
        return _mask_from_u8(load_png(source.path), img.width, img.height)
    return _external_mask(img, source.command, img.width, img.height,
                          timeout_s=source.timeout_s)


def feather(mask: RegionMask, radius: int) -> RegionMask:
    """Gaussian boundary softening with sigma = radius / 2; radius 0 is identity."""
    if radius < 0:
        raise ValueError(f"feather radius must be >= 0, got {radius}")
    if radius == 0:
        return mask
    offsets, w = gaussian_taps(radius / 2.0)
    blurred = filter_plane_clamped(mask.data, offsets, w)
    return RegionMask(np.clip(blurred, 0.0, 1.0))


def complement(mask: RegionMask) -> RegionMask:
    """Per-sample 1 - m (the background-path weight)."""
    return RegionMask(1.0 - mask.data)
