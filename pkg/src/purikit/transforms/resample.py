"""Separable windowed-sinc / polynomial resampling.

Output pixel i samples the source at (i + 0.5) * (in / out) - 0.5.  For
downscales the kernel is stretched by the scale ratio (anti-aliasing),
tap weights are renormalized per output pixel, and source indices clamp
to the edge.  The horizontal pass runs first, then the vertical pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import InvalidDimensions
from ..imgcore import ImageF, clamp01


def _sinc(t: float) -> float:
    # snap near-integer arguments so identity-scale taps are exact
    r = round(t)
    if abs(t - r) < 1e-12:
        return 1.0 if r == 0 else 0.0
    return math.sin(math.pi * t) / (math.pi * t)


@dataclass(frozen=True)
class ResampleKernel:
    """Interpolation kernel: nearest, bilinear, bicubic (a=-0.5), or lanczos."""

    kind: str = "lanczos"
    a: int = 3  # lanczos window size; ignored by the other kinds

    _SUPPORTS = {"nearest": 0.5, "bilinear": 1.0, "bicubic": 2.0}

    def __post_init__(self):
        if self.kind not in ("nearest", "bilinear", "bicubic", "lanczos"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "lanczos" and self.a < 1:
            raise ValueError("lanczos window size must be a positive integer")

    @property
    def support(self) -> float:
        if self.kind == "lanczos":
            return float(self.a)
        return self._SUPPORTS[self.kind]

    def weight(self, t: float) -> float:
        if self.kind == "nearest":
            return 1.0 if -0.5 <= t < 0.5 else 0.0
        x = abs(t)
        if self.kind == "bilinear":
            return 1.0 - x if x < 1.0 else 0.0
        if self.kind == "bicubic":
            # Keys cubic with a = -0.5
            if x < 1.0:
                return (1.5 * x - 2.5) * x * x + 1.0
            if x < 2.0:
                return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
            return 0.0
        if x >= self.a:
            return 0.0
        return _sinc(x) * _sinc(x / self.a)

    @property
    def name(self) -> str:
        if self.kind == "lanczos":
            return f"lanczos{self.a}"
        return self.kind


LANCZOS3 = ResampleKernel("lanczos", 3)

_KERNEL_NAMES = {
    "nearest": ResampleKernel("nearest"),
    "bilinear": ResampleKernel("bilinear"),
    "bicubic": ResampleKernel("bicubic"),
}


def kernel_by_name(name: str) -> ResampleKernel:
    """Parse 'nearest' | 'bilinear' | 'bicubic' | 'lanczosN'."""
    if name in _KERNEL_NAMES:
        return _KERNEL_NAMES[name]
    if name.startswith("lanczos"):
        suffix = name[len("lanczos"):] or "3"
        try:
            return ResampleKernel("lanczos", int(suffix))
        except ValueError:
            pass
    raise ValueError(f"unknown resampling kernel {name!r}")


def tap_tables(in_len: int, out_len: int, kernel: ResampleKernel):
    """Clamped source indices and raw weights for one axis.

    Returns (idx, w) of shape (out_len, taps); weights are unnormalized,
    the gather kernel divides by their per-pixel sum.
    """
    scale = out_len / in_len
    if scale >= 1.0:
        fscale = 1.0
        support = kernel.support
    else:
        fscale = scale
        support = kernel.support / scale
    taps = int(math.floor(2.0 * support)) + 2
    idx = np.empty((out_len, taps), dtype=np.int64)
    w = np.empty((out_len, taps), dtype=np.float64)
    for i in range(out_len):
        center = (i + 0.5) / scale - 0.5
        lo = int(math.ceil(center - support))
        for t in range(taps):
            src = lo + t
            idx[i, t] = min(max(src, 0), in_len - 1)
            w[i, t] = kernel.weight((src - center) * fscale)
    return idx, w


def _resample_plane(plane, out_w, out_h, kernel):
    in_h, in_w = plane.shape
    if in_w != out_w:
        idx, w = tap_tables(in_w, out_w, kernel)
        plane = kernels.gather_rows(np.ascontiguousarray(plane.T), idx, w).T
    if in_h != out_h:
        idx, w = tap_tables(in_h, out_h, kernel)
        plane = kernels.gather_rows(np.ascontiguousarray(plane), idx, w)
    return plane


def resample(img: ImageF, out_w: int, out_h: int,
             kernel: ResampleKernel = LANCZOS3) -> ImageF:
    """Resize to (out_w, out_h); output is clamped to [0, 1]."""
    if out_w < 1 or out_h < 1:
        raise InvalidDimensions(f"target size {out_w}x{out_h}")
    if out_w == img.width and out_h == img.height:
        return img
    planes = [_resample_plane(img.data[c], out_w, out_h, kernel)
              for c in range(img.channels)]
    return ImageF(clamp01(np.stack(planes)))


def gaussian_taps(sigma: float):
    """Normalized 1-D Gaussian offsets and weights truncated at 3 sigma."""
    radius = max(1, int(math.ceil(3.0 * sigma)))
    offsets = np.arange(-radius, radius + 1, dtype=np.int64)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    return offsets, w / w.sum()


def filter_plane_clamped(plane, offsets, w):
    """Separable correlation with clamp-to-edge boundaries (both axes)."""
    h, width = plane.shape
    idx_v = np.clip(np.arange(h, dtype=np.int64)[:, None] + offsets[None, :], 0, h - 1)
    wv = np.broadcast_to(w, idx_v.shape).copy()
    out = kernels.gather_rows(np.ascontiguousarray(plane), idx_v, wv)
    idx_h = np.clip(np.arange(width, dtype=np.int64)[:, None] + offsets[None, :], 0, width - 1)
    wh = np.broadcast_to(w, idx_h.shape).copy()
    return kernels.gather_rows(np.ascontiguousarray(out.T), idx_h, wh).T


def filter_plane_valid(plane, w):
    """Separable correlation keeping only fully covered windows.

    w is a 1-D window (length k); the output is (h-k+1, w-k+1).
    """
    k = w.shape[0]
    h, width = plane.shape
    if h < k or width < k:
        raise InvalidDimensions(f"plane {plane.shape} smaller than window {k}")
    offs = np.arange(k, dtype=np.int64)
    idx_v = np.arange(h - k + 1, dtype=np.int64)[:, None] + offs[None, :]
    wv = np.broadcast_to(w, idx_v.shape).copy()
    out = kernels.gather_rows(np.ascontiguousarray(plane), idx_v, wv)
    idx_h = np.arange(width - k + 1, dtype=np.int64)[:, None] + offs[None, :]
    wh = np.broadcast_to(w, idx_h.shape).copy()
    return kernels.gather_rows(np.ascontiguousarray(out.T), idx_h, wh).T
