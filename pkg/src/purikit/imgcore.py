"""Canonical image types, color conversion, and lossless file I/O.

Pixels travel through the package as planar float64 in [0, 1] (ImageF);
8-bit storage (ImageU8) appears only at file boundaries.  The u8/float
conversion rounds half away from zero so byte-level round trips are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import InvalidDimensions, UnsupportedFormat, WrongChannelCount

# JFIF full-range RGB <-> YCbCr, chroma centered at 0.5 in [0, 1] units
_RGB_TO_YCC = np.array([
    [0.299, 0.587, 0.114],
    [-0.299 / 1.772, -0.587 / 1.772, 0.886 / 1.772],
    [0.701 / 1.402, -0.587 / 1.402, -0.114 / 1.402],
], dtype=np.float64)
_YCC_TO_RGB = np.linalg.inv(_RGB_TO_YCC)


@dataclass(frozen=True)
class ImageF:
    """Planar floating-point image, shape (channels, height, width), [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 3 or a.shape[0] not in (1, 3):
            raise InvalidDimensions(f"expected (1|3, h, w) planes, got {a.shape}")
        if a.shape[1] < 1 or a.shape[2] < 1:
            raise InvalidDimensions(f"empty image {a.shape}")
        if float(a.min()) < 0.0 or float(a.max()) > 1.0:
            raise ValueError("ImageF samples must lie in [0, 1]; clamp explicitly")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]


@dataclass(frozen=True)
class ImageU8:
    """Planar 8-bit image, shape (channels, height, width)."""

    data: np.ndarray
    alpha_dropped: bool = field(default=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.dtype != np.uint8:
            raise ValueError(f"ImageU8 requires uint8 samples, got {a.dtype}")
        if a.ndim != 3 or a.shape[0] not in (1, 3):
            raise InvalidDimensions(f"expected (1|3, h, w) planes, got {a.shape}")
        if a.shape[1] < 1 or a.shape[2] < 1:
            raise InvalidDimensions(f"empty image {a.shape}")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]


def clamp01(arr: np.ndarray) -> np.ndarray:
    """Explicit clamp to [0, 1], the only sanctioned way back into range."""
    return np.clip(arr, 0.0, 1.0)


def to_float(img: ImageU8) -> ImageF:
    """u8 -> float via s / 255."""
    return ImageF(img.data.astype(np.float64) / 255.0)


def to_u8(img: ImageF) -> ImageU8:
    """float -> u8 via round(f * 255), half away from zero.

    Samples are non-negative, so floor(x + 0.5) implements the rule.
    """
    q = np.floor(img.data * 255.0 + 0.5).astype(np.uint8)
    return ImageU8(q)


def load_png(path) -> ImageU8:
    """Decode an 8-bit gray or RGB PNG; alpha is dropped, not composited."""
    with Image.open(path) as im:
        im.load()
        mode = im.mode
        if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise UnsupportedFormat(f"{path}: 16-bit/float PNG not supported")
        if mode == "P":
            if "transparency" in im.info:
                raise UnsupportedFormat(f"{path}: palette with transparency not supported")
            im = im.convert("RGB")
            mode = "RGB"
        alpha_dropped = False
        if mode in ("LA", "RGBA"):
            alpha_dropped = True
        elif mode == "1":
            im = im.convert("L")
            mode = "L"
        elif mode not in ("L", "RGB"):
            raise UnsupportedFormat(f"{path}: unsupported mode {mode}")
        arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim == 2:
        planes = arr[None, :, :]
    else:
        planes = arr[:, :, :3].transpose(2, 0, 1)
        if planes.shape[0] == 2:  # LA
            planes = planes[:1]
    return ImageU8(np.ascontiguousarray(planes), alpha_dropped=alpha_dropped)


def save_png(img: ImageU8, path) -> None:
    """Write an 8-bit PNG; byte-deterministic for identical pixel data."""
    if img.channels == 1:
        pil = Image.fromarray(img.data[0], mode="L")
    else:
        pil = Image.fromarray(img.data.transpose(1, 2, 0), mode="RGB")
    pil.save(path, format="PNG")


def save_ppm(img: ImageU8, path) -> None:
    """Binary PPM (P6) dump for debugging; gray images are replicated to RGB."""
    data = img.data
    if img.channels == 1:
        data = np.repeat(data, 3, axis=0)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{img.width} {img.height}\n255\n".encode("ascii"))
        fh.write(data.transpose(1, 2, 0).tobytes())


def rgb_to_ycbcr(img: ImageF) -> ImageF:
    """JFIF full-range conversion; Y in [0,1], Cb/Cr centered at 0.5."""
    if img.channels != 3:
        raise WrongChannelCount("rgb_to_ycbcr needs a 3-channel image")
    flat = img.data.reshape(3, -1)
    ycc = _RGB_TO_YCC @ flat
    ycc[1] += 0.5
    ycc[2] += 0.5
    return ImageF(clamp01(ycc.reshape(img.data.shape)))


def ycbcr_to_rgb(img: ImageF, clamp: bool = True):
    """Inverse JFIF conversion.

    With clamp=False the raw float array is returned instead of an ImageF,
    which round-trip tests use to check identity before clamping.
    """
    if img.channels != 3:
        raise WrongChannelCount("ycbcr_to_rgb needs a 3-channel image")
    ycc = img.data.reshape(3, -1).copy()
    ycc[1] -= 0.5
    ycc[2] -= 0.5
    rgb = (_YCC_TO_RGB @ ycc).reshape(img.data.shape)
    if not clamp:
        return rgb
    return ImageF(clamp01(rgb))


def luma(img: ImageF) -> ImageF:
    """Single-channel luma plane (BT.601 weights); gray images pass through."""
    if img.channels == 1:
        return img
    y = (0.299 * img.data[0] + 0.587 * img.data[1] + 0.114 * img.data[2])
    return ImageF(clamp01(y)[None, :, :])
