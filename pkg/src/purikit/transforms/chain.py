"""Composable transformation chains (jpeg / resize steps, applied in order)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ..errors import InvalidDimensions
from ..imgcore import ImageF
from .jpeg import jpeg_roundtrip
from .resample import LANCZOS3, ResampleKernel, kernel_by_name, resample


@dataclass(frozen=True)
class Jpeg:
    """Encode-then-decode through the baseline codec."""

    quality: int
    subsampling: str = "4:2:0"

    def apply(self, img: ImageF) -> ImageF:
        return jpeg_roundtrip(img, self.quality, self.subsampling)

    def spec(self) -> str:
        return f"jpeg:q={self.quality}"


@dataclass(frozen=True)
class Resize:
    """Scale both axes by a factor; output dims are floor(in * factor), min 1."""

    factor: Fraction
    kernel: ResampleKernel = field(default=LANCZOS3)

    def __post_init__(self):
        f = Fraction(self.factor)
        if f <= 0:
            raise InvalidDimensions(f"resize factor must be positive, got {f}")
        object.__setattr__(self, "factor", f)

    def apply(self, img: ImageF) -> ImageF:
        out_w = max(1, math.floor(img.width * self.factor))
        out_h = max(1, math.floor(img.height * self.factor))
        return resample(img, out_w, out_h, self.kernel)

    def spec(self) -> str:
        f = self.factor
        if f.denominator == 1:
            text = str(f.numerator)
        else:
            fl = float(f)
            text = repr(fl) if Fraction(repr(fl)) == f else f"{f.numerator}/{f.denominator}"
        return f"resize:f={text},k={self.kernel.name}"


Step = Union[Jpeg, Resize]


@dataclass(frozen=True)
class TransformChain:
    """Ordered list of steps; the empty chain is the identity."""

    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def apply(self, img: ImageF) -> ImageF:
        for step in self.steps:
            img = step.apply(img)
        return img

    def spec(self) -> str:
        return ",".join(s.spec() for s in self.steps) if self.steps else "none"

    @property
    def is_identity(self) -> bool:
        return not self.steps


def apply_chain(img: ImageF, chain: TransformChain) -> ImageF:
    return chain.apply(img)


def _parse_kv(body: str) -> dict:
    out = {}
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise ValueError(f"malformed step parameter {part!r}")
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_step(text: str) -> Step:
    """Parse one step spec: 'jpeg:q=75' or 'resize:f=0.5,k=lanczos3'."""
    head, _, body = text.strip().partition(":")
    kv = _parse_kv(body)
    if head == "jpeg":
        return Jpeg(quality=int(kv.get("q", "75")))
    if head == "resize":
        factor = Fraction(kv.get("f", "0.5"))
        kernel = kernel_by_name(kv.get("k", "lanczos3"))
        return Resize(factor=factor, kernel=kernel)
    raise ValueError(f"unknown transform step {head!r}")


def parse_chain(specs) -> TransformChain:
    """Build a chain from an ordered list of step specs (or one string)."""
    if isinstance(specs, str):
        specs = [s for s in specs.split("|") if s.strip()]
    return TransformChain(tuple(parse_step(s) for s in specs))
