"""Super-resolution backends: identity, built-in interpolation, or subprocess.

Every backend honors a hard dimension contract (out = in * scale exactly);
a result with any other size raises instead of being silently resized.
"""

from __future__ import annotations

import hashlib
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

from .errors import (BackendFailed, BackendTimeout, ScaleContractViolated,
                     ScaleMismatch)
from .imgcore import ImageF, load_png, save_png, to_float, to_u8
from .transforms.resample import LANCZOS3, ResampleKernel, resample


@dataclass(frozen=True)
class SrBackendSpec:
    """kind: identity | interp | external; scale is part of the contract."""

    kind: str
    scale: int = 1
    kernel: ResampleKernel = LANCZOS3
    command: Optional[str] = None
    timeout_s: float = 120.0
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("identity", "interp", "external"):
            raise ValueError(f"unknown SR backend kind {self.kind!r}")
        if self.kind == "identity" and self.scale != 1:
            raise ValueError("identity SR requires scale 1")
        if self.scale < 1:
            raise ValueError(f"SR scale must be >= 1, got {self.scale}")
        if self.kind == "external":
            if not self.command:
                raise ValueError("external SR requires a command")
            if self.timeout_s <= 0:
                raise ValueError("timeout_s must be positive")

    def describe(self) -> str:
        if self.kind == "interp":
            return f"interp:{self.kernel.name}:x{self.scale}"
        if self.kind == "external":
            return f"external:x{self.scale}"
        return "identity"


@dataclass(frozen=True)
class SrResult:
    image: ImageF
    elapsed_s: float


IDENTITY_SR = SrBackendSpec("identity")


def validate_pipeline_scales(f_spec: SrBackendSpec, g_spec: SrBackendSpec,
                             down_factor: int) -> None:
    """Both SR scales must equal the down factor or the pipeline cannot typecheck."""
    if f_spec.scale != down_factor:
        raise ScaleMismatch("face", down_factor, f_spec.scale)
    if g_spec.scale != down_factor:
        raise ScaleMismatch("general", down_factor, g_spec.scale)


def _cache_key(img: ImageF, spec: SrBackendSpec) -> str:
    h = hashlib.sha256()
    h.update(to_u8(img).data.tobytes())
    h.update(f"{img.width}x{img.height}x{img.channels}".encode())
    h.update(f"{spec.command}|{spec.scale}".encode())
    return h.hexdigest()


def _run_external(img: ImageF, spec: SrBackendSpec) -> ImageF:
    argv = shlex.split(spec.command) if isinstance(spec.command, str) else list(spec.command)
    if spec.cache_dir:
        os.makedirs(spec.cache_dir, exist_ok=True)
        cache_path = os.path.join(spec.cache_dir, _cache_key(img, spec) + ".png")
        if os.path.exists(cache_path):
            return to_float(load_png(cache_path))
    else:
        cache_path = None

    with tempfile.TemporaryDirectory(prefix="purikit-sr-") as tmp:
        in_path = os.path.join(tmp, "input.png")
        out_path = os.path.join(tmp, "output.png")
        save_png(to_u8(img), in_path)
        cmd = argv + [in_path, out_path, str(spec.scale)]
        attempts = 0
        while True:
            attempts += 1
            try:
                proc = subprocess.run(cmd, capture_output=True, text=True,
                                      timeout=spec.timeout_s)
                break
            except FileNotFoundError as exc:
                raise BackendFailed(f"SR backend not found: {argv[0]}") from exc
            except subprocess.TimeoutExpired:
                if attempts > 1:
                    raise BackendTimeout(
                        f"SR backend timed out twice ({spec.timeout_s}s each)")
        if proc.returncode != 0:
            tail = proc.stderr.strip()[-500:]
            raise BackendFailed(f"SR backend exited {proc.returncode}: {tail}",
                                exit_code=proc.returncode, stderr=tail)
        if not os.path.exists(out_path):
            raise BackendFailed("SR backend produced no output file")
        out_u8 = load_png(out_path)
        want = (img.width * spec.scale, img.height * spec.scale)
        got = (out_u8.width, out_u8.height)
        if got != want:
            raise ScaleContractViolated(
                f"SR backend returned {got[0]}x{got[1]}, contract wants {want[0]}x{want[1]}")
        if out_u8.channels != img.channels:
            raise BackendFailed(
                f"SR backend returned {out_u8.channels} channels, input had {img.channels}")
        if cache_path:
            save_png(out_u8, cache_path + ".tmp")
            os.replace(cache_path + ".tmp", cache_path)
        return to_float(out_u8)


def upscale(img: ImageF, spec: SrBackendSpec) -> SrResult:
    """Apply one SR backend; the returned image is exactly scale x input size."""
    start = time.perf_counter()
    if spec.kind == "identity":
        out = img
    elif spec.kind == "interp":
        out = resample(img, img.width * spec.scale, img.height * spec.scale,
                       spec.kernel)
    else:
        out = _run_external(img, spec)
    return SrResult(out, time.perf_counter() - start)
