"""Full-reference quality metrics and perturbation-norm accounting.

PSNR and SSIM are native (peak 1.0, SSIM on luma with an 11x11 Gaussian
window, sigma 1.5, averaged over fully covered windows).  Learned
metrics (FID, LPIPS, BRISQUE, ...) are reached through a subprocess
protocol and never implemented here.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
from dataclasses import dataclass

import numpy as np

from .errors import (BackendFailed, BackendProtocolError, BackendUnavailable,
                     ShapeMismatch, TooSmall, ZeroPerturbation)
from .imgcore import ImageF, luma
from .transforms.chain import TransformChain
from .transforms.resample import (LANCZOS3, ResampleKernel,
                                  filter_plane_valid, resample)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PSNR_CAP_DB = 100.0

# polarity of well-known external metrics (report arrows)
KNOWN_POLARITY = {
    "fid": False,
    "lpips": False,
    "brisque": False,
    "sync_c": True,
    "m_lmd": False,
}


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    higher_is_better: bool


@dataclass(frozen=True)
class PerturbationStats:
    linf: float
    l2: float
    mean_abs: float


def _check_shapes(a: ImageF, b: ImageF):
    if a.data.shape != b.data.shape:
        raise ShapeMismatch(f"shape {a.data.shape} vs {b.data.shape}")


def mse(a: ImageF, b: ImageF) -> float:
    """Mean squared error over all samples."""
    _check_shapes(a, b)
    d = a.data - b.data
    return float(np.mean(d * d))


def psnr(a: ImageF, b: ImageF) -> MetricValue:
    """Peak signal-to-noise ratio with peak 1.0, capped at 100 dB."""
    err = mse(a, b)
    if err < 1e-10:
        value = PSNR_CAP_DB
    else:
        value = min(10.0 * math.log10(1.0 / err), PSNR_CAP_DB)
    return MetricValue("psnr", value, True)


def _gauss_window():
    half = SSIM_WINDOW // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-0.5 * (t / SSIM_SIGMA) ** 2)
    return w / w.sum()


_SSIM_W = _gauss_window()


def ssim(a: ImageF, b: ImageF) -> MetricValue:
    """Structural similarity on luma, mean over valid 11x11 window centers."""
    _check_shapes(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise TooSmall(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels")
    pa = luma(a).data[0]
    pb = luma(b).data[0]
    mu_a = filter_plane_valid(pa, _SSIM_W)
    mu_b = filter_plane_valid(pb, _SSIM_W)
    e_aa = filter_plane_valid(pa * pa, _SSIM_W)
    e_bb = filter_plane_valid(pb * pb, _SSIM_W)
    e_ab = filter_plane_valid(pa * pb, _SSIM_W)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return MetricValue("ssim", float(np.mean(num / den)), True)


def perturbation_stats(x: ImageF, xhat: ImageF) -> PerturbationStats:
    """Norms of the residual xhat - x."""
    _check_shapes(x, xhat)
    d = xhat.data - x.data
    ad = np.abs(d)
    return PerturbationStats(linf=float(ad.max()),
                             l2=float(np.sqrt(np.sum(d * d))),
                             mean_abs=float(ad.mean()))


def attenuation_ratio(x: ImageF, xhat: ImageF, chain: TransformChain,
                      re_up: ResampleKernel = LANCZOS3) -> float:
    """Fraction of perturbation energy (L2) surviving a transform chain.

    The chain is applied to both images; if it changed the resolution,
    both results are resampled back to the original size with re_up so
    the residual is measured in the original frame.
    """
    _check_shapes(x, xhat)
    d0 = xhat.data - x.data
    denom = float(np.sqrt(np.sum(d0 * d0)))
    if denom == 0.0:
        raise ZeroPerturbation("xhat equals x; the ratio is undefined")
    tx = chain.apply(x)
    txhat = chain.apply(xhat)
    if tx.data.shape != x.data.shape:
        tx = resample(tx, x.width, x.height, re_up)
        txhat = resample(txhat, x.width, x.height, re_up)
    d1 = txhat.data - tx.data
    return float(np.sqrt(np.sum(d1 * d1))) / denom


NATIVE_METRICS = {
    "psnr": (psnr, True),
    "ssim": (ssim, True),
    "mse": (lambda a, b: MetricValue("mse", mse(a, b), False), False),
}


class MetricRegistry:
    """Named metric lookup: native functions plus external backend commands."""

    def __init__(self):
        self._native = {}
        self._external = {}
        for name, (fn, hib) in NATIVE_METRICS.items():
            self.register_native(name, fn, hib)

    def register_native(self, name, fn, higher_is_better):
        if name in self._native or name in self._external:
            raise ValueError(f"metric {name!r} already registered")
        self._native[name] = (fn, higher_is_better)

    def register_external(self, name, cmd, higher_is_better=None):
        """cmd: argv list or shell-style string for the backend executable."""
        if name in self._native or name in self._external:
            raise ValueError(f"metric {name!r} already registered")
        if isinstance(cmd, str):
            cmd = shlex.split(cmd)
        if higher_is_better is None:
            higher_is_better = KNOWN_POLARITY.get(name, False)
        self._external[name] = (list(cmd), higher_is_better)

    def names(self):
        return sorted(self._native) + sorted(self._external)

    def is_native(self, name):
        return name in self._native

    def compute_native(self, name, a: ImageF, b: ImageF) -> MetricValue:
        if name not in self._native:
            raise BackendUnavailable(f"no native metric {name!r}")
        fn, _ = self._native[name]
        return fn(a, b)

    def compute_external(self, name, path_a, path_b, timeout_s=120.0) -> MetricValue:
        return external_metric(name, path_a, path_b, registry=self, timeout_s=timeout_s)

    def external_command(self, name):
        if name not in self._external:
            raise BackendUnavailable(f"no external backend registered for {name!r}")
        return self._external[name]


def external_metric(name, path_a, path_b, registry: MetricRegistry,
                    timeout_s=120.0) -> MetricValue:
    """Invoke a registered external metric backend.

    Protocol: the command runs as `<cmd...> <name> <path_a> <path_b>`,
    prints exactly one line `{"value": <number>}` on stdout, and exits 0.
    """
    cmd, higher_is_better = registry.external_command(name)
    argv = cmd + [name, str(path_a), str(path_b)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_s)
    except FileNotFoundError as exc:
        raise BackendUnavailable(f"backend executable not found: {argv[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise BackendFailed(f"metric backend {name!r} timed out") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip()[-500:]
        raise BackendFailed(f"metric backend {name!r} exited {proc.returncode}: {tail}",
                            exit_code=proc.returncode, stderr=tail)
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if len(lines) != 1:
        raise BackendProtocolError(
            f"metric backend {name!r} must print exactly one line, got {len(lines)}")
    try:
        payload = json.loads(lines[0])
        value = float(payload["value"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise BackendProtocolError(
            f"metric backend {name!r} printed unparseable output: {lines[0]!r}") from exc
    if not math.isfinite(value):
        raise BackendProtocolError(f"metric backend {name!r} returned non-finite value")
    return MetricValue(name, value, higher_is_better)
