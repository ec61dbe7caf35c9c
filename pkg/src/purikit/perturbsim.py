"""Synthetic bounded perturbations standing in for protective defenses.

Every generated residual satisfies max|eta| <= epsilon by construction;
clamping back into [0, 1] can only shrink it.  Random kinds are seeded
and bit-reproducible; checkerboard and sinusoid ignore the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EpsilonOutOfRange
from .imgcore import ImageF, clamp01
from .metrics import attenuation_ratio, perturbation_stats
from .transforms.chain import TransformChain
from .transforms.resample import resample

EPSILON_MAX = 0.25

KINDS = ("uniform", "sign", "checkerboard", "sinusoid")


@dataclass(frozen=True)
class PerturbSpec:
    """kind, budget, and seed; period/orientation apply to structured kinds."""

    kind: str
    epsilon: float
    seed: int = 0
    period: int = 2
    orientation: str = "h"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if not 0.0 < self.epsilon <= EPSILON_MAX:
            raise EpsilonOutOfRange(
                f"epsilon must lie in (0, {EPSILON_MAX}], got {self.epsilon}")
        if self.kind in ("checkerboard", "sinusoid") and self.period < 2:
            raise ValueError(f"period must be >= 2, got {self.period}")
        if self.orientation not in ("h", "v"):
            raise ValueError(f"orientation must be 'h' or 'v', got {self.orientation!r}")

    def label(self) -> str:
        if self.kind in ("uniform", "sign"):
            return f"{self.kind}:eps={self.epsilon:g},seed={self.seed}"
        if self.kind == "checkerboard":
            return f"checkerboard:eps={self.epsilon:g},period={self.period}"
        return f"sinusoid:eps={self.epsilon:g},period={self.period},{self.orientation}"


def residual(shape, spec: PerturbSpec) -> np.ndarray:
    """The pre-clamp perturbation eta for a planar (c, h, w) shape."""
    c, h, w = shape
    eps = spec.epsilon
    if spec.kind == "uniform":
        rng = np.random.default_rng(spec.seed)
        return rng.uniform(-eps, eps, size=shape)
    if spec.kind == "sign":
        rng = np.random.default_rng(spec.seed)
        return np.where(rng.random(shape) < 0.5, -eps, eps)
    if spec.kind == "checkerboard":
        cell = max(1, spec.period // 2)
        yy, xx = np.mgrid[0:h, 0:w]
        signs = np.where(((xx // cell + yy // cell) % 2) == 0, eps, -eps)
        return np.broadcast_to(signs, shape).copy()
    coord = np.arange(w if spec.orientation == "h" else h, dtype=np.float64)
    wave = eps * np.sin(2.0 * np.pi * coord / spec.period)
    plane = np.broadcast_to(wave[None, :], (h, w)) if spec.orientation == "h" \
        else np.broadcast_to(wave[:, None], (h, w))
    return np.broadcast_to(plane, shape).copy()


def generate(x: ImageF, spec: PerturbSpec) -> ImageF:
    """xhat = clamp(x + eta); deterministic for a fixed (x, spec)."""
    return ImageF(clamp01(x.data + residual(x.data.shape, spec)))


def residual_report(x: ImageF, xhat: ImageF, chains) -> list:
    """Rows of (chain label, attenuation ratio, post-transform linf).

    An identity-chain sanity row (ratio exactly 1) is prepended when the
    caller did not include one.
    """
    chains = list(chains)
    if not any(c.is_identity for c in chains):
        chains.insert(0, TransformChain())
    rows = []
    for chain in chains:
        ratio = attenuation_ratio(x, xhat, chain)
        tx = chain.apply(x)
        txhat = chain.apply(xhat)
        if tx.data.shape != x.data.shape:
            tx = resample(tx, x.width, x.height)
            txhat = resample(txhat, x.width, x.height)
        linf_after = perturbation_stats(tx, txhat).linf
        rows.append({"chain": chain.spec(), "ratio": ratio,
                     "linf_after": linf_after})
    return rows


def sweep_epsilon(x: ImageF, kind: str, epsilons, chain: TransformChain,
                  seed: int = 0, period: int = 2, orientation: str = "h") -> list:
    """One row per epsilon: budget stats plus the attenuation ratio."""
    if not epsilons:
        raise ValueError("epsilons list must be non-empty")
    rows = []
    for eps in epsilons:
        spec = PerturbSpec(kind, float(eps), seed=seed, period=period,
                           orientation=orientation)
        xhat = generate(x, spec)
        stats = perturbation_stats(x, xhat)
        rows.append({
            "epsilon": float(eps),
            "linf": stats.linf,
            "l2": stats.l2,
            "mean_abs": stats.mean_abs,
            "ratio": attenuation_ratio(x, xhat, chain),
        })
    return rows


def parse_epsilon(text: str) -> float:
    """Accept '0.03', '8/255', and similar budget spellings."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)
