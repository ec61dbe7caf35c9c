"""Config-driven batch evaluation producing deterministic CSV/JSON reports.

Pairs clean and protected images by filename, applies each configured
setting to the protected image, measures every configured metric against
the clean image at clean resolution, and aggregates mean/std/n per
(setting, metric).  Reports are invariant under the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import shlex
import subprocess
import tempfile
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import BackendFailed, PairingError, PurikitError
from .imgcore import ImageF, load_png, save_png, to_float, to_u8
from .metrics import MetricRegistry
from .perturbsim import PerturbSpec, generate
from .purify import PurifyParams, purify
from .srbackend import SrBackendSpec
from .transforms.chain import Jpeg, Resize, TransformChain, parse_step
from .transforms.resample import LANCZOS3, kernel_by_name, resample
from .masking import MaskSource

WORKERS_ENV = "PURIKIT_WORKERS"


@dataclass(frozen=True)
class Setting:
    """One evaluation setting: none, a transform chain, or the purifier."""

    label: str
    chain: Optional[TransformChain] = None
    tiprsr: Optional[PurifyParams] = None

    @property
    def is_purify(self) -> bool:
        return self.tiprsr is not None


@dataclass
class EvalConfig:
    clean_dir: str
    protected_dir: Optional[str] = None
    synth: Optional[PerturbSpec] = None
    settings: list = field(default_factory=list)
    metrics: list = field(default_factory=lambda: ["psnr", "ssim"])
    method_label: Optional[str] = None
    output: Optional[str] = None
    output_format: str = "csv"
    seed: int = 0
    workers: int = 1
    external_metrics: dict = field(default_factory=dict)
    generator_cmd: Optional[str] = None
    keep_intermediates: Optional[str] = None

    def __post_init__(self):
        if (self.protected_dir is None) == (self.synth is None):
            raise ValueError("exactly one of protected_dir / synth must be set")
        if not self.settings:
            raise ValueError("at least one setting is required")
        if not self.metrics:
            raise ValueError("at least one metric is required")


@dataclass(frozen=True)
class EvalRow:
    setting: str
    method: str
    metric: str
    mean: float
    std: float
    n: int


@dataclass
class EvalReport:
    rows: list
    provenance: dict
    failures: list = field(default_factory=list)


def _parse_sr_spec(d: dict) -> SrBackendSpec:
    kind = d.get("kind", "interp")
    if kind == "identity":
        return SrBackendSpec("identity")
    if kind == "interp":
        return SrBackendSpec("interp", scale=int(d.get("scale", 2)),
                             kernel=kernel_by_name(d.get("kernel", "lanczos3")))
    return SrBackendSpec("external", scale=int(d.get("scale", 2)),
                         command=d["cmd"], timeout_s=float(d.get("timeout_s", 120)),
                         cache_dir=d.get("cache_dir"))


def _parse_mask_source(d) -> MaskSource:
    if d is None:
        return MaskSource("ellipse")
    kind = d.get("kind", "ellipse")
    if kind == "file":
        return MaskSource("file", path=d["path"])
    if kind == "external":
        return MaskSource("external", command=d["cmd"])
    return MaskSource("ellipse", cx=float(d.get("cx", 0.5)), cy=float(d.get("cy", 0.5)),
                      rx=float(d.get("rx", 0.35)), ry=float(d.get("ry", 0.45)))


def parse_purify_params(d: dict) -> PurifyParams:
    down = int(d.get("down_factor", 2))
    face = _parse_sr_spec(d.get("face_sr", {"kind": "interp", "scale": down}))
    general = _parse_sr_spec(d.get("general_sr", {"kind": "interp", "scale": down}))
    jpeg_q = d.get("jpeg_q", 75)
    return PurifyParams(
        lam=float(d.get("lambda", 0.2)),
        jpeg_q=None if jpeg_q is None else int(jpeg_q),
        down_factor=down,
        down_kernel=kernel_by_name(d.get("down_kernel", "lanczos3")),
        blend_mode=d.get("blend_mode", "convex"),
        face_sr=face,
        general_sr=general,
        mask_source=_parse_mask_source(d.get("mask")),
        feather_radius=d.get("feather_radius"),
    )


def parse_setting(entry, sr_defaults=None) -> Setting:
    """Settings come as chain strings or as a {'type': 'tiprsr', ...} object.

    sr_defaults: optional {'face': {...}, 'general': {...}} backend specs
    (the config's sr.face / sr.general sections) used by tiprsr settings
    that do not name their own.
    """
    sr_defaults = sr_defaults or {}
    if isinstance(entry, str):
        text = entry.strip()
        if text == "none":
            return Setting("none", chain=TransformChain())
        if text == "tiprsr":
            params = {}
            if "face" in sr_defaults:
                params["face_sr"] = sr_defaults["face"]
            if "general" in sr_defaults:
                params["general_sr"] = sr_defaults["general"]
            return Setting("tiprsr", tiprsr=parse_purify_params(params))
        if text.startswith("cnr"):
            _, _, body = text.partition(":")
            kv = dict(part.split("=", 1) for part in body.split(",")) if body else {}
            q = int(kv.get("q", "75"))
            f = kv.get("f", "0.5")
            k = kernel_by_name(kv.get("k", "lanczos3"))
            chain = TransformChain((Jpeg(q), Resize(f, k)))
            return Setting(f"cnr:q={q},f={f},k={k.name}", chain=chain)
        step = parse_step(text)
        return Setting(step.spec(), chain=TransformChain((step,)))
    if isinstance(entry, dict):
        kind = entry.get("type")
        if kind == "tiprsr":
            d = {k: v for k, v in entry.items() if k not in ("type", "label")}
            if "face_sr" not in d and "face" in sr_defaults:
                d["face_sr"] = sr_defaults["face"]
            if "general_sr" not in d and "general" in sr_defaults:
                d["general_sr"] = sr_defaults["general"]
            return Setting(entry.get("label", "tiprsr"),
                           tiprsr=parse_purify_params(d))
        raise ValueError(f"unknown setting object type {kind!r}")
    raise ValueError(f"unparseable setting {entry!r}")


def load_config(path) -> EvalConfig:
    """Read the JSON config file (schema documented in the README)."""
    with open(path) as fh:
        raw = json.load(fh)
    protected = raw.get("protected", {})
    synth = None
    protected_dir = None
    if isinstance(protected, str):
        protected_dir = protected
    elif "dir" in protected:
        protected_dir = protected["dir"]
    elif "synth" in protected:
        s = protected["synth"]
        synth = PerturbSpec(kind=s.get("kind", "sign"),
                            epsilon=float(s.get("epsilon", 8 / 255)),
                            seed=int(s.get("seed", 0)),
                            period=int(s.get("period", 2)),
                            orientation=s.get("orientation", "h"))
    metrics_cfg = raw.get("metrics", ["psnr", "ssim"])
    external = {}
    if isinstance(metrics_cfg, dict):
        names = metrics_cfg.get("names", ["psnr", "ssim"])
        for name, sub in metrics_cfg.get("external", {}).items():
            external[name] = sub
    else:
        names = metrics_cfg
        for name, sub in raw.get("metrics.external", {}).items():
            external[name] = sub
    out = raw.get("output", {})
    sr_defaults = raw.get("sr", {})
    return EvalConfig(
        clean_dir=raw["clean_dir"],
        protected_dir=protected_dir,
        synth=synth,
        settings=[parse_setting(s, sr_defaults) for s in raw.get("settings", ["none"])],
        metrics=list(names),
        method_label=raw.get("method"),
        output=out.get("path") if isinstance(out, dict) else out,
        output_format=(out.get("format", "csv") if isinstance(out, dict) else "csv"),
        seed=int(raw.get("seed", 0)),
        workers=int(raw.get("workers", 1)),
        external_metrics=external,
        generator_cmd=raw.get("generator", {}).get("cmd") if isinstance(raw.get("generator"), dict) else None,
        keep_intermediates=raw.get("keep_intermediates"),
    )


def _build_registry(cfg: EvalConfig) -> MetricRegistry:
    reg = MetricRegistry()
    for name, sub in cfg.external_metrics.items():
        reg.register_external(name, sub["cmd"], sub.get("higher_is_better"))
    return reg


def _pair_files(cfg: EvalConfig):
    clean = sorted(p.name for p in Path(cfg.clean_dir).glob("*.png"))
    if not clean:
        raise PairingError(f"no PNG files in clean dir {cfg.clean_dir}")
    if cfg.protected_dir is None:
        return clean
    protected = {p.name for p in Path(cfg.protected_dir).glob("*.png")}
    missing = [n for n in clean if n not in protected]
    if missing:
        raise PairingError(f"protected dir lacks pairs for: {', '.join(missing[:5])}")
    return clean


def _per_file_seed(base_seed: int, name: str) -> int:
    return (base_seed * 1000003 + zlib.crc32(name.encode())) % (2 ** 63)


def _run_generator(cmd, img: ImageF) -> ImageF:
    """Optional hook standing in for a downstream generation model."""
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    with tempfile.TemporaryDirectory(prefix="purikit-gen-") as tmp:
        in_path = os.path.join(tmp, "in.png")
        out_path = os.path.join(tmp, "out.png")
        save_png(to_u8(img), in_path)
        proc = subprocess.run(argv + [in_path, out_path], capture_output=True,
                              text=True, timeout=600.0)
        if proc.returncode != 0:
            raise BackendFailed(f"generator exited {proc.returncode}",
                                exit_code=proc.returncode,
                                stderr=proc.stderr.strip()[-500:])
        return to_float(load_png(out_path))


def _eval_one(name, cfg: EvalConfig, registry: MetricRegistry, tmpdir: Path,
              set_level=()):
    """Metric values for one clean/protected pair across all settings.

    Set-level metrics (FID-style, configured with set_level: true) are not
    computed here; their input images are dumped into per-setting
    directories for one backend invocation over the whole set.
    """
    clean = to_float(load_png(Path(cfg.clean_dir) / name))
    if cfg.protected_dir is not None:
        protected = to_float(load_png(Path(cfg.protected_dir) / name))
    else:
        spec = cfg.synth
        spec = PerturbSpec(kind=spec.kind, epsilon=spec.epsilon,
                           seed=_per_file_seed(cfg.seed, name),
                           period=spec.period, orientation=spec.orientation)
        protected = generate(clean, spec)

    values = {}
    for setting in cfg.settings:
        if setting.is_purify:
            t0 = time.perf_counter()
            transformed = purify(protected, setting.tiprsr)
            elapsed = time.perf_counter() - t0
        else:
            transformed = setting.chain.apply(protected)
            elapsed = None
        reference = clean
        if cfg.generator_cmd:
            transformed = _run_generator(cfg.generator_cmd, transformed)
            reference = _run_generator(cfg.generator_cmd, clean)
        if cfg.keep_intermediates:
            outdir = Path(cfg.keep_intermediates) / setting.label.replace(":", "_")
            outdir.mkdir(parents=True, exist_ok=True)
            save_png(to_u8(transformed), outdir / name)
        if transformed.data.shape != reference.data.shape:
            transformed = resample(transformed, reference.width, reference.height,
                                   LANCZOS3)
        if set_level:
            slot = tmpdir / "setlevel" / setting.label.replace(":", "_")
            (slot / "ref").mkdir(parents=True, exist_ok=True)
            (slot / "out").mkdir(parents=True, exist_ok=True)
            save_png(to_u8(reference), slot / "ref" / name)
            save_png(to_u8(transformed), slot / "out" / name)
        for metric in cfg.metrics:
            if metric in set_level:
                continue
            if registry.is_native(metric):
                mv = registry.compute_native(metric, reference, transformed)
            else:
                a_path = tmpdir / f"{setting.label.replace(':', '_')}-a-{name}"
                b_path = tmpdir / f"{setting.label.replace(':', '_')}-b-{name}"
                save_png(to_u8(reference), a_path)
                save_png(to_u8(transformed), b_path)
                mv = registry.compute_external(metric, a_path, b_path)
            values[(setting.label, metric)] = mv.value
        if elapsed is not None:
            values[(setting.label, "time_s")] = elapsed
    return values


def config_hash(cfg: EvalConfig) -> str:
    """Hash of the semantically meaningful fields (not output/workers)."""
    semantic = {
        "clean_dir": cfg.clean_dir,
        "protected_dir": cfg.protected_dir,
        "synth": cfg.synth.label() if cfg.synth else None,
        "settings": [s.label for s in cfg.settings],
        "metrics": list(cfg.metrics),
        "method": cfg.method_label,
        "seed": cfg.seed,
        "external": {k: v.get("cmd") for k, v in cfg.external_metrics.items()},
        "generator": cfg.generator_cmd,
    }
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_eval(cfg: EvalConfig) -> EvalReport:
    """Evaluate every (pair, setting, metric) cell and aggregate."""
    registry = _build_registry(cfg)
    names = _pair_files(cfg)
    method = cfg.method_label or (Path(cfg.protected_dir).name if cfg.protected_dir
                                  else cfg.synth.label())
    workers = int(os.environ.get(WORKERS_ENV, cfg.workers) or 1)
    set_level = tuple(name for name, sub in cfg.external_metrics.items()
                      if sub.get("set_level") and name in cfg.metrics)

    results = {}
    failures = []
    set_rows = []
    with tempfile.TemporaryDirectory(prefix="purikit-eval-") as tmp:
        tmpdir = Path(tmp)

        def work(name):
            return name, _eval_one(name, cfg, registry, tmpdir, set_level)

        per_file_errors = (PurikitError, OSError, ValueError)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {name: pool.submit(work, name) for name in names}
                for name in names:  # deterministic reduction order
                    try:
                        _, vals = futures[name].result()
                        results[name] = vals
                    except per_file_errors as exc:
                        failures.append({"file": name, "error": str(exc)})
        else:
            for name in names:
                try:
                    _, vals = work(name)
                    results[name] = vals
                except per_file_errors as exc:
                    failures.append({"file": name, "error": str(exc)})

        # one directory-pair invocation per (setting, set-level metric)
        for setting in cfg.settings:
            slot = tmpdir / "setlevel" / setting.label.replace(":", "_")
            if not set_level or not slot.exists():
                continue
            n_pairs = len(list((slot / "out").glob("*.png")))
            for metric in set_level:
                mv = registry.compute_external(metric, slot / "ref", slot / "out")
                set_rows.append(EvalRow(setting.label, method, metric,
                                        mv.value, 0.0, n_pairs))

    rows = list(set_rows)
    for setting in cfg.settings:
        metric_names = [m for m in cfg.metrics if m not in set_level]
        metric_names += ["time_s"] if setting.is_purify else []
        for metric in sorted(metric_names):
            samples = [results[n][(setting.label, metric)]
                       for n in names if n in results]
            if not samples:
                continue
            arr = np.asarray(samples, dtype=np.float64)
            rows.append(EvalRow(setting.label, method, metric,
                                float(arr.mean()), float(arr.std()), len(arr)))
    rows.sort(key=lambda r: (r.setting, r.metric))
    provenance = {
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "determinism": "timestamps excluded",
    }
    return EvalReport(rows=rows, provenance=provenance, failures=failures)


def run_purify_eval(cfg: EvalConfig) -> EvalReport:
    """run_eval for configs that exercise the purifier (adds time_s rows)."""
    if not any(s.is_purify for s in cfg.settings):
        raise ValueError("run_purify_eval requires at least one tiprsr setting")
    return run_eval(cfg)


def _fmt(x: float) -> str:
    """Six significant digits, locale-independent."""
    return format(x, ".6g")


def emit_report(report: EvalReport, path, fmt: str = "csv") -> None:
    """Write CSV (fixed column set, RFC-4180 quoting) or JSON (rows + provenance)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        sink = io.StringIO()
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["setting", "method", "metric", "mean", "std", "n"])
        for r in report.rows:
            writer.writerow([r.setting, r.method, r.metric,
                             _fmt(r.mean), _fmt(r.std), r.n])
        for f in report.failures:
            sink.write(f"# failed: {f['file']}: {f['error']}\n")
        path.write_text(sink.getvalue())
    elif fmt == "json":
        payload = {
            "rows": [{"setting": r.setting, "method": r.method, "metric": r.metric,
                      "mean": float(_fmt(r.mean)), "std": float(_fmt(r.std)),
                      "n": r.n} for r in report.rows],
            "provenance": report.provenance,
            "failures": report.failures,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
