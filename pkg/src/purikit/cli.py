"""Command-line interface.

Subcommands: transform, purify, metric, perturb, evaluate, quant-tables.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import PurikitError
from .harness import emit_report, load_config, run_eval
from .imgcore import ImageF, load_png, save_png, to_float, to_u8
from .masking import MaskSource
from .metrics import MetricRegistry
from .perturbsim import PerturbSpec, generate, parse_epsilon
from .purify import PurifyParams, purify
from .srbackend import SrBackendSpec
from .transforms import (format_quant_tables, parse_chain,
                         quant_tables_for_quality)
from .transforms.resample import kernel_by_name


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="purikit",
        description="Image transformation chains, region-wise purification, "
                    "quality metrics, and batch evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="apply an ordered chain of steps")
    p.add_argument("--in", dest="input", required=True, help="input PNG")
    p.add_argument("--out", dest="output", required=True, help="output PNG")
    p.add_argument("--step", action="append", required=True,
                   help="step spec, e.g. jpeg:q=75 or resize:f=0.5,k=lanczos3; "
                        "repeat in application order")

    p = sub.add_parser("purify", help="run the region-wise purification pipeline")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.2,
                   help="blend weight toward the input image (default 0.2)")
    p.add_argument("--jpeg-q", type=int, default=75)
    p.add_argument("--no-jpeg", action="store_true",
                   help="skip the compression stage entirely")
    p.add_argument("--down", type=int, default=2, help="downscale factor")
    p.add_argument("--down-kernel", default="lanczos3")
    p.add_argument("--blend", choices=["convex", "literal"], default="convex")
    p.add_argument("--face-sr", default="interp:lanczos3",
                   help="identity | interp:<kernel> | external:<cmd>")
    p.add_argument("--general-sr", default="interp:lanczos3")
    p.add_argument("--sr-timeout", type=float, default=120.0)
    p.add_argument("--mask", default="ellipse:0.5,0.5,0.35,0.45",
                   help="ellipse:cx,cy,rx,ry | file:<path> | external:<cmd>")
    p.add_argument("--feather", type=int, default=None,
                   help="feather radius in pixels (default max(2, width/64))")
    p.add_argument("--hard-mask", action="store_true",
                   help="disable feathering (literal hard-mask fusion)")
    p.add_argument("--trace-dir", default=None,
                   help="directory receiving x_jd.png, x_f.png, x_g.png, mask.png")

    p = sub.add_parser("metric", help="compute a full-reference metric")
    p.add_argument("--a", required=True, help="reference PNG")
    p.add_argument("--b", required=True, help="comparison PNG")
    p.add_argument("--name", default="psnr", help="psnr | ssim | mse")

    p = sub.add_parser("perturb", help="add a synthetic bounded perturbation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--kind", choices=["uniform", "sign", "checkerboard", "sinusoid"],
                   default="sign")
    p.add_argument("--eps", default="8/255", help="budget, e.g. 8/255 or 0.031")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period", type=int, default=2)
    p.add_argument("--orientation", choices=["h", "v"], default="h")

    p = sub.add_parser("evaluate", help="run a config-driven batch evaluation")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", default=None, help="override the report path")
    p.add_argument("--format", choices=["csv", "json"], default=None)

    p = sub.add_parser("quant-tables", help="print the scaled quantization tables")
    p.add_argument("--q", type=int, required=True, help="quality factor 1-100")

    return parser


def _parse_sr_arg(text: str, scale: int, timeout_s: float) -> SrBackendSpec:
    head, _, rest = text.partition(":")
    if head == "identity":
        return SrBackendSpec("identity")
    if head == "interp":
        return SrBackendSpec("interp", scale=scale,
                             kernel=kernel_by_name(rest or "lanczos3"))
    if head == "external":
        if not rest:
            raise PurikitError("external SR needs a command: external:<cmd>")
        return SrBackendSpec("external", scale=scale, command=rest,
                             timeout_s=timeout_s)
    raise PurikitError(f"unknown SR backend spec {text!r}")


def _parse_mask_arg(text: str) -> MaskSource:
    head, _, rest = text.partition(":")
    if head == "ellipse":
        parts = [float(v) for v in rest.split(",")] if rest else []
        cx, cy, rx, ry = (parts + [0.5, 0.5, 0.35, 0.45])[:4]
        return MaskSource("ellipse", cx=cx, cy=cy, rx=rx, ry=ry)
    if head == "file":
        return MaskSource("file", path=rest)
    if head == "external":
        return MaskSource("external", command=rest)
    raise PurikitError(f"unknown mask spec {text!r}")


def _cmd_transform(args):
    img = to_float(load_png(args.input))
    chain = parse_chain(args.step)
    save_png(to_u8(chain.apply(img)), args.output)
    return 0


def _cmd_purify(args):
    img = to_float(load_png(args.input))
    params = PurifyParams(
        lam=args.lam,
        jpeg_q=None if args.no_jpeg else args.jpeg_q,
        down_factor=args.down,
        down_kernel=kernel_by_name(args.down_kernel),
        blend_mode=args.blend,
        face_sr=_parse_sr_arg(args.face_sr, args.down, args.sr_timeout),
        general_sr=_parse_sr_arg(args.general_sr, args.down, args.sr_timeout),
        mask_source=_parse_mask_arg(args.mask),
        feather_radius=0 if args.hard_mask else args.feather,
    )
    if args.trace_dir:
        out, trace = purify(img, params, trace=True)
        tdir = Path(args.trace_dir)
        tdir.mkdir(parents=True, exist_ok=True)
        save_png(to_u8(trace.x_jd), tdir / "x_jd.png")
        save_png(to_u8(trace.x_f), tdir / "x_f.png")
        save_png(to_u8(trace.x_g), tdir / "x_g.png")
        save_png(to_u8(ImageF(trace.mask.data[None, :, :])), tdir / "mask.png")
    else:
        out = purify(img, params)
    save_png(to_u8(out), args.output)
    return 0


def _cmd_metric(args):
    registry = MetricRegistry()
    a = to_float(load_png(args.a))
    b = to_float(load_png(args.b))
    mv = registry.compute_native(args.name, a, b)
    print(float(format(mv.value, ".6g")))
    return 0


def _cmd_perturb(args):
    img = to_float(load_png(args.input))
    spec = PerturbSpec(kind=args.kind, epsilon=parse_epsilon(args.eps),
                       seed=args.seed, period=args.period,
                       orientation=args.orientation)
    save_png(to_u8(generate(img, spec)), args.output)
    return 0


def _cmd_evaluate(args):
    cfg = load_config(args.config)
    if args.out:
        cfg.output = args.out
    if args.format:
        cfg.output_format = args.format
    report = run_eval(cfg)
    if cfg.output:
        emit_report(report, cfg.output, cfg.output_format)
        print(f"wrote {cfg.output} ({len(report.rows)} rows, "
              f"{len(report.failures)} failures)")
    else:
        for r in report.rows:
            print(f"{r.setting}\t{r.method}\t{r.metric}\t"
                  f"{format(r.mean, '.6g')}\t{format(r.std, '.6g')}\t{r.n}")
    return 0


def _cmd_quant_tables(args):
    print(format_quant_tables(quant_tables_for_quality(args.q)))
    return 0


_COMMANDS = {
    "transform": _cmd_transform,
    "purify": _cmd_purify,
    "metric": _cmd_metric,
    "perturb": _cmd_perturb,
    "evaluate": _cmd_evaluate,
    "quant-tables": _cmd_quant_tables,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1  # bad argument value
    except PurikitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
