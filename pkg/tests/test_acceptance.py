"""Acceptance suite: one test (and one printed pass/fail line) per criterion.

Run with `pytest tests/test_acceptance.py -v -s` for the line-per-criterion
output.  Tolerances are pinned here, not deferred.
"""

import math
import stat
import time

import numpy as np
import pytest

from helpers import make_portrait
from oracles import dense_resample, mse_loop, ssim_windows
from purikit.errors import (BackendFailed, BackendProtocolError,
                            BackendTimeout, ScaleContractViolated)
from purikit.imgcore import ImageF
from purikit.masking import MaskSource, build_mask
from purikit.metrics import MetricRegistry, attenuation_ratio, psnr, ssim
from purikit.perturbsim import PerturbSpec, generate
from purikit.purify import PurifyParams, identity_params, purify
from purikit.srbackend import SrBackendSpec, upscale
from purikit.transforms import (LANCZOS3, jpeg_decode, jpeg_encode,
                                jpeg_roundtrip, quant_tables_for_quality,
                                resample)
from purikit.transforms.chain import Jpeg, Resize, TransformChain
from purikit.transforms.jpeg import BASE_CHROMINANCE, BASE_LUMINANCE

# pre-build oracle measurements for criterion 6 (see test docstrings)
PINNED_RESIZE_RATIO = 0.0013537
PINNED_CNR_RATIO = 0.0540471
REFERENCE_CODEC_CNR_RATIO = 0.0578264


def _report(n, desc, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] criterion {n}: {desc}: {status}{suffix}")
    return ok


def test_criterion_1_metric_oracle_equivalence(rng):
    start = time.perf_counter()
    worst_psnr = 0.0
    worst_ssim = 0.0
    for _ in range(20):
        a = ImageF(rng.random((3, 64, 64)))
        b = ImageF(np.clip(a.data + rng.normal(0, 0.08, a.data.shape), 0, 1))
        ref_psnr = min(10.0 * math.log10(1.0 / mse_loop(a, b)), 100.0)
        worst_psnr = max(worst_psnr, abs(psnr(a, b).value - ref_psnr))
        worst_ssim = max(worst_ssim, abs(ssim(a, b).value - ssim_windows(a, b)))
    elapsed = time.perf_counter() - start
    ok = worst_psnr < 1e-6 and worst_ssim < 1e-6 and elapsed < 5.0
    assert _report(1, "PSNR/SSIM match brute-force oracles on 20 random 64x64 pairs",
                   ok, f"max dPSNR={worst_psnr:.2e}, max dSSIM={worst_ssim:.2e}, "
                       f"{elapsed:.2f}s")


def test_criterion_2_resampling_oracle_equivalence(rng):
    start = time.perf_counter()
    worst = 0.0
    cases = [((16, 16), (8, 8)), ((7, 5), (13, 11)), ((128, 128), (64, 64))]
    for (in_w, in_h), (out_w, out_h) in cases:
        img = ImageF(rng.random((3, in_h, in_w)))
        mine = resample(img, out_w, out_h, LANCZOS3)
        ref = dense_resample(img, out_w, out_h, LANCZOS3)
        worst = max(worst, float(np.abs(mine.data - ref.data).max()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and elapsed < 10.0
    assert _report(2, "separable lanczos3 equals dense 2-D oracle on three sizes",
                   ok, f"max |diff|={worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_jpeg_correctness(small_portrait):
    import io

    from PIL import Image

    fix = make_portrait(3, 64)
    # (a) q50 == base tables
    qt50 = quant_tables_for_quality(50)
    ok_a = (np.array_equal(qt50.luminance, BASE_LUMINANCE)
            and np.array_equal(qt50.chrominance, BASE_CHROMINANCE))
    # (b) q75 matches the reference codec's tables
    qt75 = quant_tables_for_quality(75)
    buf = io.BytesIO()
    arr = np.floor(fix.data * 255 + 0.5).astype(np.uint8).transpose(1, 2, 0)
    Image.fromarray(arr, "RGB").save(buf, format="JPEG", quality=75)
    from test_jpeg import _parse_dqt
    ref_tables = _parse_dqt(buf.getvalue())
    ok_b = (qt75.luminance[0, 0] == 8
            and np.array_equal(qt75.luminance, ref_tables[0])
            and np.array_equal(qt75.chrominance, ref_tables[1]))
    # (c) roundtrip PSNR at q75
    rt = psnr(fix, jpeg_roundtrip(fix, 75)).value
    ok_c = rt >= 30.0
    # (d) byte determinism
    ok_d = jpeg_encode(fix, 75) == jpeg_encode(fix, 75)
    # (e) cross-decode agreement on the reference encoder's q75 file
    ref_file = buf.getvalue()
    ours = jpeg_decode(ref_file)
    ref_dec = np.asarray(Image.open(io.BytesIO(ref_file)).convert("RGB"),
                         dtype=np.float64).transpose(2, 0, 1) / 255.0
    delta = float(np.abs(ours.data - ref_dec).max())
    ok_e = delta <= 1 / 255 + 1e-12
    ok = ok_a and ok_b and ok_c and ok_d and ok_e
    assert _report(3, "JPEG tables/roundtrip/determinism/cross-decode",
                   ok, f"q75 PSNR={rt:.2f} dB, cross-decode max diff={delta * 255:.3f}/255")


def test_criterion_4_pipeline_identity(small_portrait):
    from purikit.purify import background_path, face_path

    out = purify(small_portrait, identity_params())
    ok_ident = np.array_equal(out.data, small_portrait.data)

    full = MaskSource("ellipse", cx=0.5, cy=0.5, rx=1.0, ry=1.0)
    empty = MaskSource("ellipse", cx=0.01, cy=0.01, rx=0.001, ry=0.001)
    p_full = PurifyParams(mask_source=full, feather_radius=0)
    p_empty = PurifyParams(mask_source=empty, feather_radius=0)
    ok_face = np.array_equal(purify(small_portrait, p_full).data,
                             face_path(small_portrait, p_full).data)
    ok_bg = np.array_equal(purify(small_portrait, p_empty).data,
                           background_path(small_portrait, p_empty).data)
    ok = ok_ident and ok_face and ok_bg
    assert _report(4, "degenerate config is bit-exact; mask extremes select paths", ok)


def test_criterion_5_lambda_blend_law():
    full = MaskSource("ellipse", cx=0.5, cy=0.5, rx=1.0, ry=1.0)
    ok = True
    worst = -1.0
    for seed in range(10):
        x = make_portrait(40 + seed, 64)
        xhat = generate(x, PerturbSpec("sign", 8 / 255, seed=seed))
        dists = []
        for lam in (0.0, 0.4, 0.8):
            p = PurifyParams(lam=lam, mask_source=full, feather_radius=0)
            out = purify(xhat, p)
            dists.append(float(np.sqrt(np.sum((out.data - xhat.data) ** 2))))
        ok = ok and dists[2] <= dists[1] + 1e-9 and dists[1] <= dists[0] + 1e-9
        worst = max(worst, dists[2] - dists[1], dists[1] - dists[0])
    assert _report(5, "distance to input is non-increasing in lambda (10 fixtures)",
                   ok, f"max inversion={worst:.2e}")


def test_criterion_6_attenuation_regression():
    x = make_portrait(0, 128)
    xhat = generate(x, PerturbSpec("checkerboard", 8 / 255, period=2))
    resize_half = TransformChain((Resize("1/2"),))
    cnr = TransformChain((Jpeg(75), Resize("1/2")))
    r_resize = attenuation_ratio(x, xhat, resize_half)
    r_cnr = attenuation_ratio(x, xhat, cnr)

    ok_bound = r_resize < 0.3
    ok_pin_resize = abs(r_resize - PINNED_RESIZE_RATIO) <= 0.05 * PINNED_RESIZE_RATIO
    ok_pin_cnr = abs(r_cnr - PINNED_CNR_RATIO) <= 0.05 * PINNED_CNR_RATIO
    ok_crosscodec = (abs(r_cnr - REFERENCE_CODEC_CNR_RATIO)
                     <= 0.15 * REFERENCE_CODEC_CNR_RATIO)
    assert ok_bound, f"resize ratio {r_resize} not < 0.3"
    assert ok_pin_resize, f"resize ratio {r_resize} deviates from pinned baseline"
    assert ok_pin_cnr, f"cnr ratio {r_cnr} deviates from pinned baseline"
    assert ok_crosscodec, f"cnr ratio {r_cnr} far from reference-codec oracle"

    ok_strict = r_cnr < r_resize
    _report(6, "Nyquist checkerboard attenuation bounds and pinned baselines",
            ok_strict, f"resize={r_resize:.6f}, cnr={r_cnr:.6f}")
    assert ok_strict, (
        "criterion as stated requires attenuation under jpeg75+resize to be "
        "strictly below resize alone; measured the opposite for the exact "
        f"Nyquist checkerboard (resize={r_resize:.6f}, cnr={r_cnr:.6f}), "
        "confirmed by the dense-resample oracle with the reference codec "
        f"(cnr={REFERENCE_CODEC_CNR_RATIO}): the half-size Lanczos downscale "
        "already annihilates the Nyquist tone almost exactly, and JPEG "
        "quantization rounding leaks energy into frequencies that survive "
        "the resize. The predicted direction does hold for white sign noise "
        "(tested in test_perturbsim.py).")


def test_criterion_7_directional_purification_efficacy():
    start = time.perf_counter()
    wins = 0
    total = 0
    for i in range(20):
        clean = make_portrait(100 + i, 128)
        for eps in (4 / 255, 8 / 255, 16 / 255):
            xhat = generate(clean, PerturbSpec("sign", eps, seed=i * 7 + int(eps * 255)))
            purified = purify(xhat, PurifyParams())
            total += 1
            if ssim(clean, purified).value > ssim(clean, xhat).value:
                wins += 1
    elapsed = time.perf_counter() - start
    ok = wins >= 0.9 * total and elapsed < 120.0
    assert _report(7, "default pipeline lifts SSIM vs protected on >=90% of cases",
                   ok, f"{wins}/{total} wins, {elapsed:.1f}s")


def test_criterion_8_harness_determinism(tmp_path):
    from purikit.harness import EvalConfig, emit_report, parse_setting, run_eval
    from purikit.imgcore import save_png, to_u8

    clean = tmp_path / "clean"
    clean.mkdir()
    for s in range(4):
        save_png(to_u8(make_portrait(60 + s, 48)), clean / f"f{s}.png")

    def one(workers, tag):
        cfg = EvalConfig(clean_dir=str(clean),
                         synth=PerturbSpec("sign", 8 / 255),
                         settings=[parse_setting("none"),
                                   parse_setting("jpeg:q=75"),
                                   parse_setting("cnr:q=75,f=0.5,k=lanczos3")],
                         metrics=["psnr", "ssim"], seed=9, workers=workers)
        out = tmp_path / f"rep-{tag}.csv"
        emit_report(run_eval(cfg), out, "csv")
        return out.read_bytes()

    a = one(1, "a")
    b = one(1, "b")
    c = one(8, "c")
    ok = a == b == c
    assert _report(8, "byte-identical CSV across runs and worker counts 1 vs 8", ok)


def test_criterion_9_protocol_conformance(tmp_path, small_portrait):
    def script(name, body):
        path = tmp_path / name
        path.write_text("#!/bin/sh\n" + body)
        path.chmod(path.stat().st_mode | stat.S_IEXEC)
        return str(path)

    doubler = script("ok_sr.sh", (
        'python3 -c "\n'
        "import sys\n"
        "import numpy as np\n"
        "from PIL import Image\n"
        "a = np.asarray(Image.open(sys.argv[1]))\n"
        "s = int(sys.argv[3])\n"
        "Image.fromarray(np.repeat(np.repeat(a, s, 0), s, 1)).save(sys.argv[2])\n"
        '" "$1" "$2" "$3"\n'))
    copier = script("wrong_sr.sh", 'cp "$1" "$2"\n')
    failer = script("fail.sh", 'echo doom >&2\nexit 7\n')
    sleeper = script("sleep.sh", "sleep 3\n")

    results = {}
    # SR: success, wrong dims, nonzero exit, timeout (with one retry)
    results["sr ok"] = upscale(
        small_portrait, SrBackendSpec("external", scale=2, command=doubler)
    ).image.width == small_portrait.width * 2
    with pytest.raises(ScaleContractViolated):
        upscale(small_portrait, SrBackendSpec("external", scale=2, command=copier))
    with pytest.raises(BackendFailed):
        upscale(small_portrait, SrBackendSpec("external", scale=2, command=failer))
    with pytest.raises(BackendTimeout):
        upscale(small_portrait, SrBackendSpec("external", scale=2, command=sleeper,
                                              timeout_s=0.25))

    # mask: success, wrong dims, nonzero exit, timeout
    half_mask = script("ok_mask.sh", (
        'python3 -c "\n'
        "import sys\n"
        "import numpy as np\n"
        "from PIL import Image\n"
        "w, h = Image.open(sys.argv[1]).size\n"
        "m = np.zeros((h, w), dtype=np.uint8)\n"
        "m[: h // 2] = 255\n"
        "Image.fromarray(m).save(sys.argv[2])\n"
        '" "$1" "$2"\n'))
    tiny_mask = script("wrong_mask.sh", (
        'python3 -c "\n'
        "import sys\n"
        "import numpy as np\n"
        "from PIL import Image\n"
        "Image.fromarray(np.zeros((3, 3), dtype=np.uint8)).save(sys.argv[2])\n"
        '" "$1" "$2"\n'))
    m = build_mask(small_portrait, MaskSource("external", command=half_mask))
    results["mask ok"] = bool(np.all(m.data[0] == 1.0) and np.all(m.data[-1] == 0.0))
    with pytest.raises(BackendFailed):
        build_mask(small_portrait, MaskSource("external", command=tiny_mask))
    with pytest.raises(BackendFailed):
        build_mask(small_portrait, MaskSource("external", command=failer))
    with pytest.raises(BackendFailed):
        build_mask(small_portrait, MaskSource("external", command=sleeper,
                                              timeout_s=0.25))

    # metric: success, nonzero exit, protocol garbage, timeout
    echo = script("ok_metric.sh", 'echo \'{"value": 1.5}\'\n')
    garbage = script("bad_metric.sh", "echo pancakes\n")
    reg = MetricRegistry()
    reg.register_external("lpips", echo)
    reg.register_external("fid", failer)
    reg.register_external("brisque", garbage)
    reg.register_external("sync_c", sleeper)
    results["metric ok"] = reg.compute_external("lpips", "a", "b").value == 1.5
    with pytest.raises(BackendFailed):
        reg.compute_external("fid", "a", "b")
    with pytest.raises(BackendProtocolError):
        reg.compute_external("brisque", "a", "b")
    with pytest.raises(BackendFailed):
        reg.compute_external("sync_c", "a", "b", timeout_s=0.25)

    ok = all(results.values())
    assert _report(9, "SR/mask/metric stubs hit every documented error path", ok)


def test_criterion_10_throughput_512():
    img = make_portrait(77, 512)
    params = PurifyParams()
    purify(img, params)  # warm-up: JIT compile + table caches
    start = time.perf_counter()
    purify(img, params)
    elapsed = time.perf_counter() - start
    ok = elapsed < 1.0
    assert _report(10, "512x512 purification under 1 s with built-in backends",
                   ok, f"{elapsed * 1000:.0f} ms")
