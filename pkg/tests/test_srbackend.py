import stat

import numpy as np
import pytest

from purikit.errors import (BackendFailed, BackendTimeout,
                            ScaleContractViolated, ScaleMismatch)
from purikit.imgcore import ImageF
from purikit.srbackend import (IDENTITY_SR, SrBackendSpec, upscale,
                               validate_pipeline_scales)
from purikit.transforms import LANCZOS3, resample


def _script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


NEAREST_DOUBLER = (
    'python3 -c "\n'
    "import sys\n"
    "import numpy as np\n"
    "from PIL import Image\n"
    "inp, out, scale = sys.argv[1], sys.argv[2], int(sys.argv[3])\n"
    "a = np.asarray(Image.open(inp))\n"
    "a = np.repeat(np.repeat(a, scale, axis=0), scale, axis=1)\n"
    "Image.fromarray(a).save(out)\n"
    '" "$1" "$2" "$3"\n')


def test_identity_returns_input(small_portrait):
    res = upscale(small_portrait, IDENTITY_SR)
    assert res.image is small_portrait
    assert res.elapsed_s >= 0.0


def test_identity_requires_scale_one():
    with pytest.raises(ValueError):
        SrBackendSpec("identity", scale=2)


def test_interp_constant_partition_of_unity():
    img = ImageF(np.full((3, 9, 7), 0.42))
    res = upscale(img, SrBackendSpec("interp", scale=2, kernel=LANCZOS3))
    assert (res.image.width, res.image.height) == (14, 18)
    assert np.abs(res.image.data - 0.42).max() < 1e-6


def test_interp_equals_resample(small_portrait):
    spec = SrBackendSpec("interp", scale=2, kernel=LANCZOS3)
    got = upscale(small_portrait, spec).image
    want = resample(small_portrait, small_portrait.width * 2,
                    small_portrait.height * 2, LANCZOS3)
    assert np.array_equal(got.data, want.data)


def test_validate_pipeline_scales():
    two = SrBackendSpec("interp", scale=2)
    validate_pipeline_scales(two, two, 2)
    validate_pipeline_scales(IDENTITY_SR, IDENTITY_SR, 1)
    with pytest.raises(ScaleMismatch) as exc:
        validate_pipeline_scales(SrBackendSpec("interp", scale=4), two, 2)
    assert exc.value.role == "face"
    assert exc.value.expected == 2
    assert exc.value.actual == 4
    with pytest.raises(ScaleMismatch) as exc:
        validate_pipeline_scales(two, SrBackendSpec("interp", scale=3), 2)
    assert exc.value.role == "general"


def test_external_doubler_accepted(small_portrait, tmp_path):
    cmd = _script(tmp_path, "double.sh", NEAREST_DOUBLER)
    spec = SrBackendSpec("external", scale=2, command=cmd)
    res = upscale(small_portrait, spec)
    assert (res.image.width, res.image.height) == (128, 128)
    # nearest-neighbor replication of the u8 rendering
    u8 = np.floor(small_portrait.data * 255 + 0.5)
    want = np.repeat(np.repeat(u8, 2, axis=1), 2, axis=2) / 255.0
    assert np.abs(res.image.data - want).max() < 1e-12


def test_external_wrong_size_violates_contract(small_portrait, tmp_path):
    body = (
        'python3 -c "\n'
        "import sys, shutil\n"
        "shutil.copyfile(sys.argv[1], sys.argv[2])\n"
        '" "$1" "$2"\n')
    cmd = _script(tmp_path, "copy.sh", body)
    spec = SrBackendSpec("external", scale=2, command=cmd)
    with pytest.raises(ScaleContractViolated):
        upscale(small_portrait, spec)


def test_external_nonzero_exit(small_portrait, tmp_path):
    cmd = _script(tmp_path, "fail.sh", 'echo "no weights" >&2\nexit 2\n')
    spec = SrBackendSpec("external", scale=2, command=cmd)
    with pytest.raises(BackendFailed) as exc:
        upscale(small_portrait, spec)
    assert "no weights" in exc.value.stderr


def test_external_timeout_retries_once(small_portrait, tmp_path):
    counter = tmp_path / "count"
    body = f'echo x >> {counter}\nsleep 5\n'
    cmd = _script(tmp_path, "slow.sh", body)
    spec = SrBackendSpec("external", scale=2, command=cmd, timeout_s=0.3)
    with pytest.raises(BackendTimeout):
        upscale(small_portrait, spec)
    assert counter.read_text().count("x") == 2  # original try + one retry


def test_external_cache(small_portrait, tmp_path):
    counter = tmp_path / "count"
    body = f'echo x >> {counter}\n' + NEAREST_DOUBLER
    cmd = _script(tmp_path, "counting.sh", body)
    cache = tmp_path / "cache"
    spec = SrBackendSpec("external", scale=2, command=cmd, cache_dir=str(cache))
    first = upscale(small_portrait, spec).image
    second = upscale(small_portrait, spec).image
    assert counter.read_text().count("x") == 1  # second call served from cache
    assert np.array_equal(first.data, second.data)
    # different input bytes -> different key -> backend runs again
    other = ImageF(np.clip(small_portrait.data * 0.9, 0, 1))
    upscale(other, spec)
    assert counter.read_text().count("x") == 2
