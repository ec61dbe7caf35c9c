import stat

import numpy as np
import pytest
from PIL import Image

from oracles import dense_gaussian_blur
from purikit.errors import BackendFailed, InvalidEllipse, MaskShapeMismatch
from purikit.imgcore import ImageF
from purikit.masking import (MaskSource, RegionMask, build_mask, complement,
                             default_feather_radius, feather)
from purikit.transforms.resample import gaussian_taps


@pytest.fixture
def canvas():
    return ImageF(np.full((3, 100, 100), 0.5))


def test_ellipse_inside_outside(canvas):
    mask = build_mask(canvas, MaskSource("ellipse", cx=0.5, cy=0.5, rx=0.35, ry=0.45))
    assert mask.data[50, 50] == 1.0
    assert mask.data[2, 2] == 0.0


def test_ellipse_mirror_symmetry(canvas):
    mask = build_mask(canvas, MaskSource("ellipse", cx=0.5, cy=0.4, rx=0.3, ry=0.2))
    assert np.array_equal(mask.data, mask.data[:, ::-1])


def test_invalid_ellipse():
    with pytest.raises(InvalidEllipse):
        MaskSource("ellipse", cx=0.5, cy=0.5, rx=0.0, ry=0.4)
    with pytest.raises(InvalidEllipse):
        MaskSource("ellipse", cx=1.5, cy=0.5, rx=0.3, ry=0.4)


def test_file_mask_all_white(canvas, tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.full((100, 100), 255, dtype=np.uint8), "L").save(path)
    mask = build_mask(canvas, MaskSource("file", path=str(path)))
    assert np.all(mask.data == 1.0)


def test_file_mask_values_scaled(canvas, tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.full((100, 100), 51, dtype=np.uint8), "L").save(path)
    mask = build_mask(canvas, MaskSource("file", path=str(path)))
    assert np.abs(mask.data - 0.2).max() < 1e-12


def test_file_mask_shape_mismatch(canvas, tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.zeros((50, 100), dtype=np.uint8), "L").save(path)
    with pytest.raises(MaskShapeMismatch):
        build_mask(canvas, MaskSource("file", path=str(path)))


def test_file_mask_rgb_rejected(canvas, tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.zeros((100, 100, 3), dtype=np.uint8), "RGB").save(path)
    with pytest.raises(MaskShapeMismatch):
        build_mask(canvas, MaskSource("file", path=str(path)))


def _stub(tmp_path, name, body):
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_external_mask_half_plane(canvas, tmp_path):
    # stub writes a left-half-white mask of matching size via python
    script = _stub(tmp_path, "seg.sh", (
        'python3 -c "\n'
        "import sys\n"
        "import numpy as np\n"
        "from PIL import Image\n"
        "inp, out = sys.argv[1], sys.argv[2]\n"
        "w, h = Image.open(inp).size\n"
        "m = np.zeros((h, w), dtype=np.uint8)\n"
        "m[:, : w // 2] = 255\n"
        "Image.fromarray(m).save(out)\n"
        '" "$1" "$2"\n'))
    mask = build_mask(canvas, MaskSource("external", command=script))
    assert np.all(mask.data[:, :50] == 1.0)
    assert np.all(mask.data[:, 50:] == 0.0)


def test_external_mask_wrong_dims(canvas, tmp_path):
    script = _stub(tmp_path, "bad.sh", (
        'python3 -c "\n'
        "import sys\n"
        "import numpy as np\n"
        "from PIL import Image\n"
        "Image.fromarray(np.zeros((10, 10), dtype=np.uint8)).save(sys.argv[2])\n"
        '" "$1" "$2"\n'))
    with pytest.raises(BackendFailed):
        build_mask(canvas, MaskSource("external", command=script))


def test_external_mask_nonzero_exit(canvas, tmp_path):
    script = _stub(tmp_path, "fail.sh", "exit 9\n")
    with pytest.raises(BackendFailed):
        build_mask(canvas, MaskSource("external", command=script))


def test_feather_radius_zero_identity():
    m = RegionMask(np.random.default_rng(0).random((20, 20)))
    out = feather(m, 0)
    assert out is m


def test_feather_all_ones_stays_ones():
    m = RegionMask(np.ones((32, 32)))
    for radius in (1, 4, 9):
        out = feather(m, radius)
        assert np.all(out.data == 1.0)


def test_feather_half_plane_monotone_and_matches_oracle():
    data = np.zeros((24, 24))
    data[:, 12:] = 1.0
    m = RegionMask(data)
    out = feather(m, 4)
    # strictly monotone non-decreasing along each row
    assert np.all(np.diff(out.data, axis=1) >= -1e-12)
    offsets, w = gaussian_taps(2.0)
    want = dense_gaussian_blur(data, offsets, w)
    assert np.abs(out.data - want).max() < 1e-5


def test_feather_preserves_interior_mean():
    data = np.zeros((64, 64))
    data[24:40, 24:40] = 1.0  # well inside, far from edges
    m = RegionMask(data)
    out = feather(m, 4)
    assert abs(out.data.mean() - data.mean()) < 1e-3


def test_complement():
    m = RegionMask(np.full((5, 5), 0.3))
    c = complement(m)
    assert np.abs(c.data - 0.7).max() < 1e-12
    assert np.abs(complement(c).data - m.data).max() < 1e-15
    assert np.abs(m.data + c.data - 1.0).max() < 1e-7
    dyadic = RegionMask(np.full((4, 4), 0.25))
    assert np.array_equal(complement(complement(dyadic)).data, dyadic.data)
    ones = RegionMask(np.ones((4, 4)))
    assert np.all(complement(ones).data == 0.0)


def test_built_masks_in_range(canvas):
    for src in (MaskSource("ellipse"), MaskSource("ellipse", cx=0.9, cy=0.9, rx=0.2, ry=0.2)):
        m = build_mask(canvas, src)
        assert m.data.min() >= 0.0 and m.data.max() <= 1.0
        f = feather(m, 5)
        assert f.data.min() >= 0.0 and f.data.max() <= 1.0


def test_default_feather_radius():
    assert default_feather_radius(128) == 2
    assert default_feather_radius(512) == 8
    assert default_feather_radius(40) == 2
