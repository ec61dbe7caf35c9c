import numpy as np
import pytest

from helpers import make_gray, make_portrait


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile/caching pass so timed tests measure steady state."""
    from purikit.metrics import ssim
    from purikit.transforms import LANCZOS3, jpeg_roundtrip, resample

    img = make_portrait(0, 32)
    jpeg_roundtrip(img, 75)
    jpeg_roundtrip(make_gray(0, 16), 90, "4:4:4")
    resample(img, 20, 20, LANCZOS3)
    ssim(img, img)


@pytest.fixture
def portrait():
    return make_portrait(1, 128)


@pytest.fixture
def small_portrait():
    return make_portrait(2, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
