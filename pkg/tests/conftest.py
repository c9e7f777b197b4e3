import numpy as np
import pytest

from strokeforge.imgio import png_bytes, save_png
from strokeforge.raster import RasterImage


def synthetic_photo(seed: int, size: int = 48) -> RasterImage:
    """Deterministic photo-like fixture: gradients, a disc, mild noise."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    data = np.zeros((size, size, 3))
    data[:, :, 0] = xx / (size - 1)
    data[:, :, 1] = yy / (size - 1)
    data[:, :, 2] = 0.4
    cx, cy, r = (
        int(rng.integers(size // 4, 3 * size // 4)),
        int(rng.integers(size // 4, 3 * size // 4)),
        size // 6,
    )
    disc = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    data[disc] = rng.random(3)
    data += rng.normal(0.0, 0.02, data.shape)
    return RasterImage(np.clip(data, 0.0, 1.0))


@pytest.fixture
def photo():
    return synthetic_photo(99)


@pytest.fixture
def photo_path(tmp_path):
    path = tmp_path / "photo.png"
    save_png(synthetic_photo(99), str(path))
    return str(path)


@pytest.fixture
def photo_bytes():
    return png_bytes(synthetic_photo(99))
