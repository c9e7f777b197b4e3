"""Float-image containers and the low-level numeric kernels everything else builds on.

Pixel samples are float64 in [0,1]; 8-bit happens only at I/O boundaries.
Border handling is replicate-edge everywhere, and all operations are pure:
inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

# Below this gradient magnitude a pixel counts as degenerate and its angle is 0.
GRADIENT_EPS = 1e-12

# Rec. 601 luma weights, applied to nonlinear sRGB values.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class RasterError(ValueError):
    """Invalid argument to a raster operation."""


def _as_float2d(data: np.ndarray) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise RasterError(f"expected 2-D field data, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Row-major 2-D float field (edge maps, saliency, density, luminance...)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float2d(self.data)
        if not np.all(np.isfinite(arr)):
            raise RasterError("scalar field contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @staticmethod
    def full(width: int, height: int, value: float = 0.0) -> "ScalarField":
        return ScalarField(np.full((height, width), value, dtype=np.float64))

    def sample(self, x: float, y: float) -> float:
        """Value at the nearest pixel, clamped to bounds."""
        ix = min(max(int(math.floor(x + 0.5)), 0), self.width - 1)
        iy = min(max(int(math.floor(y + 0.5)), 0), self.height - 1)
        return float(self.data[iy, ix])


@dataclass(frozen=True)
class GradientField:
    """Per-pixel image derivatives, same dimensions as the source."""

    gx: ScalarField
    gy: ScalarField

    def __post_init__(self):
        if self.gx.data.shape != self.gy.data.shape:
            raise RasterError("gx and gy must share dimensions")

    @property
    def width(self) -> int:
        return self.gx.width

    @property
    def height(self) -> int:
        return self.gx.height


@dataclass(frozen=True)
class RasterImage:
    """Row-major float image, 1 (gray), 3 (RGB) or 4 (RGBA) channels, values in [0,1]."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3, 4):
            raise RasterError(f"image must be HxWxC with C in {{1,3,4}}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise RasterError("image contains non-finite samples")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise RasterError("image samples must lie in [0,1]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @staticmethod
    def full(width: int, height: int, color) -> "RasterImage":
        color = np.atleast_1d(np.asarray(color, dtype=np.float64))
        return RasterImage(np.broadcast_to(color, (height, width, color.size)).copy())

    def sample(self, x: float, y: float) -> np.ndarray:
        """Color at the nearest pixel, clamped to bounds."""
        ix = min(max(int(math.floor(x + 0.5)), 0), self.width - 1)
        iy = min(max(int(math.floor(y + 0.5)), 0), self.height - 1)
        return np.array(self.data[iy, ix])

    def rgb(self) -> np.ndarray:
        """HxWx3 view of the color channels (gray replicated, alpha dropped)."""
        if self.channels == 1:
            return np.repeat(self.data, 3, axis=2)
        return self.data[:, :, :3]


def clamp_image(data: np.ndarray) -> RasterImage:
    """Build a RasterImage from arbitrary finite float data, clipping into [0,1]."""
    return RasterImage(np.clip(data, 0.0, 1.0))


def convolve2d(image: ScalarField, kernel, border: str = "replicate") -> ScalarField:
    """Apply a small odd-sized kernel as a sliding stencil with replicate borders.

    The kernel is applied as written (cross-correlation, no flip), which is
    the convention the Sobel stencils below assume.
    """
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise RasterError(f"kernel must be odd-sized in both dimensions, got {k.shape}")
    if border != "replicate":
        raise RasterError(f"unsupported border policy: {border!r}")
    out = ndimage.correlate(image.data, k, mode="nearest")
    return ScalarField(out)


_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])
_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])


def sobel_gradients(image: ScalarField) -> GradientField:
    """Standard 3x3 Sobel derivatives with replicate borders.

    Evaluated separably (difference then smoothing) so constant images yield
    exactly zero gradients.
    """
    if image.width < 3 or image.height < 3:
        raise RasterError(f"image must be at least 3x3 for Sobel, got {image.width}x{image.height}")
    dx = ndimage.correlate1d(image.data, _SOBEL_DIFF, axis=1, mode="nearest")
    gx = ndimage.correlate1d(dx, _SOBEL_SMOOTH, axis=0, mode="nearest")
    dy = ndimage.correlate1d(image.data, _SOBEL_DIFF, axis=0, mode="nearest")
    gy = ndimage.correlate1d(dy, _SOBEL_SMOOTH, axis=1, mode="nearest")
    return GradientField(gx=ScalarField(gx), gy=ScalarField(gy))


def gradient_magnitude_and_angle(g: GradientField) -> tuple[ScalarField, ScalarField]:
    """Magnitude and two-argument arctangent angle in (-pi, pi].

    Pixels with magnitude below GRADIENT_EPS are degenerate and get angle 0.
    """
    mag = np.hypot(g.gx.data, g.gy.data)
    ang = np.arctan2(g.gy.data, g.gx.data)
    ang[mag < GRADIENT_EPS] = 0.0
    return ScalarField(mag), ScalarField(ang)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Unit-sum 1-D Gaussian with radius ceil(3*sigma)."""
    if sigma < 0:
        raise RasterError(f"sigma must be >= 0, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    if sigma == 0 or radius == 0:
        return np.array([1.0])
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def smooth_field(field: ScalarField, sigma: float) -> ScalarField:
    """Separable Gaussian blur of a scalar field, replicate borders."""
    k = gaussian_kernel1d(sigma)
    if k.size == 1:
        return field
    out = ndimage.correlate1d(field.data, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return ScalarField(out)


def gaussian_blur(image: RasterImage, sigma: float) -> RasterImage:
    """Gaussian blur with kernel radius ceil(3*sigma); sigma 0 is the identity."""
    if sigma < 0:
        raise RasterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return image
    k = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(image.data, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return clamp_image(out)


def luminance(image: RasterImage) -> ScalarField:
    """Gray passthrough; RGB(A) reduced with Rec. 601 weights, alpha ignored."""
    if image.channels == 1:
        return ScalarField(image.data[:, :, 0])
    if image.channels in (3, 4):
        r, g, b = LUMA_WEIGHTS
        # summation order chosen so the weights add to exactly 1.0 in float64
        lum = g * image.data[:, :, 1] + (r * image.data[:, :, 0] + b * image.data[:, :, 2])
        return ScalarField(lum)
    raise RasterError(f"unsupported channel count: {image.channels}")
