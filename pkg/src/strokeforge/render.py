"""Stroke rasterization, ordered compositing and post-processing.

Strokes are swept as anti-aliased brush footprints and composited
source-over in a controlled order (ascending priority by default), then the
canvas is optionally denoised, edge-enhanced and color-harmonized.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .painterly import BrushModel
from .raster import RasterError, RasterImage, gaussian_blur
from .strokes import Stroke, capsule_coverage, ccw_vertices, polygon_coverage

RANDOM_RASTER_KEEP = 0.7
STIPPLE_KEEP = 0.6
DENOISE_RANGE_SIGMA = 0.1
EDGE_ENHANCE_BLUR_SIGMA = 1.5


@dataclass(frozen=True)
class PostProcessing:
    """Optional post passes; None disables a pass."""

    denoise_radius: float | None = None
    edge_enhance_amount: float | None = None
    harmonize_strength: float | None = None

    def __post_init__(self):
        if self.denoise_radius is not None and self.denoise_radius < 0:
            raise RasterError("denoise radius must be >= 0")
        if self.edge_enhance_amount is not None and not math.isfinite(self.edge_enhance_amount):
            raise RasterError("edge_enhance amount must be finite")
        if self.harmonize_strength is not None and not 0.0 <= self.harmonize_strength <= 1.0:
            raise RasterError("harmonize strength must lie in [0,1]")


@dataclass(frozen=True)
class RenderOptions:
    background: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    order_policy: str = "priority_ascending"
    post: PostProcessing = PostProcessing()

    def __post_init__(self):
        if len(self.background) != 4 or any(not 0.0 <= c <= 1.0 for c in self.background):
            raise RasterError("background must be RGBA in [0,1]")
        if self.order_policy not in ("priority_ascending", "input_order"):
            raise RasterError(f"unknown order policy {self.order_policy!r}")


def _stroke_rng_seed(stroke: Stroke) -> int:
    """Stable dropout seed derived from the stroke's geometry bits."""
    packed = struct.pack(
        "<6d", stroke.x, stroke.y, stroke.orientation, stroke.length, stroke.size, stroke.thickness
    )
    return zlib.crc32(packed)


def _texture_mask(x0: int, y0: int, shape: tuple[int, int], texture: str) -> np.ndarray | None:
    if texture == "solid":
        return None
    h, w = shape
    xs = np.arange(x0, x0 + w, dtype=np.uint32)
    ys = np.arange(y0, y0 + h, dtype=np.uint32)
    gx, gy = np.meshgrid(xs, ys)
    if texture == "stipple":
        hashed = (gx * np.uint32(2654435761) + gy * np.uint32(2246822519)) ^ (gy >> np.uint32(3))
        return (hashed.astype(np.float64) / 4294967296.0 < STIPPLE_KEEP).astype(np.float64)
    # hatch: diagonal bands, faint between strokes of the pattern
    band = ((gx.astype(np.int64) + gy.astype(np.int64)) % 4 < 2).astype(np.float64)
    return 0.25 + 0.75 * band


def _stroke_coverage(stroke: Stroke, brush: BrushModel, width: int, height: int):
    a, b = stroke.spine()
    if brush is BrushModel.CURVED or brush is BrushModel.RANDOM_RASTER:
        x0, y0, cov = capsule_coverage(a, b, stroke.size, width, height)
        if brush is BrushModel.RANDOM_RASTER and cov.size:
            rng = np.random.default_rng(_stroke_rng_seed(stroke))
            cov = cov * (rng.random(cov.shape) < RANDOM_RASTER_KEEP)
        return x0, y0, cov
    dx = math.cos(stroke.orientation)
    dy = math.sin(stroke.orientation)
    nx, ny = -dy, dx
    hl = max(stroke.length / 2.0, 0.25)
    ht = stroke.thickness / 2.0
    if brush is BrushModel.RECTANGLE:
        verts = np.array(
            [
                (a[0] - ht * nx, a[1] - ht * ny),
                (b[0] - ht * nx, b[1] - ht * ny),
                (b[0] + ht * nx, b[1] + ht * ny),
                (a[0] + ht * nx, a[1] + ht * ny),
            ]
        )
        if stroke.length == 0.0:
            verts = np.array(
                [
                    (stroke.x - hl * dx - ht * nx, stroke.y - hl * dy - ht * ny),
                    (stroke.x + hl * dx - ht * nx, stroke.y + hl * dy - ht * ny),
                    (stroke.x + hl * dx + ht * nx, stroke.y + hl * dy + ht * ny),
                    (stroke.x - hl * dx + ht * nx, stroke.y - hl * dy + ht * ny),
                ]
            )
    else:  # triangle: tip forward, base behind
        verts = np.array(
            [
                (stroke.x + hl * dx, stroke.y + hl * dy),
                (stroke.x - hl * dx + ht * nx, stroke.y - hl * dy + ht * ny),
                (stroke.x - hl * dx - ht * nx, stroke.y - hl * dy - ht * ny),
            ]
        )
    return polygon_coverage(ccw_vertices(verts), width, height)


def _composite_block(data: np.ndarray, x0: int, y0: int, alpha: np.ndarray, rgb) -> None:
    """Source-over composite of a constant color block, in place."""
    if alpha.size == 0:
        return
    h, w = alpha.shape
    block = data[y0 : y0 + h, x0 : x0 + w]
    a_s = alpha[:, :, np.newaxis]
    src = np.asarray(rgb, dtype=np.float64)
    if data.shape[2] == 4:
        a_d = block[:, :, 3:4]
        out_a = a_s + a_d * (1.0 - a_s)
        safe = np.where(out_a > 0.0, out_a, 1.0)
        out_rgb = (a_s * src + block[:, :, :3] * a_d * (1.0 - a_s)) / safe
        out_rgb = np.where(out_a > 0.0, out_rgb, 0.0)
        block[:, :, :3] = np.clip(out_rgb, 0.0, 1.0)
        block[:, :, 3:4] = np.clip(out_a, 0.0, 1.0)
    else:
        out = a_s * src + block * (1.0 - a_s)
        block[:] = np.clip(out, 0.0, 1.0)


def rasterize_stroke(canvas: RasterImage, stroke: Stroke, brush: BrushModel = BrushModel.CURVED) -> RasterImage:
    """Composite one stroke onto a copy of the canvas.

    The footprint is the brush geometry swept along the oriented spine
    (curved and random-raster read the size radius, rectangle and triangle
    the thickness), anti-aliased by coverage fraction, composited
    source-over with the stroke's alpha. A fully transparent stroke returns
    the canvas unchanged.
    """
    if canvas.channels not in (3, 4):
        raise RasterError("stroke rendering needs an RGB or RGBA canvas")
    if stroke.opacity == 0.0:
        return canvas
    data = np.array(canvas.data)
    _rasterize_into(data, stroke, brush)
    return RasterImage(data)


def _rasterize_into(data: np.ndarray, stroke: Stroke, brush: BrushModel) -> None:
    h, w = data.shape[:2]
    x0, y0, cov = _stroke_coverage(stroke, brush, w, h)
    if cov.size == 0:
        return
    mask = _texture_mask(x0, y0, cov.shape, stroke.texture)
    if mask is not None:
        cov = cov * mask
    _composite_block(data, x0, y0, cov * stroke.opacity, stroke.color[:3])


def render_sequence(
    strokes: list[Stroke],
    dims: tuple[int, int],
    options: RenderOptions = RenderOptions(),
    brush: BrushModel = BrushModel.CURVED,
) -> RasterImage:
    """Fill the background, composite strokes in policy order, post-process."""
    width, height = dims
    canvas = np.empty((height, width, 4), dtype=np.float64)
    canvas[:, :] = np.asarray(options.background, dtype=np.float64)
    ordered = strokes
    if options.order_policy == "priority_ascending":
        ordered = sorted(strokes, key=lambda s: s.priority)
    for stroke in ordered:
        if stroke.opacity == 0.0:
            continue
        _rasterize_into(canvas, stroke, brush)
    return post_process(RasterImage(canvas), options.post)


def _bilateral(data: np.ndarray, radius: float) -> np.ndarray:
    if radius <= 0:
        return data
    half = int(math.ceil(2.0 * radius))
    padded = np.pad(data, ((half, half), (half, half), (0, 0)), mode="edge")
    h, w = data.shape[:2]
    acc = np.zeros_like(data)
    norm = np.zeros((h, w, 1))
    inv_sp = -1.0 / (2.0 * radius * radius)
    inv_rg = -1.0 / (2.0 * DENOISE_RANGE_SIGMA * DENOISE_RANGE_SIGMA)
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            shifted = padded[half + dy : half + dy + h, half + dx : half + dx + w]
            w_s = math.exp((dx * dx + dy * dy) * inv_sp)
            color_d2 = ((shifted - data) ** 2).sum(axis=-1, keepdims=True)
            weight = w_s * np.exp(color_d2 * inv_rg)
            acc += weight * shifted
            norm += weight
    return acc / norm


def _harmonize(rgb: np.ndarray, strength: float) -> np.ndarray:
    """Pull opponent-axis chroma toward the image mean, keeping (R+G+B)/3."""
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    lum = (r + g + b) / 3.0
    c1 = r - g
    c2 = b - (r + g) / 2.0
    c1 = c1 + strength * (c1.mean() - c1)
    c2 = c2 + strength * (c2.mean() - c2)
    s = 2.0 * lum - (2.0 / 3.0) * c2
    out = np.empty_like(rgb)
    out[:, :, 0] = (s + c1) / 2.0
    out[:, :, 1] = (s - c1) / 2.0
    out[:, :, 2] = 3.0 * lum - s
    return out


def post_process(image: RasterImage, options: PostProcessing = PostProcessing()) -> RasterImage:
    """Apply the configured passes in fixed order: denoise, sharpen, harmonize."""
    data = np.array(image.data)
    color_ch = 3 if image.channels >= 3 else 1
    if options.denoise_radius is not None and options.denoise_radius > 0:
        data[:, :, :color_ch] = _bilateral(data[:, :, :color_ch], options.denoise_radius)
    if options.edge_enhance_amount is not None and options.edge_enhance_amount != 0.0:
        blurred = gaussian_blur(
            RasterImage(np.clip(data[:, :, :color_ch], 0.0, 1.0)), EDGE_ENHANCE_BLUR_SIGMA
        ).data
        sharp = data[:, :, :color_ch] + options.edge_enhance_amount * (
            data[:, :, :color_ch] - blurred
        )
        data[:, :, :color_ch] = np.clip(sharp, 0.0, 1.0)
    if (
        options.harmonize_strength is not None
        and options.harmonize_strength > 0
        and image.channels >= 3
    ):
        data[:, :, :3] = _harmonize(data[:, :, :3], options.harmonize_strength)
    return RasterImage(np.clip(data, 0.0, 1.0))
