"""Classical multi-layer painterly rendering.

Coarse-to-fine layers of brush strokes traced perpendicular to image
gradients, each layer painting only where the canvas still differs from a
blurred reference. Optional tone quantization runs first. Four brush models:
curved (disc stamps), triangle, rectangle, and random raster (dropout discs).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .raster import (
    GRADIENT_EPS,
    GradientField,
    RasterError,
    RasterImage,
    gaussian_blur,
    luminance,
    sobel_gradients,
)
from .strokes import ccw_vertices, polygon_coverage

RANDOM_RASTER_KEEP = 0.7


class BrushModel(enum.Enum):
    CURVED = "curved"
    TRIANGLE = "triangle"
    RECTANGLE = "rectangle"
    RANDOM_RASTER = "random_raster"


@dataclass(frozen=True)
class LayerSpec:
    """One rendering layer: brush radius, repaint threshold, grid spacing."""

    radius: float
    error_threshold: float = 0.1
    grid_step_factor: float = 1.0

    def __post_init__(self):
        if self.radius < 1:
            raise RasterError(f"layer radius must be >= 1, got {self.radius}")
        if self.error_threshold < 0:
            raise RasterError("error_threshold must be >= 0")
        if self.grid_step_factor <= 0:
            raise RasterError("grid_step_factor must be > 0")


@dataclass(frozen=True)
class PainterlyConfig:
    layers: tuple[LayerSpec, ...] = (LayerSpec(8.0), LayerSpec(4.0), LayerSpec(2.0))
    quantize_levels: int | None = None
    max_stroke_len: int = 16
    min_stroke_len: int = 4
    opacity: float = 1.0
    curvature_filter: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise RasterError("at least one layer is required")
        radii = [spec.radius for spec in layers]
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise RasterError("layer radii must be strictly decreasing (coarse to fine)")
        if self.min_stroke_len > self.max_stroke_len:
            raise RasterError("min_stroke_len must be <= max_stroke_len")
        if self.min_stroke_len < 1:
            raise RasterError("min_stroke_len must be >= 1")
        if not 0.0 <= self.opacity <= 1.0:
            raise RasterError("opacity must lie in [0,1]")
        if not 0.0 <= self.curvature_filter <= 1.0:
            raise RasterError("curvature_filter must lie in [0,1]")
        if self.quantize_levels is not None and self.quantize_levels < 2:
            raise RasterError("quantize_levels must be >= 2")


@dataclass(frozen=True)
class PaintStroke:
    """A traced polyline stroke: control points, paint color, brush radius."""

    points: tuple[tuple[float, float], ...]
    color: tuple[float, ...]
    radius: float
    layer: int
    seed: tuple[int, int]


def quantize_tones(image: RasterImage, n: int) -> RasterImage:
    """Round every channel to n evenly spaced levels (half rounds up)."""
    if n < 2:
        raise RasterError(f"quantization levels must be >= 2, got {n}")
    levels = float(n - 1)
    out = np.floor(image.data * levels + 0.5) / levels
    return RasterImage(out)


def _color_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(((a - b) ** 2).sum(axis=-1))


def trace_curved_stroke(
    start: tuple[float, float],
    reference: RasterImage,
    canvas: RasterImage | None,
    gradients: GradientField,
    spec: LayerSpec,
    config: PainterlyConfig,
) -> PaintStroke:
    """Trace one stroke spine from ``start`` perpendicular to the gradient.

    The stroke carries the reference color at its start. Control points
    advance in radius-length steps; direction continuity is kept by flipping
    when a turn exceeds 90 degrees, and ``curvature_filter`` exponentially
    smooths the direction. Tracing stops at ``max_stroke_len`` points, at the
    image border, and (once ``min_stroke_len`` is reached) on vanishing
    gradients or when the canvas already matches the reference better than
    the stroke color would. ``canvas=None`` means the canvas is undefined
    (first layer) and the canvas test is skipped.
    """
    w, h = reference.width, reference.height
    x, y = float(start[0]), float(start[1])
    color = reference.sample(x, y)
    points = [(x, y)]
    last_dx = last_dy = None
    fc = config.curvature_filter
    while len(points) < config.max_stroke_len:
        gx = gradients.gx.sample(x, y)
        gy = gradients.gy.sample(x, y)
        mag = math.hypot(gx, gy)
        if len(points) >= config.min_stroke_len:
            if mag < GRADIENT_EPS:
                break
            if canvas is not None:
                ref_c = reference.sample(x, y)
                canvas_err = float(np.linalg.norm(ref_c - canvas.sample(x, y)))
                stroke_err = float(np.linalg.norm(ref_c - color))
                if canvas_err < stroke_err:
                    break
        if mag < GRADIENT_EPS:
            dx, dy = 0.0, 1.0  # degenerate gradient: angle-0 convention + 90 deg
        else:
            dx, dy = -gy / mag, gx / mag
        if last_dx is not None:
            if dx * last_dx + dy * last_dy < 0:
                dx, dy = -dx, -dy
            dx = fc * dx + (1.0 - fc) * last_dx
            dy = fc * dy + (1.0 - fc) * last_dy
            norm = math.hypot(dx, dy)
            if norm < GRADIENT_EPS:
                break
            dx /= norm
            dy /= norm
        nx = x + spec.radius * dx
        ny = y + spec.radius * dy
        if not (0.0 <= nx <= w - 1 and 0.0 <= ny <= h - 1):
            break
        x, y = nx, ny
        points.append((x, y))
        last_dx, last_dy = dx, dy
    return PaintStroke(
        points=tuple(points),
        color=tuple(float(c) for c in color),
        radius=float(spec.radius),
        layer=0,
        seed=(int(math.floor(start[0] + 0.5)), int(math.floor(start[1] + 0.5))),
    )


def _disc_coverage(px: float, py: float, radius: float, w: int, h: int):
    """Anti-aliased disc coverage block: (x0, y0, coverage array)."""
    r = radius
    x0 = max(0, int(math.floor(px - r - 1)))
    x1 = min(w - 1, int(math.ceil(px + r + 1)))
    y0 = max(0, int(math.floor(py - r - 1)))
    y1 = min(h - 1, int(math.ceil(py + r + 1)))
    if x1 < x0 or y1 < y0:
        return x0, y0, np.zeros((0, 0))
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    dist = np.hypot(xs[np.newaxis, :] - px, ys[:, np.newaxis] - py)
    cov = np.clip(r + 0.5 - dist, 0.0, 1.0)
    return x0, y0, cov


def _composite_stamp(data: np.ndarray, x0: int, y0: int, cov: np.ndarray, color, opacity: float):
    if cov.size == 0:
        return
    h, w = cov.shape
    block = data[y0 : y0 + h, x0 : x0 + w]
    alpha = (opacity * cov)[:, :, np.newaxis]
    blockdata = block * (1.0 - alpha) + np.asarray(color) * alpha
    data[y0 : y0 + h, x0 : x0 + w] = blockdata


def _stamp_direction(points: tuple, idx: int) -> tuple[float, float]:
    if len(points) == 1:
        return 0.0, 1.0
    if idx == 0:
        ax, ay = points[0]
        bx, by = points[1]
    else:
        ax, ay = points[idx - 1]
        bx, by = points[idx]
    ex, ey = bx - ax, by - ay
    norm = math.hypot(ex, ey)
    if norm == 0:
        return 0.0, 1.0
    return ex / norm, ey / norm


def render_paint_stroke(
    data: np.ndarray, stroke: PaintStroke, brush: BrushModel, opacity: float, rng_seed: int
):
    """Stamp the brush footprint at every control point, compositing in place.

    All stamp geometries are inscribed in the brush radius, so painted pixels
    stay within radius + 1 px of a control point.
    """
    h, w = data.shape[:2]
    r = stroke.radius
    for idx, (px, py) in enumerate(stroke.points):
        if brush in (BrushModel.CURVED, BrushModel.RANDOM_RASTER):
            x0, y0, cov = _disc_coverage(px, py, r, w, h)
            if brush is BrushModel.RANDOM_RASTER and cov.size:
                rng = np.random.default_rng(
                    [rng_seed, stroke.layer, stroke.seed[1], stroke.seed[0], idx]
                )
                keep = rng.random(cov.shape) < RANDOM_RASTER_KEEP
                cov = cov * keep
        else:
            dx, dy = _stamp_direction(stroke.points, idx)
            nx, ny = -dy, dx
            if brush is BrushModel.RECTANGLE:
                a, b = 0.9 * r, 0.44 * r  # half-extents; corners inside radius r
                verts = np.array(
                    [
                        (px - a * dx - b * nx, py - a * dy - b * ny),
                        (px + a * dx - b * nx, py + a * dy - b * ny),
                        (px + a * dx + b * nx, py + a * dy + b * ny),
                        (px - a * dx + b * nx, py - a * dy + b * ny),
                    ]
                )
            else:  # triangle pointing along the travel direction
                verts = np.array(
                    [
                        (px + r * dx, py + r * dy),
                        (px - 0.8 * r * dx + 0.6 * r * nx, py - 0.8 * r * dy + 0.6 * r * ny),
                        (px - 0.8 * r * dx - 0.6 * r * nx, py - 0.8 * r * dy - 0.6 * r * ny),
                    ]
                )
            x0, y0, cov = polygon_coverage(ccw_vertices(verts), w, h)
        _composite_stamp(data, x0, y0, cov, stroke.color, opacity)


def layer_error_map(canvas: RasterImage, reference: RasterImage) -> np.ndarray:
    """Per-pixel Euclidean color distance between canvas and reference."""
    return _color_distance(canvas.data, reference.data)


def paint_layer(
    canvas: RasterImage | None,
    reference: RasterImage,
    spec: LayerSpec,
    brush: BrushModel,
    config: PainterlyConfig,
    layer_index: int = 0,
) -> tuple[RasterImage, list[PaintStroke]]:
    """Paint one layer onto the canvas, returning the new canvas and strokes.

    Grid cells of size grid_step_factor * radius are repainted when their mean
    canvas/reference color distance exceeds the layer threshold, seeding each
    stroke at the cell's max-error pixel. A ``None`` canvas means the first
    layer: it is initialized from the reference and every cell is painted,
    seeded at cell centers. Strokes composite in seeded-shuffle order.
    """
    first_layer = canvas is None
    if first_layer:
        canvas = reference
    if canvas.data.shape != reference.data.shape:
        raise RasterError("canvas and reference must share dimensions")
    w, h = reference.width, reference.height
    step = max(1, int(round(spec.grid_step_factor * spec.radius)))
    error = None if first_layer else layer_error_map(canvas, reference)
    gradients = sobel_gradients(luminance(reference))

    strokes: list[PaintStroke] = []
    for y0 in range(0, h, step):
        for x0 in range(0, w, step):
            y1 = min(y0 + step, h)
            x1 = min(x0 + step, w)
            if first_layer:
                sx = x0 + (x1 - 1 - x0) // 2
                sy = y0 + (y1 - 1 - y0) // 2
            else:
                cell = error[y0:y1, x0:x1]
                if cell.mean() <= spec.error_threshold:
                    continue
                flat = int(np.argmax(cell))
                sy, sx = divmod(flat, x1 - x0)
                sy += y0
                sx += x0
            stroke = trace_curved_stroke(
                (float(sx), float(sy)),
                reference,
                None if first_layer else canvas,
                gradients,
                spec,
                config,
            )
            strokes.append(
                PaintStroke(
                    points=stroke.points,
                    color=stroke.color,
                    radius=stroke.radius,
                    layer=layer_index,
                    seed=(sx, sy),
                )
            )

    order = np.random.default_rng([config.rng_seed, layer_index]).permutation(len(strokes))
    data = np.array(canvas.data)
    for i in order:
        render_paint_stroke(data, strokes[int(i)], brush, config.opacity, config.rng_seed)
    painted = [strokes[int(i)] for i in order]
    return RasterImage(np.clip(data, 0.0, 1.0)), painted


def render_painterly(
    image: RasterImage, config: PainterlyConfig, brush: BrushModel = BrushModel.CURVED
) -> tuple[RasterImage, list[PaintStroke]]:
    """Full layered painterly render: optional quantization, then each layer
    painted against a reference blurred at its own radius."""
    if image.channels == 4:
        image = RasterImage(image.data[:, :, :3])
    reference_base = (
        quantize_tones(image, config.quantize_levels) if config.quantize_levels else image
    )
    canvas: RasterImage | None = None
    all_strokes: list[PaintStroke] = []
    for layer_index, spec in enumerate(config.layers):
        blurred = gaussian_blur(reference_base, float(spec.radius))
        canvas, strokes = paint_layer(canvas, blurred, spec, brush, config, layer_index)
        all_strokes.extend(strokes)
    return canvas, all_strokes
