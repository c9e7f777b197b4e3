"""The parametric brush stroke and its footprint geometry.

A stroke is a straight oriented spine (anchor, orientation, length) with a
width, color, texture and planning metadata. The planning-side footprint is
the anti-aliased capsule of radius thickness/2 around the spine; brush models
reinterpret the geometry at render time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .raster import RasterError

TEXTURES = ("solid", "stipple", "hatch")

MIN_THICKNESS = 1e-3


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.remainder(float(theta), 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    return t


@dataclass(frozen=True)
class Stroke:
    """One renderable stroke with the six artistic attributes plus metadata.

    ``color`` is RGBA with opacity stored as alpha; ``size`` is the brush
    radius; ``weight`` and ``priority`` carry planning scores.
    """

    x: float
    y: float
    orientation: float
    length: float
    thickness: float
    color: tuple[float, float, float, float]
    texture: str = "solid"
    size: float = 4.0
    weight: float = 0.0
    priority: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "orientation", normalize_angle(self.orientation))
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))
        if self.length < 0:
            raise RasterError(f"stroke length must be >= 0, got {self.length}")
        if self.thickness <= 0:
            raise RasterError(f"stroke thickness must be > 0, got {self.thickness}")
        if self.size <= 0:
            raise RasterError(f"stroke size must be > 0, got {self.size}")
        if len(self.color) != 4:
            raise RasterError("stroke color must be RGBA")
        if any(not 0.0 <= c <= 1.0 for c in self.color):
            raise RasterError("stroke color components must lie in [0,1]")
        if self.texture not in TEXTURES:
            raise RasterError(f"unknown texture {self.texture!r}")

    @property
    def anchor(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def opacity(self) -> float:
        return self.color[3]

    def with_fields(self, **kwargs) -> "Stroke":
        return replace(self, **kwargs)

    def spine(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Endpoints of the oriented spine segment centered on the anchor."""
        dx = math.cos(self.orientation) * self.length / 2.0
        dy = math.sin(self.orientation) * self.length / 2.0
        return ((self.x - dx, self.y - dy), (self.x + dx, self.y + dy))


def segment_distance(
    px: np.ndarray, py: np.ndarray, a: tuple[float, float], b: tuple[float, float]
) -> np.ndarray:
    """Distance from grid points to the segment ab."""
    ax, ay = a
    bx, by = b
    ex, ey = bx - ax, by - ay
    seg2 = ex * ex + ey * ey
    if seg2 == 0.0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * ex + (py - ay) * ey) / seg2, 0.0, 1.0)
    return np.hypot(px - (ax + t * ex), py - (ay + t * ey))


def capsule_coverage(
    a: tuple[float, float], b: tuple[float, float], radius: float, width: int, height: int
):
    """Anti-aliased capsule coverage: returns (x0, y0, coverage block)."""
    r = radius + 1.0
    x0 = max(0, int(math.floor(min(a[0], b[0]) - r)))
    x1 = min(width - 1, int(math.ceil(max(a[0], b[0]) + r)))
    y0 = max(0, int(math.floor(min(a[1], b[1]) - r)))
    y1 = min(height - 1, int(math.ceil(max(a[1], b[1]) + r)))
    if x1 < x0 or y1 < y0:
        return 0, 0, np.zeros((0, 0))
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    dist = segment_distance(gx, gy, a, b)
    cov = np.clip(radius + 0.5 - dist, 0.0, 1.0)
    return x0, y0, cov


def polygon_coverage(vertices: np.ndarray, width: int, height: int):
    """Anti-aliased convex-polygon coverage via signed edge distances.

    Vertices must wind counter-clockwise in pixel space (y down).
    Returns (x0, y0, coverage block).
    """
    minx = max(0, int(math.floor(vertices[:, 0].min() - 1)))
    maxx = min(width - 1, int(math.ceil(vertices[:, 0].max() + 1)))
    miny = max(0, int(math.floor(vertices[:, 1].min() - 1)))
    maxy = min(height - 1, int(math.ceil(vertices[:, 1].max() + 1)))
    if maxx < minx or maxy < miny:
        return 0, 0, np.zeros((0, 0))
    xs = np.arange(minx, maxx + 1, dtype=np.float64)
    ys = np.arange(miny, maxy + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    signed = np.full(gx.shape, -np.inf)
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        norm = math.hypot(ex, ey)
        if norm == 0:
            continue
        d = ((gx - ax) * ey - (gy - ay) * ex) / norm
        signed = np.maximum(signed, d)
    cov = np.clip(0.5 - signed, 0.0, 1.0)
    return minx, miny, cov


def ccw_vertices(vertices: np.ndarray) -> np.ndarray:
    """Reorder polygon vertices counter-clockwise (positive shoelace area)."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return vertices if area >= 0 else vertices[::-1]


def stroke_footprint(stroke: Stroke, width: int, height: int):
    """Planning footprint: capsule of radius thickness/2 around the spine.

    Falls back to full coverage of the nearest pixel when the geometry is too
    thin to touch any pixel center.
    """
    a, b = stroke.spine()
    x0, y0, cov = capsule_coverage(a, b, stroke.thickness / 2.0, width, height)
    if cov.size == 0 or cov.sum() <= 0.0:
        ix = min(max(int(math.floor(stroke.x + 0.5)), 0), width - 1)
        iy = min(max(int(math.floor(stroke.y + 0.5)), 0), height - 1)
        return ix, iy, np.ones((1, 1))
    return x0, y0, cov


def footprint_mean(field_data: np.ndarray, x0: int, y0: int, cov: np.ndarray) -> float:
    """Coverage-weighted mean of a scalar field over a footprint block."""
    h, w = cov.shape
    block = field_data[y0 : y0 + h, x0 : x0 + w]
    total = cov.sum()
    return float((block * cov).sum() / total)


def footprint_error(stroke: Stroke, reference_rgb: np.ndarray) -> float:
    """Coverage-weighted mean squared color error of painting the stroke.

    ``reference_rgb`` is an HxWx3 float array; the error is the mean over the
    footprint of the squared distance between the stroke color and the
    reference.
    """
    h, w = reference_rgb.shape[:2]
    x0, y0, cov = stroke_footprint(stroke, w, h)
    bh, bw = cov.shape
    block = reference_rgb[y0 : y0 + bh, x0 : x0 + bw]
    diff = block - np.asarray(stroke.color[:3])
    sq = (diff**2).sum(axis=-1)
    total = cov.sum()
    return float((sq * cov).sum() / total)
