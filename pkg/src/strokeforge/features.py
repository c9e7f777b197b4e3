"""Feature fields and initial stroke candidates.

Turns an input image into edge / saliency / density fields and generates the
weighted candidate set that seeds stroke planning: each candidate anchor comes
from a density-weighted Voronoi seed and carries the weight
``alpha_e*E + beta_s*S + gamma_d*D`` sampled at that anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import (
    RasterError,
    RasterImage,
    ScalarField,
    convolve2d,
    gradient_magnitude_and_angle,
    luminance,
    smooth_field,
    sobel_gradients,
)

# Lloyd relaxation iteration count; fixed for bounded, deterministic runtime.
LLOYD_ITERATIONS = 3

# Gaussian sigma applied to the raw spectral-residual map.
SALIENCY_SMOOTH_SIGMA = 2.5

MIN_SALIENCY_SIZE = 16


@dataclass(frozen=True)
class FeatureBundle:
    """Edge, saliency and density fields sharing one set of dimensions."""

    edges: ScalarField
    saliency: ScalarField
    density: ScalarField

    def __post_init__(self):
        shape = self.edges.data.shape
        if self.saliency.data.shape != shape or self.density.data.shape != shape:
            raise RasterError("feature fields must share dimensions")
        for name in ("edges", "saliency", "density"):
            f: ScalarField = getattr(self, name)
            if f.data.min() < 0.0 or f.data.max() > 1.0:
                raise RasterError(f"{name} field must lie in [0,1]")

    @property
    def width(self) -> int:
        return self.edges.width

    @property
    def height(self) -> int:
        return self.edges.height


@dataclass(frozen=True)
class FeatureWeights:
    """Coefficients of the candidate-weight blend (edge, saliency, density)."""

    alpha_e: float = 1.0
    beta_s: float = 1.0
    gamma_d: float = 1.0

    def __post_init__(self):
        if self.alpha_e < 0 or self.beta_s < 0 or self.gamma_d < 0:
            raise RasterError("feature weights must be non-negative")
        if self.alpha_e + self.beta_s + self.gamma_d <= 0:
            raise RasterError("at least one feature weight must be positive")


@dataclass(frozen=True)
class StrokeCandidate:
    """A candidate anchor with its feature-blend weight."""

    x: int
    y: int
    weight: float


@dataclass(frozen=True)
class VoronoiPartition:
    """Seed points plus the per-pixel nearest-seed label field."""

    seeds: list[tuple[int, int]]
    cell_index: ScalarField


def extract_edges(image: RasterImage, threshold: float = 0.0) -> ScalarField:
    """Thresholded, max-normalized Sobel magnitude of the luminance channel.

    Values below the threshold are zeroed; the surviving band [threshold, 1]
    is linearly rescaled back to [0,1].
    """
    if not 0.0 <= threshold <= 1.0:
        raise RasterError(f"threshold must lie in [0,1], got {threshold}")
    mag, _ = gradient_magnitude_and_angle(sobel_gradients(luminance(image)))
    peak = mag.data.max()
    if peak <= 0.0:
        return ScalarField(np.zeros_like(mag.data))
    norm = mag.data / peak
    if threshold >= 1.0:
        out = np.where(norm >= 1.0, 1.0, 0.0)
    else:
        out = np.where(norm < threshold, 0.0, (norm - threshold) / (1.0 - threshold))
    return ScalarField(np.clip(out, 0.0, 1.0))


def compute_saliency(image: RasterImage) -> ScalarField:
    """Spectral-residual saliency of the luminance channel, max-normalized.

    Log-amplitude spectrum minus its 3x3 local average, recombined with the
    original phase, inverse-transformed, squared and Gaussian-smoothed.
    Constant images have a flat spectrum and produce an all-zero map.
    """
    if image.width < MIN_SALIENCY_SIZE or image.height < MIN_SALIENCY_SIZE:
        raise RasterError(
            f"saliency needs at least {MIN_SALIENCY_SIZE}x{MIN_SALIENCY_SIZE} pixels, "
            f"got {image.width}x{image.height}"
        )
    lum = luminance(image).data
    if lum.max() - lum.min() == 0.0:
        return ScalarField(np.zeros_like(lum))
    spectrum = np.fft.fft2(lum)
    amplitude = np.abs(spectrum)
    phase = np.angle(spectrum)
    log_amp = np.log(amplitude + 1e-12)
    local_avg = convolve2d(ScalarField(log_amp), np.full((3, 3), 1.0 / 9.0)).data
    residual = log_amp - local_avg
    recombined = np.fft.ifft2(np.exp(residual + 1j * phase))
    raw = np.abs(recombined) ** 2
    smoothed = smooth_field(ScalarField(raw), SALIENCY_SMOOTH_SIGMA).data
    peak = smoothed.max()
    if peak <= 0.0:
        return ScalarField(np.zeros_like(smoothed))
    return ScalarField(np.clip(smoothed / peak, 0.0, 1.0))


def estimate_density(edges: ScalarField, saliency: ScalarField, sigma: float = 4.0) -> ScalarField:
    """Max-normalized Gaussian blur of the even edge/saliency blend.

    An all-zero blend (featureless image) falls back to uniform density 1 so
    downstream sampling still covers the frame.
    """
    if edges.data.shape != saliency.data.shape:
        raise RasterError("edges and saliency must share dimensions")
    blend = 0.5 * edges.data + 0.5 * saliency.data
    smoothed = smooth_field(ScalarField(blend), sigma).data
    peak = smoothed.max()
    if peak <= 0.0:
        return ScalarField(np.ones_like(smoothed))
    return ScalarField(np.clip(smoothed / peak, 0.0, 1.0))


def _label_nearest(width: int, height: int, seeds: np.ndarray) -> np.ndarray:
    """Integer label of the nearest seed per pixel; ties go to the lowest index.

    Blocked brute-force argmin over exact integer squared distances, so the
    tie-break is deterministic.
    """
    xs = np.arange(width, dtype=np.int64)
    ys = np.arange(height, dtype=np.int64)
    px, py = np.meshgrid(xs, ys)
    px = px.ravel()
    py = py.ravel()
    sx = seeds[:, 0].astype(np.int64)
    sy = seeds[:, 1].astype(np.int64)
    n = px.size
    labels = np.empty(n, dtype=np.int64)
    block = max(1, 4_000_000 // max(len(seeds), 1))
    for start in range(0, n, block):
        stop = min(start + block, n)
        d2 = (px[start:stop, None] - sx[None, :]) ** 2 + (py[start:stop, None] - sy[None, :]) ** 2
        labels[start:stop] = np.argmin(d2, axis=1)
    return labels.reshape(height, width)


def _sample_seeds(
    width: int, height: int, count: int, density: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Density-weighted rejection sampling of distinct integer pixel seeds."""
    peak = density.max()
    weights = density / peak if peak > 0 else np.ones_like(density)
    chosen: list[tuple[int, int]] = []
    taken: set[tuple[int, int]] = set()
    attempts = 0
    max_attempts = max(10_000, 1000 * count)
    while len(chosen) < count and attempts < max_attempts:
        attempts += 1
        x = int(rng.integers(0, width))
        y = int(rng.integers(0, height))
        if rng.random() >= weights[y, x]:
            continue
        if (x, y) in taken:
            continue
        taken.add((x, y))
        chosen.append((x, y))
    if len(chosen) < count:
        # pathological density mass; fill deterministically from the densest
        # unused pixels, ties broken by (y, x)
        order = np.lexsort(
            (np.tile(np.arange(width), height), np.repeat(np.arange(height), width), -density.ravel())
        )
        for idx in order:
            y, x = divmod(int(idx), width)
            if (x, y) not in taken:
                taken.add((x, y))
                chosen.append((x, y))
                if len(chosen) == count:
                    break
    return np.array(chosen, dtype=np.int64)


def _relax_seeds(seeds: np.ndarray, density: np.ndarray, width: int, height: int) -> np.ndarray:
    """One density-weighted Lloyd step; centroids snapped to free integer pixels."""
    labels = _label_nearest(width, height, seeds)
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    new_seeds = np.empty_like(seeds)
    occupied: set[tuple[int, int]] = set()
    for i in range(len(seeds)):
        mask = labels == i
        if not mask.any():
            cx, cy = float(seeds[i, 0]), float(seeds[i, 1])
        else:
            w = density[mask]
            total = w.sum()
            if total > 0:
                cx = float((xs[mask] * w).sum() / total)
                cy = float((ys[mask] * w).sum() / total)
            else:
                cx = float(xs[mask].mean())
                cy = float(ys[mask].mean())
        ix = min(max(int(np.floor(cx + 0.5)), 0), width - 1)
        iy = min(max(int(np.floor(cy + 0.5)), 0), height - 1)
        pos = (ix, iy)
        if pos in occupied:
            pos = (int(seeds[i, 0]), int(seeds[i, 1]))
        if pos in occupied:
            pos = _nearest_free_pixel(ix, iy, width, height, occupied)
        occupied.add(pos)
        new_seeds[i] = pos
    return new_seeds


def _nearest_free_pixel(
    x: int, y: int, width: int, height: int, occupied: set[tuple[int, int]]
) -> tuple[int, int]:
    for radius in range(1, max(width, height) + 1):
        best = None
        for cy in range(max(0, y - radius), min(height, y + radius + 1)):
            for cx in range(max(0, x - radius), min(width, x + radius + 1)):
                if (cx, cy) in occupied:
                    continue
                d2 = (cx - x) ** 2 + (cy - y) ** 2
                key = (d2, cy, cx)
                if best is None or key < best:
                    best = key
        if best is not None:
            return (best[2], best[1])
    raise RasterError("no free pixel available for a Voronoi seed")


def voronoi_partition(
    width: int, height: int, seed_count: int, density: ScalarField, rng_seed: int
) -> VoronoiPartition:
    """Density-weighted seeds relaxed by three Lloyd iterations, then labeled.

    Seeds live on distinct integer pixels, which guarantees every cell is
    nonempty (a seed's own pixel is at distance zero from it).
    """
    if seed_count < 1:
        raise RasterError(f"seed_count must be >= 1, got {seed_count}")
    if seed_count > width * height:
        raise RasterError(f"seed_count {seed_count} exceeds pixel count {width * height}")
    if density.data.shape != (height, width):
        raise RasterError("density field dimensions must match the image")
    rng = np.random.default_rng(rng_seed)
    seeds = _sample_seeds(width, height, seed_count, density.data, rng)
    for _ in range(LLOYD_ITERATIONS):
        seeds = _relax_seeds(seeds, density.data, width, height)
    labels = _label_nearest(width, height, seeds)
    return VoronoiPartition(
        seeds=[(int(x), int(y)) for x, y in seeds],
        cell_index=ScalarField(labels.astype(np.float64)),
    )


def candidate_weight(bundle: FeatureBundle, weights: FeatureWeights, x: int, y: int) -> float:
    """The feature blend alpha_e*E + beta_s*S + gamma_d*D at one pixel."""
    return (
        weights.alpha_e * float(bundle.edges.data[y, x])
        + weights.beta_s * float(bundle.saliency.data[y, x])
        + weights.gamma_d * float(bundle.density.data[y, x])
    )


def candidates_from_partition(
    bundle: FeatureBundle, weights: FeatureWeights, partition: VoronoiPartition
) -> list[StrokeCandidate]:
    """Weighted candidate per partition seed, sorted by weight descending
    with ties broken by (y, x) ascending so the order is a total one."""
    candidates = [
        StrokeCandidate(x=x, y=y, weight=candidate_weight(bundle, weights, x, y))
        for x, y in partition.seeds
    ]
    candidates.sort(key=lambda c: (-c.weight, c.y, c.x))
    return candidates


def generate_candidates(
    bundle: FeatureBundle, weights: FeatureWeights, count: int, rng_seed: int
) -> list[StrokeCandidate]:
    """One weighted candidate per density-weighted Voronoi cell."""
    if count < 1:
        raise RasterError(f"candidate count must be >= 1, got {count}")
    partition = voronoi_partition(bundle.width, bundle.height, count, bundle.density, rng_seed)
    return candidates_from_partition(bundle, weights, partition)
