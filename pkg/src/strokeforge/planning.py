"""Hybrid stroke planning: heuristic initialization, pluggable refinement,
blend correction, consistency scoring and adaptive merging.

The planner turns feature fields into an ordered stroke sequence: candidates
become contour-following strokes with density-scaled geometry and a
saliency/edge priority, a refiner proposes per-stroke adjustments that are
blended back under ``blend_gamma``, and a consistency score discards or
merges strokes before the final priority ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .features import (
    FeatureBundle,
    FeatureWeights,
    StrokeCandidate,
    VoronoiPartition,
    candidates_from_partition,
    compute_saliency,
    estimate_density,
    extract_edges,
    voronoi_partition,
)
from .raster import (
    GRADIENT_EPS,
    GradientField,
    RasterError,
    RasterImage,
    ScalarField,
    luminance,
    sobel_gradients,
)
from .strokes import (
    Stroke,
    footprint_error,
    footprint_mean,
    normalize_angle,
    stroke_footprint,
)

NCC_PATCH = 9  # luminance patch side for the merge similarity weight


class RefinerInterface(Protocol):
    """A deterministic per-stroke refinement model."""

    def refine(self, stroke: Stroke, reference: RasterImage, features: FeatureBundle) -> Stroke:
        ...


@dataclass(frozen=True)
class HybridParams:
    """Knobs of the hybrid pipeline: blending, priority, scoring, merging."""

    blend_gamma: float = 0.5
    lambda_priority: float = 0.5
    q_saliency: float = 0.5
    q_edge: float = 0.4
    q_penalty: float = 0.1
    q_discard_threshold: float = 0.0
    merge_radius: float = 4.0
    stroke_budget: int = 400

    def __post_init__(self):
        if not 0.0 <= self.blend_gamma <= 1.0:
            raise RasterError("blend_gamma must lie in [0,1]")
        if not 0.0 <= self.lambda_priority <= 1.0:
            raise RasterError("lambda_priority must lie in [0,1]")
        if self.q_saliency < 0 or self.q_edge < 0 or self.q_penalty < 0:
            raise RasterError("consistency weights must be >= 0")
        if self.merge_radius < 0:
            raise RasterError("merge_radius must be >= 0")
        if self.stroke_budget < 1:
            raise RasterError("stroke_budget must be >= 1")


@dataclass(frozen=True)
class StrokeDefaults:
    """Geometry defaults for heuristic strokes, scaled by local density."""

    base_size: float = 6.0
    base_length: float = 12.0
    base_thickness: float = 4.0
    opacity: float = 1.0
    texture: str = "solid"
    scale_at_zero_density: float = 1.0
    scale_at_full_density: float = 0.5
    follow_contours: bool = True

    def __post_init__(self):
        if self.base_size <= 0 or self.base_length < 0 or self.base_thickness <= 0:
            raise RasterError("stroke geometry defaults must be positive")
        if not 0.0 <= self.opacity <= 1.0:
            raise RasterError("opacity must lie in [0,1]")
        if self.scale_at_zero_density <= 0 or self.scale_at_full_density <= 0:
            raise RasterError("density scales must be > 0")


@dataclass(frozen=True)
class RefinedPair:
    """A heuristic stroke with its refined counterpart and correction flags."""

    heuristic: Stroke
    refined: Stroke
    clamped: bool = False
    failed: bool = False


def _stroke_color(reference: RasterImage, x: float, y: float, opacity: float):
    c = reference.sample(x, y)
    if reference.channels == 1:
        rgb = (float(c[0]),) * 3
    else:
        rgb = (float(c[0]), float(c[1]), float(c[2]))
    return rgb + (float(opacity),)


def init_strokes(
    candidates: list[StrokeCandidate],
    gradients: GradientField,
    features: FeatureBundle,
    reference: RasterImage,
    params: HybridParams,
    defaults: StrokeDefaults = StrokeDefaults(),
) -> list[Stroke]:
    """Heuristic stroke per candidate: contour orientation, density-scaled
    geometry, reference color, and priority lambda*S + (1-lambda)*E."""
    lam = params.lambda_priority
    rotate = math.pi / 2.0 if defaults.follow_contours else 0.0
    out = []
    for cand in candidates:
        gx = gradients.gx.data[cand.y, cand.x]
        gy = gradients.gy.data[cand.y, cand.x]
        if math.hypot(gx, gy) < GRADIENT_EPS:
            angle = 0.0
        else:
            angle = math.atan2(gy, gx)
        density = float(features.density.data[cand.y, cand.x])
        scale = defaults.scale_at_zero_density + (
            defaults.scale_at_full_density - defaults.scale_at_zero_density
        ) * density
        sal = float(features.saliency.data[cand.y, cand.x])
        edge = float(features.edges.data[cand.y, cand.x])
        out.append(
            Stroke(
                x=float(cand.x),
                y=float(cand.y),
                orientation=normalize_angle(angle + rotate),
                length=defaults.base_length * scale,
                thickness=defaults.base_thickness * scale,
                color=_stroke_color(reference, cand.x, cand.y, defaults.opacity),
                texture=defaults.texture,
                size=defaults.base_size * scale,
                weight=cand.weight,
                priority=lam * sal + (1.0 - lam) * edge,
            )
        )
    return out


def _region_of(stroke: Stroke, partition: VoronoiPartition | None, width: int, height: int) -> int:
    if partition is not None:
        return int(partition.cell_index.sample(stroke.x, stroke.y))
    cols = (width + 15) // 16
    cx = min(max(int(stroke.x) // 16, 0), cols - 1)
    cy = int(stroke.y) // 16
    return cy * cols + cx


def enforce_density(
    strokes: list[Stroke],
    density: ScalarField,
    budget: int,
    partition: VoronoiPartition | None = None,
) -> list[Stroke]:
    """Trim the stroke set to the budget, allotting slots per region in
    proportion to its share of total stroke weight (largest-remainder
    apportionment), keeping the highest-priority strokes of each region.

    Regions come from the candidates' Voronoi partition, or a 16 px grid when
    none is supplied. Input order is preserved among survivors.
    """
    if budget < 1:
        raise RasterError(f"budget must be >= 1, got {budget}")
    if not strokes:
        return []
    if len(strokes) <= budget:
        return list(strokes)
    width, height = density.width, density.height
    regions: dict[int, list[int]] = {}
    for i, s in enumerate(strokes):
        regions.setdefault(_region_of(s, partition, width, height), []).append(i)
    region_ids = sorted(regions)
    total_w = sum(max(s.weight, 0.0) for s in strokes)
    if total_w <= 0.0:
        weights = {rid: float(len(regions[rid])) for rid in region_ids}
        total_w = float(len(strokes))
    else:
        weights = {
            rid: sum(max(strokes[i].weight, 0.0) for i in regions[rid]) for rid in region_ids
        }
    quotas = {rid: budget * weights[rid] / total_w for rid in region_ids}
    allot = {rid: int(math.floor(quotas[rid])) for rid in region_ids}
    leftover = budget - sum(allot.values())
    by_remainder = sorted(region_ids, key=lambda rid: (-(quotas[rid] - allot[rid]), rid))
    for rid in by_remainder[:leftover]:
        allot[rid] += 1
    # cap at region populations, then hand surplus to regions with spare strokes
    surplus = 0
    for rid in region_ids:
        over = allot[rid] - len(regions[rid])
        if over > 0:
            allot[rid] -= over
            surplus += over
    while surplus > 0:
        candidates = [rid for rid in region_ids if allot[rid] < len(regions[rid])]
        if not candidates:
            break
        rid = max(candidates, key=lambda r: (quotas[r] - allot[r], -r))
        allot[rid] += 1
        surplus -= 1
    keep: set[int] = set()
    for rid in region_ids:
        members = regions[rid]
        ranked = sorted(members, key=lambda i: (-strokes[i].priority, i))
        keep.update(ranked[: allot[rid]])
    return [s for i, s in enumerate(strokes) if i in keep]


def _clamp_stroke(stroke: Stroke, width: int, height: int) -> tuple[Stroke, bool]:
    from .strokes import MIN_THICKNESS, TEXTURES

    x = min(max(stroke.x, 0.0), float(width - 1))
    y = min(max(stroke.y, 0.0), float(height - 1))
    length = max(stroke.length, 0.0)
    thickness = max(stroke.thickness, MIN_THICKNESS)
    size = max(stroke.size, MIN_THICKNESS)
    color = tuple(min(max(c, 0.0), 1.0) for c in stroke.color)
    texture = stroke.texture if stroke.texture in TEXTURES else "solid"
    fixed = stroke.with_fields(
        x=x, y=y, length=length, thickness=thickness, size=size, color=color, texture=texture
    )
    return fixed, fixed != stroke


def refine(
    strokes: list[Stroke],
    refiner: RefinerInterface,
    reference: RasterImage,
    features: FeatureBundle,
) -> list[RefinedPair]:
    """Run the refiner over every stroke, clamping invariant violations and
    falling back to the heuristic stroke when a refiner call fails."""
    pairs = []
    for s in strokes:
        try:
            proposed = refiner.refine(s, reference, features)
        except Exception:
            pairs.append(RefinedPair(heuristic=s, refined=s, failed=True))
            continue
        fixed, clamped = _clamp_stroke(proposed, reference.width, reference.height)
        pairs.append(RefinedPair(heuristic=s, refined=fixed, clamped=clamped))
    return pairs


def _lerp(a: float, b: float, t: float) -> float:
    return a + t * (b - a)


def blend_correction(heuristic: Stroke, refined: Stroke, blend_gamma: float) -> Stroke:
    """Convex per-field interpolation between heuristic and refined strokes.

    Orientation blends along the shorter circular arc; texture snaps to the
    refined stroke's at gamma >= 0.5. The endpoints reproduce their input
    bit-exactly.
    """
    if not 0.0 <= blend_gamma <= 1.0:
        raise RasterError(f"blend_gamma must lie in [0,1], got {blend_gamma}")
    g = float(blend_gamma)
    if g == 0.0:
        return heuristic
    if g == 1.0:
        return refined
    delta = normalize_angle(refined.orientation - heuristic.orientation)
    return Stroke(
        x=_lerp(heuristic.x, refined.x, g),
        y=_lerp(heuristic.y, refined.y, g),
        orientation=normalize_angle(heuristic.orientation + g * delta),
        length=_lerp(heuristic.length, refined.length, g),
        thickness=_lerp(heuristic.thickness, refined.thickness, g),
        color=tuple(_lerp(a, b, g) for a, b in zip(heuristic.color, refined.color)),
        texture=refined.texture if g >= 0.5 else heuristic.texture,
        size=_lerp(heuristic.size, refined.size, g),
        weight=_lerp(heuristic.weight, refined.weight, g),
        priority=_lerp(heuristic.priority, refined.priority, g),
    )


def consistency_score(
    blended: Stroke, heuristic: Stroke, features: FeatureBundle, params: HybridParams
) -> float:
    """Feature-preservation score: saliency and edge alignment over the
    stroke footprint minus a penalty for deviating from the heuristic."""
    x0, y0, cov = stroke_footprint(blended, features.width, features.height)
    sal = footprint_mean(features.saliency.data, x0, y0, cov)
    edge = footprint_mean(features.edges.data, x0, y0, cov)
    diag = math.hypot(features.width, features.height)
    d_anchor = math.hypot(blended.x - heuristic.x, blended.y - heuristic.y) / diag
    d_theta = abs(normalize_angle(blended.orientation - heuristic.orientation)) / math.pi
    t_max = max(blended.thickness, heuristic.thickness)
    d_thick = abs(blended.thickness - heuristic.thickness) / t_max if t_max > 0 else 0.0
    deviation = (d_anchor + d_theta + d_thick) / 3.0
    return params.q_saliency * sal + params.q_edge * edge - params.q_penalty * deviation


def _luminance_patch(lum: np.ndarray, x: float, y: float, side: int = NCC_PATCH) -> np.ndarray:
    h, w = lum.shape
    half = side // 2
    cx = min(max(int(math.floor(x + 0.5)), 0), w - 1)
    cy = min(max(int(math.floor(y + 0.5)), 0), h - 1)
    xs = np.clip(np.arange(cx - half, cx + half + 1), 0, w - 1)
    ys = np.clip(np.arange(cy - half, cy + half + 1), 0, h - 1)
    return lum[np.ix_(ys, xs)]


def merge_strokes(
    s_a: Stroke, s_b: Stroke, reference: RasterImage, merge_radius: float
) -> Stroke:
    """Merge two neighboring strokes, weighted by the normalized
    cross-correlation of their 9x9 luminance patches mapped into [0,1]."""
    dist = math.hypot(s_a.x - s_b.x, s_a.y - s_b.y)
    if dist > merge_radius:
        raise RasterError(
            f"stroke anchors are {dist:.3f} px apart, beyond merge radius {merge_radius}"
        )
    lum = luminance(reference).data
    pa = _luminance_patch(lum, s_a.x, s_a.y)
    pb = _luminance_patch(lum, s_b.x, s_b.y)
    da = pa - pa.mean()
    db = pb - pb.mean()
    denom = math.sqrt(float((da**2).sum())) * math.sqrt(float((db**2).sum()))
    if denom == 0.0:
        ncc = 1.0 if np.array_equal(pa, pb) else 0.0
    else:
        ncc = float(np.clip((da * db).sum() / denom, -1.0, 1.0))
    omega = (ncc + 1.0) / 2.0
    # omega * s_a + (1 - omega) * s_b, with blend_correction's per-field rules
    return blend_correction(s_b, s_a, omega)


@dataclass(frozen=True)
class PlanSettings:
    """Everything Steps 1-4 need, bundled for the planner."""

    feature_weights: FeatureWeights = FeatureWeights()
    edge_threshold: float = 0.1
    density_sigma: float = 4.0
    candidate_count: int = 400
    defaults: StrokeDefaults = StrokeDefaults()
    hybrid: HybridParams = HybridParams()
    rng_seed: int = 0


@dataclass(frozen=True)
class PlanStages:
    """Intermediate planning artifacts, reusable across replans."""

    bundle: FeatureBundle
    gradients: GradientField
    strokes: list[Stroke] = field(default_factory=list)


def prepare_strokes(image: RasterImage, settings: PlanSettings) -> PlanStages:
    """Steps 1-2: feature extraction, candidate generation, heuristic
    initialization and density budgeting."""
    edges = extract_edges(image, settings.edge_threshold)
    saliency = compute_saliency(image)
    density = estimate_density(edges, saliency, settings.density_sigma)
    bundle = FeatureBundle(edges=edges, saliency=saliency, density=density)
    gradients = sobel_gradients(luminance(image))
    partition = voronoi_partition(
        bundle.width, bundle.height, settings.candidate_count, density, settings.rng_seed
    )
    candidates = candidates_from_partition(bundle, settings.feature_weights, partition)
    strokes = init_strokes(
        candidates, gradients, bundle, image, settings.hybrid, settings.defaults
    )
    strokes = enforce_density(strokes, density, settings.hybrid.stroke_budget, partition)
    return PlanStages(bundle=bundle, gradients=gradients, strokes=strokes)


def finish_plan(
    image: RasterImage,
    stages: PlanStages,
    settings: PlanSettings,
    refiner: RefinerInterface,
) -> list[Stroke]:
    """Steps 3-4: refinement, blend correction, consistency filtering,
    nearest-pair merging, and the final ascending-priority ordering."""
    hybrid = settings.hybrid
    pairs = refine(stages.strokes, refiner, image, stages.bundle)
    blended = [
        (blend_correction(p.heuristic, p.refined, hybrid.blend_gamma), p.heuristic)
        for p in pairs
    ]
    survivors = [
        stroke
        for stroke, heuristic in blended
        if consistency_score(stroke, heuristic, stages.bundle, hybrid)
        >= hybrid.q_discard_threshold
    ]
    merged = _merge_pass(survivors, image, hybrid.merge_radius)
    return sorted(merged, key=lambda s: s.priority)


def _merge_pass(strokes: list[Stroke], image: RasterImage, merge_radius: float) -> list[Stroke]:
    """Single greedy nearest-pair merge pass; each stroke merges at most once."""
    if merge_radius <= 0.0 or len(strokes) < 2:
        return list(strokes)
    pairs = []
    for i in range(len(strokes)):
        for j in range(i + 1, len(strokes)):
            d = math.hypot(strokes[i].x - strokes[j].x, strokes[i].y - strokes[j].y)
            if d <= merge_radius:
                pairs.append((d, i, j))
    pairs.sort()
    consumed: set[int] = set()
    merged_at: dict[int, Stroke] = {}
    for d, i, j in pairs:
        if i in consumed or j in consumed:
            continue
        merged_at[i] = merge_strokes(strokes[i], strokes[j], image, merge_radius)
        consumed.add(i)
        consumed.add(j)
    out = []
    for i, s in enumerate(strokes):
        if i in merged_at:
            out.append(merged_at[i])
        elif i not in consumed:
            out.append(s)
    return out


def plan(image: RasterImage, settings: PlanSettings, refiner: RefinerInterface) -> list[Stroke]:
    """Full planning pipeline from image to the ordered stroke sequence."""
    stages = prepare_strokes(image, settings)
    return finish_plan(image, stages, settings, refiner)


class IdentityRefiner:
    """Refiner that proposes no changes."""

    def refine(self, stroke: Stroke, reference: RasterImage, features: FeatureBundle) -> Stroke:
        return stroke


class LocalSearchRefiner:
    """Deterministic coordinate-descent refiner.

    Three sweeps over anchor offsets (+-2 px per axis), orientation (+-15
    degrees), thickness (x0.5 / x2), each accepted only on strict improvement
    of the footprint error, with the color snapped to the footprint mean
    after every accepted geometry change.
    """

    sweeps = 3
    anchor_offsets = (-2.0, -1.0, 0.0, 1.0, 2.0)
    angle_offsets = (-math.radians(15.0), 0.0, math.radians(15.0))
    thickness_factors = (0.5, 1.0, 2.0)

    def refine(self, stroke: Stroke, reference: RasterImage, features: FeatureBundle) -> Stroke:
        rgb = reference.rgb()
        w, h = reference.width, reference.height
        current = self._snap_color(stroke, rgb)
        best_err = footprint_error(current, rgb)
        for _ in range(self.sweeps):
            for axis in ("x", "y"):
                current, best_err = self._descend(
                    current,
                    best_err,
                    rgb,
                    [
                        self._moved(current, axis, off, w, h)
                        for off in self.anchor_offsets
                        if off != 0.0
                    ],
                )
            current, best_err = self._descend(
                current,
                best_err,
                rgb,
                [
                    current.with_fields(orientation=normalize_angle(current.orientation + off))
                    for off in self.angle_offsets
                    if off != 0.0
                ],
            )
            current, best_err = self._descend(
                current,
                best_err,
                rgb,
                [
                    current.with_fields(thickness=current.thickness * f)
                    for f in self.thickness_factors
                    if f != 1.0
                ],
            )
        return current

    @staticmethod
    def _moved(stroke: Stroke, axis: str, offset: float, w: int, h: int) -> Stroke:
        if axis == "x":
            return stroke.with_fields(x=min(max(stroke.x + offset, 0.0), float(w - 1)))
        return stroke.with_fields(y=min(max(stroke.y + offset, 0.0), float(h - 1)))

    def _descend(self, current: Stroke, best_err: float, rgb: np.ndarray, moves) -> tuple:
        for candidate in moves:
            snapped = self._snap_color(candidate, rgb)
            err = footprint_error(snapped, rgb)
            if err < best_err:
                current, best_err = snapped, err
        return current, best_err

    @staticmethod
    def _snap_color(stroke: Stroke, rgb: np.ndarray) -> Stroke:
        h, w = rgb.shape[:2]
        x0, y0, cov = stroke_footprint(stroke, w, h)
        bh, bw = cov.shape
        block = rgb[y0 : y0 + bh, x0 : x0 + bw]
        total = cov.sum()
        mean = (block * cov[:, :, np.newaxis]).sum(axis=(0, 1)) / total
        color = tuple(float(min(max(c, 0.0), 1.0)) for c in mean) + (stroke.color[3],)
        return stroke.with_fields(color=color)


REFINERS = {"identity": IdentityRefiner, "local_search": LocalSearchRefiner}


def make_refiner(name: str) -> RefinerInterface:
    if name not in REFINERS:
        raise RasterError(f"unknown refiner {name!r}; choose from {sorted(REFINERS)}")
    return REFINERS[name]()
