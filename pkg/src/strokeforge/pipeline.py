"""End-to-end job execution shared by the CLI and the HTTP service.

A plan job runs Steps 1-5 (features, init, refine/blend, score/merge,
render). Steps 1-2 are pure functions of a small key (image bytes, feature
and stroke settings, priority/budget knobs, seed), so replans that only
touch later-stage parameters can reuse a cached stage result.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .config import PlanConfig, config_to_dict
from .imgio import png_bytes
from .neural import default_extractor, stylize
from .painterly import render_painterly
from .planio import serialize_plan
from .planning import PlanStages, finish_plan, make_refiner, prepare_strokes
from .raster import RasterImage, luminance
from .render import render_sequence
from .strokes import Stroke


@dataclass
class PlanResult:
    png: bytes
    plan_json: bytes
    plan_hash: str
    strokes: list[Stroke]
    timings: dict[str, float] = field(default_factory=dict)


def stage_cache_key(image_bytes: bytes, config: PlanConfig) -> str:
    """Cache key covering everything Steps 1-2 depend on."""
    doc = config_to_dict(config)
    key_material = {
        "image": hashlib.sha256(image_bytes).hexdigest(),
        "features": doc["features"],
        "strokes": doc["strokes"],
        "lambda_priority": doc["hybrid"]["lambda_priority"],
        "stroke_budget": doc["hybrid"]["stroke_budget"],
        "rng_seed": doc["rng_seed"],
    }
    blob = json.dumps(key_material, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def plan_hash_of(plan_json: bytes) -> str:
    return hashlib.sha256(plan_json).hexdigest()


def apply_exclusions(strokes: list[Stroke], plan_json: bytes, config: PlanConfig) -> list[Stroke]:
    """Drop excluded stroke indices when the exclusion list matches this plan."""
    if config.exclusions is None:
        return strokes
    if config.exclusions.plan_hash != plan_hash_of(plan_json):
        return strokes
    omit = set(config.exclusions.indices)
    return [s for i, s in enumerate(strokes) if i not in omit]


class StageCache:
    """Tiny LRU for Step 1-2 artifacts keyed by stage_cache_key."""

    def __init__(self, capacity: int = 16):
        self.capacity = capacity
        self._entries: dict[str, tuple[RasterImage, PlanStages]] = {}
        self._order: list[str] = []

    def get(self, key: str):
        entry = self._entries.get(key)
        if entry is not None:
            self._order.remove(key)
            self._order.append(key)
        return entry

    def put(self, key: str, image: RasterImage, stages: PlanStages):
        if key in self._entries:
            self._order.remove(key)
        self._entries[key] = (image, stages)
        self._order.append(key)
        while len(self._order) > self.capacity:
            evicted = self._order.pop(0)
            del self._entries[evicted]


def run_plan_job(
    image: RasterImage,
    config: PlanConfig,
    image_bytes: bytes | None = None,
    cache: StageCache | None = None,
) -> PlanResult:
    """Plan and render one image under one config."""
    timings: dict[str, float] = {}
    stages = None
    key = None
    if cache is not None and image_bytes is not None:
        key = stage_cache_key(image_bytes, config)
        hit = cache.get(key)
        if hit is not None:
            _, stages = hit
    t0 = time.perf_counter()
    if stages is None:
        stages = prepare_strokes(image, config.plan_settings())
        if cache is not None and key is not None:
            cache.put(key, image, stages)
    timings["prepare"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    strokes = finish_plan(image, stages, config.plan_settings(), make_refiner(config.refiner))
    timings["plan"] = time.perf_counter() - t0

    plan_json = serialize_plan(strokes, (image.width, image.height))
    digest = plan_hash_of(plan_json)
    to_render = apply_exclusions(strokes, plan_json, config)

    t0 = time.perf_counter()
    canvas = render_sequence(
        to_render, (image.width, image.height), config.render, config.brush
    )
    timings["render"] = time.perf_counter() - t0
    return PlanResult(
        png=png_bytes(canvas),
        plan_json=plan_json,
        plan_hash=digest,
        strokes=strokes,
        timings=timings,
    )


def run_classical_job(image: RasterImage, config: PlanConfig) -> bytes:
    canvas, _ = render_painterly(image, config.painterly, config.brush)
    return png_bytes(canvas)


def resize_nearest(image: RasterImage, width: int, height: int) -> RasterImage:
    if (image.width, image.height) == (width, height):
        return image
    xs = np.minimum((np.arange(width) * image.width) // width, image.width - 1)
    ys = np.minimum((np.arange(height) * image.height) // height, image.height - 1)
    return RasterImage(image.data[np.ix_(ys, xs)])


def run_stylize_job(content: RasterImage, style: RasterImage, config: PlanConfig) -> bytes:
    # losses need matching dimensions; snap the style image to the content's
    style = resize_nearest(style, content.width, content.height)
    if style.channels != content.channels:
        style = RasterImage(_match_channels(style, content.channels))
    extractor = default_extractor(config.rng_seed)
    result, _ = stylize(content, style, extractor, config.stylize)
    return png_bytes(result)


def _match_channels(image: RasterImage, channels: int):
    if channels == 1:
        return luminance(image).data[:, :, np.newaxis]
    rgb = image.rgb()
    if channels == 3:
        return rgb
    if image.channels == 4:
        alpha = image.data[:, :, 3:4]
    else:
        alpha = np.ones_like(rgb[:, :, :1])
    return np.concatenate([rgb, alpha], axis=2)
