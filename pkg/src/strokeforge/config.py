"""The engine's single steering surface: a validated, fully defaulted config.

Every tunable of every pipeline lives here, grouped by subsystem. Loading
merges user JSON over the documented defaults, rejects unknown keys, and
reports violations by JSON pointer (e.g. ``/hybrid/blend_gamma``). Saving
emits a canonical form that round-trips field-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .features import FeatureWeights
from .painterly import BrushModel, LayerSpec, PainterlyConfig
from .planning import HybridParams, PlanSettings, StrokeDefaults
from .neural import StylizeConfig
from .raster import RasterError
from .render import PostProcessing, RenderOptions
from .strokes import TEXTURES


class ConfigError(RasterError):
    """Invalid configuration; the message starts with the JSON pointer."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


@dataclass(frozen=True)
class FeatureSettings:
    """Feature-extraction knobs: blend weights plus field construction."""

    weights: FeatureWeights = FeatureWeights()
    edge_threshold: float = 0.1
    density_sigma: float = 4.0
    candidate_count: int = 400


@dataclass(frozen=True)
class Exclusions:
    """Stroke indices to omit at render time, pinned to a specific plan."""

    plan_hash: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class PlanConfig:
    """Aggregate of every subsystem's parameters."""

    rng_seed: int = 0
    refiner: str = "local_search"
    brush: BrushModel = BrushModel.CURVED
    features: FeatureSettings = FeatureSettings()
    strokes: StrokeDefaults = StrokeDefaults()
    painterly: PainterlyConfig = PainterlyConfig()
    hybrid: HybridParams = HybridParams()
    stylize: StylizeConfig = StylizeConfig()
    render: RenderOptions = RenderOptions()
    exclusions: Exclusions | None = None

    def plan_settings(self) -> PlanSettings:
        return PlanSettings(
            feature_weights=self.features.weights,
            edge_threshold=self.features.edge_threshold,
            density_sigma=self.features.density_sigma,
            candidate_count=self.features.candidate_count,
            defaults=self.strokes,
            hybrid=self.hybrid,
            rng_seed=self.rng_seed,
        )


def _check_type(value, kinds, pointer, label):
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise ConfigError(pointer, f"expected {label}, got boolean")
    if not isinstance(value, kinds):
        raise ConfigError(pointer, f"expected {label}, got {type(value).__name__}")


def _number(obj, key, pointer, lo=None, hi=None, allow_inf=False):
    value = obj[key]
    _check_type(value, (int, float), f"{pointer}/{key}", "a number")
    value = float(value)
    if not allow_inf and not math.isfinite(value):
        raise ConfigError(f"{pointer}/{key}", "must be finite")
    if lo is not None and value < lo:
        raise ConfigError(f"{pointer}/{key}", f"must be >= {lo}")
    if hi is not None and value > hi:
        raise ConfigError(f"{pointer}/{key}", f"must be <= {hi}")
    return value


def _integer(obj, key, pointer, lo=None, hi=None):
    value = obj[key]
    _check_type(value, int, f"{pointer}/{key}", "an integer")
    if lo is not None and value < lo:
        raise ConfigError(f"{pointer}/{key}", f"must be >= {lo}")
    if hi is not None and value > hi:
        raise ConfigError(f"{pointer}/{key}", f"must be <= {hi}")
    return int(value)


def _choice(obj, key, pointer, options):
    value = obj[key]
    _check_type(value, str, f"{pointer}/{key}", "a string")
    if value not in options:
        raise ConfigError(f"{pointer}/{key}", f"must be one of {sorted(options)}")
    return value


def _boolean(obj, key, pointer):
    value = obj[key]
    _check_type(value, bool, f"{pointer}/{key}", "a boolean")
    return bool(value)


def _object(value, pointer):
    _check_type(value, dict, pointer, "an object")
    return value


def _reject_unknown(obj, known, pointer):
    for key in obj:
        if key not in known:
            raise ConfigError(f"{pointer}/{key}", "unknown key")


def _merge(defaults, override, pointer=""):
    """Deep-merge override into defaults; objects merge, everything else replaces."""
    if not isinstance(override, dict):
        return override
    _check_type(defaults, dict, pointer or "/", "an object")
    merged = dict(defaults)
    for key, value in override.items():
        if key in defaults and isinstance(defaults[key], dict) and isinstance(value, dict):
            merged[key] = _merge(defaults[key], value, f"{pointer}/{key}")
        else:
            merged[key] = value
    return merged


DEFAULT_CONFIG: dict = {
    "rng_seed": 0,
    "refiner": "local_search",
    "brush": "curved",
    "features": {
        "alpha_e": 1.0,
        "beta_s": 1.0,
        "gamma_d": 1.0,
        "edge_threshold": 0.1,
        "density_sigma": 4.0,
        "candidate_count": 400,
    },
    "strokes": {
        "base_size": 6.0,
        "base_length": 12.0,
        "base_thickness": 4.0,
        "opacity": 1.0,
        "texture": "solid",
        "scale_at_zero_density": 1.0,
        "scale_at_full_density": 0.5,
        "follow_contours": True,
    },
    "painterly": {
        "layers": [
            {"radius": 8.0, "error_threshold": 0.1, "grid_step_factor": 1.0},
            {"radius": 4.0, "error_threshold": 0.1, "grid_step_factor": 1.0},
            {"radius": 2.0, "error_threshold": 0.1, "grid_step_factor": 1.0},
        ],
        "quantize_levels": None,
        "max_stroke_len": 16,
        "min_stroke_len": 4,
        "opacity": 1.0,
        "curvature_filter": 1.0,
        "rng_seed": 0,
    },
    "hybrid": {
        "blend_gamma": 0.5,
        "lambda_priority": 0.5,
        "q_saliency": 0.5,
        "q_edge": 0.4,
        "q_penalty": 0.1,
        "q_discard_threshold": 0.0,
        "merge_radius": 4.0,
        "stroke_budget": 400,
    },
    "stylize": {
        "alpha_content": 1.0,
        "beta_style": 10000.0,
        "eta": 0.5,
        "iterations": 200,
        "init": "content",
        "noise_seed": 0,
    },
    "render": {
        "background": [1.0, 1.0, 1.0, 1.0],
        "order_policy": "priority_ascending",
        "post": {
            "denoise_radius": None,
            "edge_enhance_amount": None,
            "harmonize_strength": None,
        },
    },
    "exclusions": None,
}


def _parse_features(obj) -> FeatureSettings:
    p = "/features"
    _reject_unknown(obj, DEFAULT_CONFIG["features"], p)
    alpha = _number(obj, "alpha_e", p, lo=0.0)
    beta = _number(obj, "beta_s", p, lo=0.0)
    gamma = _number(obj, "gamma_d", p, lo=0.0)
    if alpha + beta + gamma <= 0:
        raise ConfigError(p, "at least one of alpha_e/beta_s/gamma_d must be positive")
    return FeatureSettings(
        weights=FeatureWeights(alpha, beta, gamma),
        edge_threshold=_number(obj, "edge_threshold", p, lo=0.0, hi=1.0),
        density_sigma=_number(obj, "density_sigma", p, lo=0.0),
        candidate_count=_integer(obj, "candidate_count", p, lo=1),
    )


def _parse_strokes(obj) -> StrokeDefaults:
    p = "/strokes"
    _reject_unknown(obj, DEFAULT_CONFIG["strokes"], p)
    return StrokeDefaults(
        base_size=_number(obj, "base_size", p, lo=1e-6),
        base_length=_number(obj, "base_length", p, lo=0.0),
        base_thickness=_number(obj, "base_thickness", p, lo=1e-6),
        opacity=_number(obj, "opacity", p, lo=0.0, hi=1.0),
        texture=_choice(obj, "texture", p, TEXTURES),
        scale_at_zero_density=_number(obj, "scale_at_zero_density", p, lo=1e-6),
        scale_at_full_density=_number(obj, "scale_at_full_density", p, lo=1e-6),
        follow_contours=_boolean(obj, "follow_contours", p),
    )


def _parse_painterly(obj) -> PainterlyConfig:
    p = "/painterly"
    _reject_unknown(obj, DEFAULT_CONFIG["painterly"], p)
    raw_layers = obj["layers"]
    _check_type(raw_layers, list, f"{p}/layers", "a list")
    if not raw_layers:
        raise ConfigError(f"{p}/layers", "at least one layer is required")
    layers = []
    for i, entry in enumerate(raw_layers):
        lp = f"{p}/layers/{i}"
        entry = _object(entry, lp)
        _reject_unknown(entry, {"radius", "error_threshold", "grid_step_factor"}, lp)
        entry = _merge(
            {"radius": 8.0, "error_threshold": 0.1, "grid_step_factor": 1.0}, entry, lp
        )
        layers.append(
            LayerSpec(
                radius=_number(entry, "radius", lp, lo=1.0),
                error_threshold=_number(entry, "error_threshold", lp, lo=0.0, allow_inf=True),
                grid_step_factor=_number(entry, "grid_step_factor", lp, lo=1e-6),
            )
        )
    radii = [spec.radius for spec in layers]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ConfigError(f"{p}/layers", "radii must be strictly decreasing")
    quantize = obj["quantize_levels"]
    if quantize is not None:
        quantize = _integer(obj, "quantize_levels", p, lo=2)
    min_len = _integer(obj, "min_stroke_len", p, lo=1)
    max_len = _integer(obj, "max_stroke_len", p, lo=1)
    if min_len > max_len:
        raise ConfigError(f"{p}/min_stroke_len", "must be <= max_stroke_len")
    return PainterlyConfig(
        layers=tuple(layers),
        quantize_levels=quantize,
        max_stroke_len=max_len,
        min_stroke_len=min_len,
        opacity=_number(obj, "opacity", p, lo=0.0, hi=1.0),
        curvature_filter=_number(obj, "curvature_filter", p, lo=0.0, hi=1.0),
        rng_seed=_integer(obj, "rng_seed", p),
    )


def _parse_hybrid(obj) -> HybridParams:
    p = "/hybrid"
    _reject_unknown(obj, DEFAULT_CONFIG["hybrid"], p)
    return HybridParams(
        blend_gamma=_number(obj, "blend_gamma", p, lo=0.0, hi=1.0),
        lambda_priority=_number(obj, "lambda_priority", p, lo=0.0, hi=1.0),
        q_saliency=_number(obj, "q_saliency", p, lo=0.0),
        q_edge=_number(obj, "q_edge", p, lo=0.0),
        q_penalty=_number(obj, "q_penalty", p, lo=0.0),
        q_discard_threshold=_number(obj, "q_discard_threshold", p, allow_inf=True),
        merge_radius=_number(obj, "merge_radius", p, lo=0.0),
        stroke_budget=_integer(obj, "stroke_budget", p, lo=1),
    )


def _parse_stylize(obj) -> StylizeConfig:
    p = "/stylize"
    _reject_unknown(obj, DEFAULT_CONFIG["stylize"], p)
    alpha = _number(obj, "alpha_content", p, lo=0.0)
    beta = _number(obj, "beta_style", p, lo=0.0)
    if alpha + beta <= 0:
        raise ConfigError(p, "alpha_content + beta_style must be positive")
    return StylizeConfig(
        alpha_content=alpha,
        beta_style=beta,
        eta=_number(obj, "eta", p, lo=1e-12),
        iterations=_integer(obj, "iterations", p, lo=0),
        init=_choice(obj, "init", p, ("content", "noise")),
        noise_seed=_integer(obj, "noise_seed", p),
    )


def _parse_render(obj) -> RenderOptions:
    p = "/render"
    _reject_unknown(obj, DEFAULT_CONFIG["render"], p)
    bg = obj["background"]
    _check_type(bg, list, f"{p}/background", "a list")
    if len(bg) != 4:
        raise ConfigError(f"{p}/background", "must have 4 RGBA components")
    for i, c in enumerate(bg):
        _check_type(c, (int, float), f"{p}/background/{i}", "a number")
        if not 0.0 <= float(c) <= 1.0:
            raise ConfigError(f"{p}/background/{i}", "must lie in [0,1]")
    post_obj = _object(obj["post"], f"{p}/post")
    _reject_unknown(post_obj, DEFAULT_CONFIG["render"]["post"], f"{p}/post")
    post_vals = {}
    for key, lo, hi in (
        ("denoise_radius", 0.0, None),
        ("edge_enhance_amount", None, None),
        ("harmonize_strength", 0.0, 1.0),
    ):
        value = post_obj[key]
        post_vals[key] = None if value is None else _number(post_obj, key, f"{p}/post", lo=lo, hi=hi)
    return RenderOptions(
        background=tuple(float(c) for c in bg),
        order_policy=_choice(obj, "order_policy", p, ("priority_ascending", "input_order")),
        post=PostProcessing(
            denoise_radius=post_vals["denoise_radius"],
            edge_enhance_amount=post_vals["edge_enhance_amount"],
            harmonize_strength=post_vals["harmonize_strength"],
        ),
    )


def _parse_exclusions(obj) -> Exclusions | None:
    if obj is None:
        return None
    p = "/exclusions"
    obj = _object(obj, p)
    _reject_unknown(obj, {"plan_hash", "indices"}, p)
    if "plan_hash" not in obj or "indices" not in obj:
        raise ConfigError(p, "requires plan_hash and indices")
    plan_hash = obj["plan_hash"]
    _check_type(plan_hash, str, f"{p}/plan_hash", "a string")
    indices = obj["indices"]
    _check_type(indices, list, f"{p}/indices", "a list")
    cleaned = []
    for i, idx in enumerate(indices):
        _check_type(idx, int, f"{p}/indices/{i}", "an integer")
        if idx < 0:
            raise ConfigError(f"{p}/indices/{i}", "must be >= 0")
        cleaned.append(int(idx))
    return Exclusions(plan_hash=plan_hash, indices=tuple(cleaned))


def config_from_dict(raw: dict) -> PlanConfig:
    """Validate a JSON object (partial allowed) into a full PlanConfig."""
    raw = _object(raw, "")
    _reject_unknown(raw, DEFAULT_CONFIG, "")
    merged = _merge(DEFAULT_CONFIG, raw)
    for section in ("features", "strokes", "painterly", "hybrid", "stylize", "render"):
        _object(merged[section], f"/{section}")
    try:
        return PlanConfig(
            rng_seed=_integer(merged, "rng_seed", ""),
            refiner=_choice(merged, "refiner", "", ("identity", "local_search")),
            brush=BrushModel(_choice(merged, "brush", "", [b.value for b in BrushModel])),
            features=_parse_features(merged["features"]),
            strokes=_parse_strokes(merged["strokes"]),
            painterly=_parse_painterly(merged["painterly"]),
            hybrid=_parse_hybrid(merged["hybrid"]),
            stylize=_parse_stylize(merged["stylize"]),
            render=_parse_render(merged["render"]),
            exclusions=_parse_exclusions(merged["exclusions"]),
        )
    except ConfigError:
        raise
    except RasterError as exc:
        raise ConfigError("", str(exc)) from exc


def config_to_dict(config: PlanConfig) -> dict:
    return {
        "rng_seed": config.rng_seed,
        "refiner": config.refiner,
        "brush": config.brush.value,
        "features": {
            "alpha_e": config.features.weights.alpha_e,
            "beta_s": config.features.weights.beta_s,
            "gamma_d": config.features.weights.gamma_d,
            "edge_threshold": config.features.edge_threshold,
            "density_sigma": config.features.density_sigma,
            "candidate_count": config.features.candidate_count,
        },
        "strokes": {
            "base_size": config.strokes.base_size,
            "base_length": config.strokes.base_length,
            "base_thickness": config.strokes.base_thickness,
            "opacity": config.strokes.opacity,
            "texture": config.strokes.texture,
            "scale_at_zero_density": config.strokes.scale_at_zero_density,
            "scale_at_full_density": config.strokes.scale_at_full_density,
            "follow_contours": config.strokes.follow_contours,
        },
        "painterly": {
            "layers": [
                {
                    "radius": spec.radius,
                    "error_threshold": spec.error_threshold,
                    "grid_step_factor": spec.grid_step_factor,
                }
                for spec in config.painterly.layers
            ],
            "quantize_levels": config.painterly.quantize_levels,
            "max_stroke_len": config.painterly.max_stroke_len,
            "min_stroke_len": config.painterly.min_stroke_len,
            "opacity": config.painterly.opacity,
            "curvature_filter": config.painterly.curvature_filter,
            "rng_seed": config.painterly.rng_seed,
        },
        "hybrid": {
            "blend_gamma": config.hybrid.blend_gamma,
            "lambda_priority": config.hybrid.lambda_priority,
            "q_saliency": config.hybrid.q_saliency,
            "q_edge": config.hybrid.q_edge,
            "q_penalty": config.hybrid.q_penalty,
            "q_discard_threshold": config.hybrid.q_discard_threshold,
            "merge_radius": config.hybrid.merge_radius,
            "stroke_budget": config.hybrid.stroke_budget,
        },
        "stylize": {
            "alpha_content": config.stylize.alpha_content,
            "beta_style": config.stylize.beta_style,
            "eta": config.stylize.eta,
            "iterations": config.stylize.iterations,
            "init": config.stylize.init,
            "noise_seed": config.stylize.noise_seed,
        },
        "render": {
            "background": list(config.render.background),
            "order_policy": config.render.order_policy,
            "post": {
                "denoise_radius": config.render.post.denoise_radius,
                "edge_enhance_amount": config.render.post.edge_enhance_amount,
                "harmonize_strength": config.render.post.harmonize_strength,
            },
        },
        "exclusions": None
        if config.exclusions is None
        else {
            "plan_hash": config.exclusions.plan_hash,
            "indices": list(config.exclusions.indices),
        },
    }


def config_to_json(config: PlanConfig) -> str:
    """Canonical serialized form: sorted keys, two-space indent."""
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True, allow_nan=True) + "\n"


def load_config(path: str) -> PlanConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def parse_config(text: str) -> PlanConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(config: PlanConfig, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_json(config))
