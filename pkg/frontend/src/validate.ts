/** Client-side config validation mirroring the service schema.
 *
 * The studio never submits a config the service would reject: every slider
 * edit is checked here first, and violations surface as inline messages
 * keyed by the same JSON pointers the service uses.
 */

import type { PlanConfigDoc } from "./types.js";

export interface Violation {
  pointer: string;
  message: string;
}

interface NumberRule {
  pointer: string;
  get: (c: PlanConfigDoc) => number;
  min?: number;
  max?: number;
  integer?: boolean;
}

const NUMBER_RULES: NumberRule[] = [
  { pointer: "/rng_seed", get: (c) => c.rng_seed, integer: true },
  { pointer: "/features/alpha_e", get: (c) => c.features.alpha_e, min: 0 },
  { pointer: "/features/beta_s", get: (c) => c.features.beta_s, min: 0 },
  { pointer: "/features/gamma_d", get: (c) => c.features.gamma_d, min: 0 },
  { pointer: "/features/edge_threshold", get: (c) => c.features.edge_threshold, min: 0, max: 1 },
  { pointer: "/features/density_sigma", get: (c) => c.features.density_sigma, min: 0 },
  {
    pointer: "/features/candidate_count",
    get: (c) => c.features.candidate_count,
    min: 1,
    integer: true,
  },
  { pointer: "/strokes/base_size", get: (c) => c.strokes.base_size, min: 1e-6 },
  { pointer: "/strokes/base_length", get: (c) => c.strokes.base_length, min: 0 },
  { pointer: "/strokes/base_thickness", get: (c) => c.strokes.base_thickness, min: 1e-6 },
  { pointer: "/strokes/opacity", get: (c) => c.strokes.opacity, min: 0, max: 1 },
  {
    pointer: "/strokes/scale_at_zero_density",
    get: (c) => c.strokes.scale_at_zero_density,
    min: 1e-6,
  },
  {
    pointer: "/strokes/scale_at_full_density",
    get: (c) => c.strokes.scale_at_full_density,
    min: 1e-6,
  },
  { pointer: "/painterly/max_stroke_len", get: (c) => c.painterly.max_stroke_len, min: 1, integer: true },
  { pointer: "/painterly/min_stroke_len", get: (c) => c.painterly.min_stroke_len, min: 1, integer: true },
  { pointer: "/painterly/opacity", get: (c) => c.painterly.opacity, min: 0, max: 1 },
  { pointer: "/painterly/curvature_filter", get: (c) => c.painterly.curvature_filter, min: 0, max: 1 },
  { pointer: "/painterly/rng_seed", get: (c) => c.painterly.rng_seed, integer: true },
  { pointer: "/hybrid/blend_gamma", get: (c) => c.hybrid.blend_gamma, min: 0, max: 1 },
  { pointer: "/hybrid/lambda_priority", get: (c) => c.hybrid.lambda_priority, min: 0, max: 1 },
  { pointer: "/hybrid/q_saliency", get: (c) => c.hybrid.q_saliency, min: 0 },
  { pointer: "/hybrid/q_edge", get: (c) => c.hybrid.q_edge, min: 0 },
  { pointer: "/hybrid/q_penalty", get: (c) => c.hybrid.q_penalty, min: 0 },
  { pointer: "/hybrid/merge_radius", get: (c) => c.hybrid.merge_radius, min: 0 },
  { pointer: "/hybrid/stroke_budget", get: (c) => c.hybrid.stroke_budget, min: 1, integer: true },
  { pointer: "/stylize/alpha_content", get: (c) => c.stylize.alpha_content, min: 0 },
  { pointer: "/stylize/beta_style", get: (c) => c.stylize.beta_style, min: 0 },
  { pointer: "/stylize/eta", get: (c) => c.stylize.eta, min: 1e-12 },
  { pointer: "/stylize/iterations", get: (c) => c.stylize.iterations, min: 0, integer: true },
  { pointer: "/stylize/noise_seed", get: (c) => c.stylize.noise_seed, integer: true },
];

function checkNumber(rule: NumberRule, config: PlanConfigDoc): Violation | null {
  const value = rule.get(config);
  if (typeof value !== "number" || Number.isNaN(value)) {
    return { pointer: rule.pointer, message: "must be a number" };
  }
  if (rule.integer && !Number.isInteger(value)) {
    return { pointer: rule.pointer, message: "must be an integer" };
  }
  if (rule.min !== undefined && value < rule.min) {
    return { pointer: rule.pointer, message: `must be >= ${rule.min}` };
  }
  if (rule.max !== undefined && value > rule.max) {
    return { pointer: rule.pointer, message: `must be <= ${rule.max}` };
  }
  return null;
}

export function validateConfig(config: PlanConfigDoc): Violation[] {
  const out: Violation[] = [];
  for (const rule of NUMBER_RULES) {
    const v = checkNumber(rule, config);
    if (v) out.push(v);
  }
  const f = config.features;
  if (f.alpha_e + f.beta_s + f.gamma_d <= 0) {
    out.push({ pointer: "/features", message: "at least one feature weight must be positive" });
  }
  if (config.stylize.alpha_content + config.stylize.beta_style <= 0) {
    out.push({ pointer: "/stylize", message: "alpha_content + beta_style must be positive" });
  }
  if (!["identity", "local_search"].includes(config.refiner)) {
    out.push({ pointer: "/refiner", message: "unknown refiner" });
  }
  if (!["curved", "triangle", "rectangle", "random_raster"].includes(config.brush)) {
    out.push({ pointer: "/brush", message: "unknown brush" });
  }
  if (!["solid", "stipple", "hatch"].includes(config.strokes.texture)) {
    out.push({ pointer: "/strokes/texture", message: "unknown texture" });
  }
  if (config.painterly.min_stroke_len > config.painterly.max_stroke_len) {
    out.push({ pointer: "/painterly/min_stroke_len", message: "must be <= max_stroke_len" });
  }
  const layers = config.painterly.layers;
  if (layers.length === 0) {
    out.push({ pointer: "/painterly/layers", message: "at least one layer is required" });
  }
  layers.forEach((layer, i) => {
    if (layer.radius < 1) {
      out.push({ pointer: `/painterly/layers/${i}/radius`, message: "must be >= 1" });
    }
    if (layer.error_threshold < 0) {
      out.push({ pointer: `/painterly/layers/${i}/error_threshold`, message: "must be >= 0" });
    }
    if (layer.grid_step_factor <= 0) {
      out.push({ pointer: `/painterly/layers/${i}/grid_step_factor`, message: "must be > 0" });
    }
    if (i > 0 && layers[i - 1].radius <= layer.radius) {
      out.push({ pointer: "/painterly/layers", message: "radii must be strictly decreasing" });
    }
  });
  config.render.background.forEach((c, i) => {
    if (typeof c !== "number" || c < 0 || c > 1) {
      out.push({ pointer: `/render/background/${i}`, message: "must lie in [0,1]" });
    }
  });
  const post = config.render.post;
  if (post.denoise_radius !== null && post.denoise_radius < 0) {
    out.push({ pointer: "/render/post/denoise_radius", message: "must be >= 0" });
  }
  if (
    post.harmonize_strength !== null &&
    (post.harmonize_strength < 0 || post.harmonize_strength > 1)
  ) {
    out.push({ pointer: "/render/post/harmonize_strength", message: "must lie in [0,1]" });
  }
  if (config.painterly.quantize_levels !== null && config.painterly.quantize_levels < 2) {
    out.push({ pointer: "/painterly/quantize_levels", message: "must be >= 2" });
  }
  return out;
}

/** Read a value out of the config by JSON pointer. */
export function getByPointer(config: unknown, pointer: string): unknown {
  let node: any = config;
  for (const part of pointer.split("/").filter((p) => p.length)) {
    if (node == null) return undefined;
    node = node[part];
  }
  return node;
}

/** Build a minimal deep patch that sets one pointer to a value. */
export function pointerPatch(pointer: string, value: unknown): Record<string, unknown> {
  const parts = pointer.split("/").filter((p) => p.length);
  const root: Record<string, unknown> = {};
  let node = root;
  parts.forEach((part, i) => {
    if (i === parts.length - 1) {
      node[part] = value;
    } else {
      const child: Record<string, unknown> = {};
      node[part] = child;
      node = child;
    }
  });
  return root;
}

/** Apply a deep merge patch (objects merge, scalars and arrays replace). */
export function applyPatch<T>(base: T, patch: Record<string, unknown>): T {
  const out: any = Array.isArray(base) ? [...(base as unknown as unknown[])] : { ...base };
  for (const [key, value] of Object.entries(patch)) {
    const current = (base as any)?.[key];
    if (
      value !== null &&
      typeof value === "object" &&
      !Array.isArray(value) &&
      current !== null &&
      typeof current === "object" &&
      !Array.isArray(current)
    ) {
      out[key] = applyPatch(current, value as Record<string, unknown>);
    } else {
      out[key] = value;
    }
  }
  return out as T;
}
