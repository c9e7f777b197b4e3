/** Shared document shapes mirroring the service's JSON contracts. */

export interface PostProcessingDoc {
  denoise_radius: number | null;
  edge_enhance_amount: number | null;
  harmonize_strength: number | null;
}

export interface PlanConfigDoc {
  rng_seed: number;
  refiner: "identity" | "local_search";
  brush: "curved" | "triangle" | "rectangle" | "random_raster";
  features: {
    alpha_e: number;
    beta_s: number;
    gamma_d: number;
    edge_threshold: number;
    density_sigma: number;
    candidate_count: number;
  };
  strokes: {
    base_size: number;
    base_length: number;
    base_thickness: number;
    opacity: number;
    texture: "solid" | "stipple" | "hatch";
    scale_at_zero_density: number;
    scale_at_full_density: number;
    follow_contours: boolean;
  };
  painterly: {
    layers: { radius: number; error_threshold: number; grid_step_factor: number }[];
    quantize_levels: number | null;
    max_stroke_len: number;
    min_stroke_len: number;
    opacity: number;
    curvature_filter: number;
    rng_seed: number;
  };
  hybrid: {
    blend_gamma: number;
    lambda_priority: number;
    q_saliency: number;
    q_edge: number;
    q_penalty: number;
    q_discard_threshold: number;
    merge_radius: number;
    stroke_budget: number;
  };
  stylize: {
    alpha_content: number;
    beta_style: number;
    eta: number;
    iterations: number;
    init: "content" | "noise";
    noise_seed: number;
  };
  render: {
    background: [number, number, number, number];
    order_policy: "priority_ascending" | "input_order";
    post: PostProcessingDoc;
  };
  exclusions: { plan_hash: string; indices: number[] } | null;
}

/** A partial, deep config patch as sent to the replan endpoint. */
export type ConfigPatch = { [key: string]: unknown };

export interface StrokeDoc {
  x: number;
  y: number;
  theta: number;
  len: number;
  thick: number;
  size: number;
  rgba: [number, number, number, number];
  texture: string;
  weight: number;
  priority: number;
}

export interface PlanDoc {
  version: number;
  image: { w: number; h: number };
  strokes: StrokeDoc[];
}

export interface JobResultMeta {
  stroke_count: number;
  plan_hash: string;
  timings: Record<string, number>;
}

export interface JobView {
  id: string;
  state: "queued" | "running" | "done" | "failed";
  config: ConfigPatch;
  error: string | null;
  result: JobResultMeta | null;
}

export function defaultConfig(): PlanConfigDoc {
  return {
    rng_seed: 0,
    refiner: "local_search",
    brush: "curved",
    features: {
      alpha_e: 1.0,
      beta_s: 1.0,
      gamma_d: 1.0,
      edge_threshold: 0.1,
      density_sigma: 4.0,
      candidate_count: 400,
    },
    strokes: {
      base_size: 6.0,
      base_length: 12.0,
      base_thickness: 4.0,
      opacity: 1.0,
      texture: "solid",
      scale_at_zero_density: 1.0,
      scale_at_full_density: 0.5,
      follow_contours: true,
    },
    painterly: {
      layers: [
        { radius: 8.0, error_threshold: 0.1, grid_step_factor: 1.0 },
        { radius: 4.0, error_threshold: 0.1, grid_step_factor: 1.0 },
        { radius: 2.0, error_threshold: 0.1, grid_step_factor: 1.0 },
      ],
      quantize_levels: null,
      max_stroke_len: 16,
      min_stroke_len: 4,
      opacity: 1.0,
      curvature_filter: 1.0,
      rng_seed: 0,
    },
    hybrid: {
      blend_gamma: 0.5,
      lambda_priority: 0.5,
      q_saliency: 0.5,
      q_edge: 0.4,
      q_penalty: 0.1,
      q_discard_threshold: 0.0,
      merge_radius: 4.0,
      stroke_budget: 400,
    },
    stylize: {
      alpha_content: 1.0,
      beta_style: 10000.0,
      eta: 0.5,
      iterations: 200,
      init: "content",
      noise_seed: 0,
    },
    render: {
      background: [1.0, 1.0, 1.0, 1.0],
      order_policy: "priority_ascending",
      post: {
        denoise_radius: null,
        edge_enhance_amount: null,
        harmonize_strength: null,
      },
    },
    exclusions: null,
  };
}
