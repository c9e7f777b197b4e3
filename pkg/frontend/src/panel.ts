/** Declarative parameter panel: one spec per steerable config field. */

export type FieldKind = "slider" | "int" | "number" | "choice" | "toggle";

export interface FieldSpec {
  pointer: string;
  label: string;
  kind: FieldKind;
  min?: number;
  max?: number;
  step?: number;
  choices?: string[];
  group: string;
}

export const PANEL_FIELDS: FieldSpec[] = [
  { pointer: "/hybrid/blend_gamma", label: "blend γ (refiner influence)", kind: "slider", min: 0, max: 1, step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/lambda_priority", label: "λ (saliency vs edges)", kind: "slider", min: 0, max: 1, step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/q_saliency", label: "Q saliency weight", kind: "slider", min: 0, max: 2, step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/q_edge", label: "Q edge weight", kind: "slider", min: 0, max: 2, step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/q_penalty", label: "Q deviation penalty", kind: "slider", min: 0, max: 2, step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/q_discard_threshold", label: "Q discard threshold", kind: "number", step: 0.01, group: "Hybrid" },
  { pointer: "/hybrid/merge_radius", label: "merge radius (px)", kind: "slider", min: 0, max: 32, step: 0.5, group: "Hybrid" },
  { pointer: "/hybrid/stroke_budget", label: "stroke budget", kind: "int", min: 1, max: 5000, step: 1, group: "Hybrid" },
  { pointer: "/features/alpha_e", label: "α edge weight", kind: "slider", min: 0, max: 4, step: 0.05, group: "Features" },
  { pointer: "/features/beta_s", label: "β saliency weight", kind: "slider", min: 0, max: 4, step: 0.05, group: "Features" },
  { pointer: "/features/gamma_d", label: "γ density weight", kind: "slider", min: 0, max: 4, step: 0.05, group: "Features" },
  { pointer: "/features/edge_threshold", label: "edge threshold", kind: "slider", min: 0, max: 1, step: 0.01, group: "Features" },
  { pointer: "/features/density_sigma", label: "density smoothing σ", kind: "slider", min: 0, max: 16, step: 0.5, group: "Features" },
  { pointer: "/features/candidate_count", label: "candidate count", kind: "int", min: 1, max: 5000, step: 1, group: "Features" },
  { pointer: "/strokes/base_size", label: "base size (px)", kind: "slider", min: 0.5, max: 32, step: 0.5, group: "Strokes" },
  { pointer: "/strokes/base_length", label: "base length (px)", kind: "slider", min: 0, max: 64, step: 0.5, group: "Strokes" },
  { pointer: "/strokes/base_thickness", label: "base thickness (px)", kind: "slider", min: 0.5, max: 32, step: 0.5, group: "Strokes" },
  { pointer: "/strokes/opacity", label: "stroke opacity", kind: "slider", min: 0, max: 1, step: 0.01, group: "Strokes" },
  { pointer: "/strokes/texture", label: "texture", kind: "choice", choices: ["solid", "stipple", "hatch"], group: "Strokes" },
  { pointer: "/strokes/follow_contours", label: "follow contours", kind: "toggle", group: "Strokes" },
  { pointer: "/refiner", label: "refiner", kind: "choice", choices: ["identity", "local_search"], group: "Pipeline" },
  { pointer: "/brush", label: "brush model", kind: "choice", choices: ["curved", "triangle", "rectangle", "random_raster"], group: "Pipeline" },
  { pointer: "/rng_seed", label: "random seed", kind: "int", min: 0, max: 2 ** 31, step: 1, group: "Pipeline" },
  { pointer: "/painterly/layers/0/radius", label: "layer 1 radius", kind: "slider", min: 1, max: 64, step: 1, group: "Painterly layers" },
  { pointer: "/painterly/layers/1/radius", label: "layer 2 radius", kind: "slider", min: 1, max: 64, step: 1, group: "Painterly layers" },
  { pointer: "/painterly/layers/2/radius", label: "layer 3 radius", kind: "slider", min: 1, max: 64, step: 1, group: "Painterly layers" },
  { pointer: "/render/post/denoise_radius", label: "denoise radius", kind: "number", min: 0, step: 0.5, group: "Post-processing" },
  { pointer: "/render/post/edge_enhance_amount", label: "edge enhance", kind: "number", step: 0.1, group: "Post-processing" },
  { pointer: "/render/post/harmonize_strength", label: "harmonize", kind: "slider", min: 0, max: 1, step: 0.01, group: "Post-processing" },
];
