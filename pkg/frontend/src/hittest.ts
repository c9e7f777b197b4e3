/** Stroke footprint hit-testing for the preview overlay.
 *
 * Strokes render bottom-up in ascending priority, so a click selects the
 * topmost hit: the last stroke in render order whose footprint covers the
 * point. Footprints mirror the renderer's curved-brush geometry (capsule of
 * radius `size` around the oriented spine).
 */

import type { PlanDoc, StrokeDoc } from "./types.js";

export function distanceToSpine(stroke: StrokeDoc, x: number, y: number): number {
  const half = stroke.len / 2;
  const dx = Math.cos(stroke.theta);
  const dy = Math.sin(stroke.theta);
  const ax = stroke.x - half * dx;
  const ay = stroke.y - half * dy;
  const bx = stroke.x + half * dx;
  const by = stroke.y + half * dy;
  const ex = bx - ax;
  const ey = by - ay;
  const seg2 = ex * ex + ey * ey;
  let t = 0;
  if (seg2 > 0) {
    t = Math.min(Math.max(((x - ax) * ex + (y - ay) * ey) / seg2, 0), 1);
  }
  const px = ax + t * ex;
  const py = ay + t * ey;
  return Math.hypot(x - px, y - py);
}

export function strokeCovers(stroke: StrokeDoc, x: number, y: number): boolean {
  return distanceToSpine(stroke, x, y) <= stroke.size + 0.5;
}

/** Render order of the plan: ascending priority, stable on ties. */
export function renderOrder(plan: PlanDoc): number[] {
  return plan.strokes
    .map((stroke, index) => ({ stroke, index }))
    .sort((a, b) => a.stroke.priority - b.stroke.priority || a.index - b.index)
    .map((entry) => entry.index);
}

/** Index (into plan.strokes) of the topmost stroke at (x, y), or null. */
export function hitTest(
  plan: PlanDoc,
  x: number,
  y: number,
  excluded: ReadonlySet<number> = new Set(),
): number | null {
  const order = renderOrder(plan);
  for (let i = order.length - 1; i >= 0; i--) {
    const index = order[i];
    if (excluded.has(index)) continue;
    if (strokeCovers(plan.strokes[index], x, y)) {
      return index;
    }
  }
  return null;
}

/** Human-readable attribute card for the inspector. */
export function describeStroke(stroke: StrokeDoc): Record<string, string> {
  const degrees = (stroke.theta * 180) / Math.PI;
  return {
    anchor: `(${stroke.x.toFixed(1)}, ${stroke.y.toFixed(1)})`,
    orientation: `${degrees.toFixed(1)}°`,
    length: `${stroke.len.toFixed(1)} px`,
    thickness: `${stroke.thick.toFixed(1)} px`,
    size: `${stroke.size.toFixed(1)} px`,
    color: `rgba(${stroke.rgba.map((c) => c.toFixed(3)).join(", ")})`,
    opacity: stroke.rgba[3].toFixed(3),
    texture: stroke.texture,
    weight: stroke.weight.toFixed(4),
    priority: stroke.priority.toFixed(4),
  };
}
