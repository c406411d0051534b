/** Client-side overlay coloring: scalar fields to vertex RGB.
 *
 * Overlay toggles recolor locally from channels already in hand — no
 * re-request to the service.
 */

export type Rgb = [number, number, number];

/** Blue-to-red ramp on [0, 1] (matches the service's OBJ coloring). */
export function ramp(t: number): Rgb {
  const c = Math.min(Math.max(t, 0), 1);
  return [c, 0.25 + 0.5 * (1 - Math.abs(2 * c - 1)), 1 - c];
}

/** Normalize a scalar field and map it through the ramp; flat fields get the
 * ramp midpoint everywhere. */
export function fieldColors(values: ArrayLike<number>): Float32Array {
  const n = values.length;
  const out = new Float32Array(3 * n);
  let lo = Infinity;
  let hi = -Infinity;
  for (let k = 0; k < n; k++) {
    const v = values[k]!;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo;
  for (let k = 0; k < n; k++) {
    const t = span > 0 ? (values[k]! - lo) / span : 0.5;
    const [r, g, b] = ramp(t);
    out[3 * k] = r;
    out[3 * k + 1] = g;
    out[3 * k + 2] = b;
  }
  return out;
}

/** Colors for embedded smocked-graph display: underlay vs pleat elements. */
export const GRAPH_PALETTE = {
  underlayNode: "#e91e8c", // pink
  underlayEdge: "#2e7d32", // green
  pleatNode: "#1565c0", // blue
  pleatEdge: "#f9a825", // yellow
} as const;
