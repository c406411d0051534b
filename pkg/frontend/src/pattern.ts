/** Client-side pattern model: grid geometry, stitching-line edits, (de)serialization.
 *
 * Geometry here exists only so the editor can hit-test clicks and draw; all
 * numerical solving happens on the service.
 */

import {
  GridDoc,
  GridPatternDoc,
  PATTERN_VERSION,
  SolverParams,
  TileDoc,
} from "./types.js";

export class PatternError extends Error {
  constructor(message: string, public readonly pointer: string = "") {
    super(message);
  }
}

export interface Point {
  x: number;
  y: number;
}

/** Vertex id of lattice position (i, j) on a square grid with `cols` cells. */
export function squareVertexId(i: number, j: number, cols: number): number {
  return j * (cols + 1) + i;
}

export function squareVertexCount(grid: GridDoc): number {
  return (grid.cols + 1) * (grid.rows + 1);
}

/** Vertex positions of a square grid, same ordering as the service. */
export function squareVertices(grid: GridDoc): Point[] {
  const out: Point[] = [];
  for (let j = 0; j <= grid.rows; j++) {
    for (let i = 0; i <= grid.cols; i++) {
      out.push({ x: i * grid.spacing, y: j * grid.spacing });
    }
  }
  return out;
}

/** Hexagonal-grid vertex positions (flat-top hexagons in offset columns). */
export function hexVertices(grid: GridDoc): Point[] {
  const s = grid.spacing;
  const seen = new Map<string, Point>();
  for (let c = 0; c < grid.cols; c++) {
    for (let r = 0; r < grid.rows; r++) {
      const cx = c * 1.5 * s;
      const cy = (r + 0.5 * (c % 2)) * Math.sqrt(3) * s;
      for (let k = 0; k < 6; k++) {
        const p = {
          x: cx + s * Math.cos((k * Math.PI) / 3),
          y: cy + s * Math.sin((k * Math.PI) / 3),
        };
        const key = `${Math.round(p.x * 1e6)}:${Math.round(p.y * 1e6)}`;
        if (!seen.has(key)) seen.set(key, p);
      }
    }
  }
  return [...seen.values()];
}

export function gridVertices(grid: GridDoc): Point[] {
  return grid.kind === "square" ? squareVertices(grid) : hexVertices(grid);
}

/** Nearest grid vertex within `radius` of a canvas point, or null. */
export function hitTest(
  vertices: Point[],
  p: Point,
  radius: number,
): number | null {
  let best = -1;
  let bestD = radius * radius;
  vertices.forEach((v, k) => {
    const d = (v.x - p.x) ** 2 + (v.y - p.y) ** 2;
    if (d <= bestD) {
      best = k;
      bestD = d;
    }
  });
  return best >= 0 ? best : null;
}

export function emptyPattern(grid: GridDoc): GridPatternDoc {
  return { version: PATTERN_VERSION, grid: { ...grid }, lines: [] };
}

function vertexCount(doc: GridPatternDoc): number {
  if (doc.grid.kind === "square") return squareVertexCount(doc.grid);
  return hexVertices(doc.grid).length;
}

/**
 * Validate a candidate stitching line against the document.
 * Returns the conflicting vertex id if the line shares a vertex with an
 * existing line (the schema requires lines to be vertex-disjoint).
 */
export function lineConflict(
  doc: GridPatternDoc,
  line: number[],
): number | null {
  const used = new Set<number>();
  for (const existing of doc.lines) for (const v of existing) used.add(v);
  for (const v of line) if (used.has(v)) return v;
  const dup = new Set<number>();
  for (const v of line) {
    if (dup.has(v)) return v;
    dup.add(v);
  }
  return null;
}

export function addLine(doc: GridPatternDoc, line: number[]): GridPatternDoc {
  if (line.length < 2) {
    throw new PatternError("a stitching line needs at least 2 vertices");
  }
  const n = vertexCount(doc);
  for (const v of line) {
    if (!Number.isInteger(v) || v < 0 || v >= n) {
      throw new PatternError(`vertex ${v} does not exist`, "/lines");
    }
  }
  const clash = lineConflict(doc, line);
  if (clash !== null) {
    throw new PatternError(
      `line would share vertex ${clash} with an existing line`,
      "/lines",
    );
  }
  return { ...doc, lines: [...doc.lines, [...line]] };
}

export function deleteLine(doc: GridPatternDoc, index: number): GridPatternDoc {
  if (index < 0 || index >= doc.lines.length) {
    throw new PatternError(`no stitching line ${index}`, "/lines");
  }
  return { ...doc, lines: doc.lines.filter((_, k) => k !== index) };
}

/** Grow a square grid by `cells` plain cells on every side, re-indexing lines. */
export function addMargin(doc: GridPatternDoc, cells: number): GridPatternDoc {
  if (doc.grid.kind !== "square") {
    throw new PatternError("margins only apply to square grids", "/grid/kind");
  }
  if (!Number.isInteger(cells) || cells < 0) {
    throw new PatternError("margin must be a non-negative integer");
  }
  if (cells === 0) return doc;
  const { cols, rows } = doc.grid;
  const newCols = cols + 2 * cells;
  const lines = doc.lines.map((line) =>
    line.map((v) => {
      const i = v % (cols + 1);
      const j = Math.floor(v / (cols + 1));
      return squareVertexId(i + cells, j + cells, newCols);
    }),
  );
  return {
    ...doc,
    grid: { ...doc.grid, cols: newCols, rows: rows + 2 * cells },
    lines,
  };
}

export function setTile(
  doc: GridPatternDoc,
  tile: TileDoc | null,
): GridPatternDoc {
  const out = { ...doc };
  if (tile === null) {
    delete out.tile;
  } else {
    if (tile.reps_x < 1 || tile.reps_y < 1) {
      throw new PatternError("tile repetitions must be >= 1", "/tile");
    }
    out.tile = { ...tile };
  }
  return out;
}

export function setRadialDeform(
  doc: GridPatternDoc,
  innerRadius: number | null,
  angularSpan: number = Math.PI,
): GridPatternDoc {
  const grid = { ...doc.grid };
  if (innerRadius === null) {
    delete grid.deformation;
  } else {
    grid.deformation = { inner_radius: innerRadius, angular_span: angularSpan };
  }
  return { ...doc, grid };
}

export function setParams(
  doc: GridPatternDoc,
  params: SolverParams,
): GridPatternDoc {
  const merged: SolverParams = { ...(doc.params ?? {}), ...params };
  for (const key of Object.keys(merged) as (keyof SolverParams)[]) {
    if (merged[key] === undefined) delete merged[key];
  }
  return { ...doc, params: merged };
}

/** Stable export: sorted keys so identical patterns give identical text. */
export function serializePattern(doc: GridPatternDoc): string {
  const sort = (value: unknown): unknown => {
    if (Array.isArray(value)) return value.map(sort);
    if (value && typeof value === "object") {
      const out: Record<string, unknown> = {};
      for (const key of Object.keys(value as object).sort()) {
        out[key] = sort((value as Record<string, unknown>)[key]);
      }
      return out;
    }
    return value;
  };
  return JSON.stringify(sort(doc), null, 2) + "\n";
}

export function parsePattern(text: string): GridPatternDoc {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (exc) {
    throw new PatternError(`not valid JSON: ${exc}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new PatternError("expected a JSON object");
  }
  const doc = raw as Partial<GridPatternDoc>;
  if (doc.version !== PATTERN_VERSION) {
    throw new PatternError(
      `unsupported version ${doc.version}; this editor reads version ${PATTERN_VERSION}`,
      "/version",
    );
  }
  if (!doc.grid || (doc.grid.kind !== "square" && doc.grid.kind !== "hexagonal")) {
    throw new PatternError(
      "the editor opens grid patterns only",
      "/grid/kind",
    );
  }
  if (!Array.isArray(doc.lines)) {
    throw new PatternError("expected a list of stitching lines", "/lines");
  }
  // rebuild via the editing API so every line passes the same validation
  let out = emptyPattern(doc.grid as GridDoc);
  for (const line of doc.lines) out = addLine(out, line);
  if (doc.tile) out = setTile(out, doc.tile);
  if (doc.params) out = setParams(out, doc.params);
  return out;
}
