/** Pattern-file documents exchanged with the design service (version 1). */

export const PATTERN_VERSION = 1;

export interface RadialDeformSpec {
  inner_radius: number;
  angular_span: number;
}

export interface GridDoc {
  kind: "square" | "hexagonal";
  cols: number;
  rows: number;
  spacing: number;
  deformation?: RadialDeformSpec;
}

export interface TileDoc {
  reps_x: number;
  reps_y: number;
  shift?: number;
}

export interface SolverParams {
  w_embed?: number;
  w_height?: number;
  subdivision?: number;
  /** progressive stitching schedule for the deformation baseline */
  epsilon_schedule?: number[];
}

/** Grid pattern: stitching lines as vertex-index lists. */
export interface GridPatternDoc {
  version: number;
  grid: GridDoc;
  lines: number[][];
  tile?: TileDoc;
  params?: SolverParams;
}

export interface SessionInfo {
  id: string;
  pattern: GridPatternDoc;
  results: DiagnosticsDoc | null;
  updated_at: string;
}

export interface ConstraintReportDoc {
  classification: "well" | "under" | "over" | "inconclusive";
  slack_pairs: [number, number, number][];
  residual: number;
  dof_note: string;
}

export interface DiagnosticsDoc {
  converged: boolean;
  embedding: {
    underlay_energy: number;
    pleat_energy: number;
    iterations: Record<string, number>;
    converged: Record<string, boolean>;
  };
  arap_energy: number;
  constraints: ConstraintReportDoc;
  shrinkage: { ratio_x: number; ratio_y: number; area_ratio: number };
}

export interface ApiError {
  pointer?: string;
  message: string;
}
