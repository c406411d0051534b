/** Editor state machine: tools, in-progress line, dirty tracking.
 *
 * Pure state + transitions so the behavior is testable without a DOM; the
 * canvas layer just forwards clicks and re-renders on change.
 */

import {
  addLine,
  addMargin,
  deleteLine,
  lineConflict,
  PatternError,
  setRadialDeform,
  setTile,
} from "./pattern.js";
import { GridPatternDoc, TileDoc } from "./types.js";

export type Tool =
  | "draw_line"
  | "delete_line"
  | "tile"
  | "margin"
  | "radial_deform"
  | "insert_pleat";

export interface Rejection {
  reason: string;
  /** vertex to highlight when a committed line clashes with an existing one */
  conflictVertex?: number;
}

export interface EditorState {
  doc: GridPatternDoc;
  tool: Tool;
  /** vertices clicked so far while drawing a line */
  draft: number[];
  /** selected line index (delete tool) */
  selectedLine: number | null;
  /** true whenever the doc changed since the last completed simulation */
  dirty: boolean;
  lastRejection: Rejection | null;
}

export function initialState(doc: GridPatternDoc): EditorState {
  return {
    doc,
    tool: "draw_line",
    draft: [],
    selectedLine: null,
    dirty: true,
    lastRejection: null,
  };
}

export function selectTool(state: EditorState, tool: Tool): EditorState {
  return { ...state, tool, draft: [], selectedLine: null, lastRejection: null };
}

/** A grid-vertex click under the current tool. */
export function clickVertex(state: EditorState, vertex: number): EditorState {
  if (state.tool !== "draw_line") return state;
  if (state.draft.includes(vertex)) return state; // ignore double clicks
  return { ...state, draft: [...state.draft, vertex], lastRejection: null };
}

/**
 * Commit the in-progress line. Conflicting lines are rejected inline (the
 * shared vertex is surfaced for highlighting) and no document change — and
 * therefore no PUT — happens.
 */
export function commitLine(state: EditorState): EditorState {
  if (state.draft.length < 2) {
    return {
      ...state,
      lastRejection: { reason: "a stitching line needs at least 2 vertices" },
    };
  }
  const clash = lineConflict(state.doc, state.draft);
  if (clash !== null) {
    return {
      ...state,
      lastRejection: {
        reason: `vertex ${clash} is already stitched by another line`,
        conflictVertex: clash,
      },
    };
  }
  return {
    ...state,
    doc: addLine(state.doc, state.draft),
    draft: [],
    dirty: true,
    lastRejection: null,
  };
}

export function cancelDraft(state: EditorState): EditorState {
  return { ...state, draft: [], lastRejection: null };
}

function tryEdit(
  state: EditorState,
  edit: (doc: GridPatternDoc) => GridPatternDoc,
): EditorState {
  try {
    return {
      ...state,
      doc: edit(state.doc),
      dirty: true,
      selectedLine: null,
      lastRejection: null,
    };
  } catch (exc) {
    if (exc instanceof PatternError) {
      return { ...state, lastRejection: { reason: exc.message } };
    }
    throw exc;
  }
}

export function removeLine(state: EditorState, index: number): EditorState {
  return tryEdit(state, (doc) => deleteLine(doc, index));
}

export function applyMargin(state: EditorState, cells: number): EditorState {
  return tryEdit(state, (doc) => addMargin(doc, cells));
}

export function applyTile(
  state: EditorState,
  tile: TileDoc | null,
): EditorState {
  return tryEdit(state, (doc) => setTile(doc, tile));
}

export function applyRadialDeform(
  state: EditorState,
  innerRadius: number | null,
  angularSpan?: number,
): EditorState {
  return tryEdit(state, (doc) => setRadialDeform(doc, innerRadius, angularSpan));
}

/** Called after a simulation completes for the current doc. */
export function markSimulated(state: EditorState): EditorState {
  return { ...state, dirty: false };
}
