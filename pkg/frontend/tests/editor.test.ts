import { describe, expect, it } from "vitest";

import {
  applyMargin,
  applyTile,
  cancelDraft,
  clickVertex,
  commitLine,
  initialState,
  markSimulated,
  removeLine,
  selectTool,
} from "../src/editor.js";
import { addLine, emptyPattern } from "../src/pattern.js";
import { GridDoc } from "../src/types.js";

const GRID: GridDoc = { kind: "square", cols: 3, rows: 2, spacing: 1 };

function fresh() {
  return initialState(emptyPattern(GRID));
}

describe("line drawing", () => {
  it("clicking vertices in sequence builds a stitching line", () => {
    let s = fresh();
    s = clickVertex(s, 0);
    s = clickVertex(s, 5);
    expect(s.draft).toEqual([0, 5]);
    s = commitLine(s);
    expect(s.doc.lines).toEqual([[0, 5]]);
    expect(s.draft).toEqual([]);
    expect(s.lastRejection).toBeNull();
  });

  it("ignores repeat clicks on the same vertex", () => {
    let s = clickVertex(fresh(), 0);
    s = clickVertex(s, 0);
    expect(s.draft).toEqual([0]);
  });

  it("rejects a conflicting line inline with the shared vertex, no doc change", () => {
    let s = initialState(addLine(emptyPattern(GRID), [0, 5]));
    const before = s.doc;
    s = clickVertex(s, 5);
    s = clickVertex(s, 9);
    s = commitLine(s);
    expect(s.doc).toBe(before); // nothing to PUT
    expect(s.lastRejection?.conflictVertex).toBe(5);
    expect(s.draft).toEqual([5, 9]); // draft kept so the user can fix it
  });

  it("rejects short drafts", () => {
    const s = commitLine(clickVertex(fresh(), 3));
    expect(s.lastRejection?.reason).toMatch(/at least 2/);
  });

  it("cancel clears draft and rejection", () => {
    let s = commitLine(clickVertex(fresh(), 3));
    s = cancelDraft(s);
    expect(s.draft).toEqual([]);
    expect(s.lastRejection).toBeNull();
  });

  it("clicks are inert under non-drawing tools", () => {
    const s = clickVertex(selectTool(fresh(), "tile"), 4);
    expect(s.draft).toEqual([]);
  });
});

describe("dirty flag", () => {
  it("set by edits, cleared by simulation", () => {
    let s = markSimulated(fresh());
    expect(s.dirty).toBe(false);
    s = commitLine(clickVertex(clickVertex(s, 0), 5));
    expect(s.dirty).toBe(true);
    s = markSimulated(s);
    expect(s.dirty).toBe(false);
    s = applyTile(s, { reps_x: 2, reps_y: 2 });
    expect(s.dirty).toBe(true);
  });

  it("rejected edits do not dirty a clean state", () => {
    let s = markSimulated(fresh());
    s = applyMargin(s, -3);
    expect(s.lastRejection?.reason).toMatch(/non-negative/);
    expect(s.dirty).toBe(false);
  });
});

describe("tool edits", () => {
  it("delete removes the line", () => {
    let s = initialState(addLine(emptyPattern(GRID), [0, 5]));
    s = removeLine(s, 0);
    expect(s.doc.lines).toEqual([]);
  });

  it("margin grows the grid and keeps lines valid", () => {
    let s = initialState(addLine(emptyPattern(GRID), [0, 5]));
    s = applyMargin(s, 1);
    expect(s.doc.grid.cols).toBe(5);
    expect(s.doc.lines).toHaveLength(1);
  });

  it("tile rejects non-positive repetitions inline", () => {
    const s = applyTile(fresh(), { reps_x: 0, reps_y: 2 });
    expect(s.lastRejection?.reason).toMatch(/>= 1/);
    expect(s.doc.tile).toBeUndefined();
  });

  it("switching tools clears draft and selection", () => {
    let s = clickVertex(fresh(), 2);
    s = selectTool(s, "margin");
    expect(s.draft).toEqual([]);
  });
});
