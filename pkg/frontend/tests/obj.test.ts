import { describe, expect, it } from "vitest";

import { heightChannel, ObjError, parseObj } from "../src/obj.js";
import { fieldColors, ramp } from "../src/overlays.js";

const PLAIN = `v 0.0 0.0 0.0
v 1.0 0.0 0.5
v 0.0 1.0 1.0
f 1 2 3
`;

const COLORED = `v 0 0 0 1 0 0
v 1 0 0 0 1 0
v 0 1 0 0 0 1
v 1 1 0 1 1 1
f 1 2 3 4
`;

describe("parseObj", () => {
  it("reads vertices and 1-indexed faces", () => {
    const mesh = parseObj(PLAIN);
    expect(mesh.positions).toEqual(new Float32Array([0, 0, 0, 1, 0, 0.5, 0, 1, 1]));
    expect(mesh.indices).toEqual(new Uint32Array([0, 1, 2]));
    expect(mesh.colors).toBeNull();
  });

  it("reads vertex colors and fan-triangulates quads", () => {
    const mesh = parseObj(COLORED);
    expect(mesh.colors).toEqual(
      new Float32Array([1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1]),
    );
    expect(mesh.indices).toEqual(new Uint32Array([0, 1, 2, 0, 2, 3]));
  });

  it("skips comments and blank lines", () => {
    const mesh = parseObj("# header\n\n" + PLAIN);
    expect(mesh.positions).toHaveLength(9);
  });

  it("rejects malformed input", () => {
    expect(() => parseObj("")).toThrow(ObjError);
    expect(() => parseObj("v 1 2\nf 1 1 1\n")).toThrow(/malformed vertex/);
    expect(() => parseObj("v 0 0 0\nf 1 2 3\n")).toThrow(/references vertex/);
    expect(() => parseObj("v 0 0 0 1 0 0\nv 0 0 1\n")).toThrow(/mixed/);
  });

  it("exposes the height channel for overlay recoloring", () => {
    expect(heightChannel(parseObj(PLAIN))).toEqual(new Float32Array([0, 0.5, 1]));
  });
});

describe("overlay colors", () => {
  it("ramp endpoints are blue and red", () => {
    expect(ramp(0)).toEqual([0, 0.25, 1]);
    expect(ramp(1)).toEqual([1, 0.25, 0]);
    expect(ramp(2)).toEqual(ramp(1)); // clamps
  });

  it("normalizes the field before coloring", () => {
    const a = fieldColors([0, 1]);
    const b = fieldColors([10, 20]);
    expect(a).toEqual(b);
  });

  it("flat fields get the ramp midpoint", () => {
    const c = fieldColors([7, 7, 7]);
    const mid = ramp(0.5);
    expect([c[0], c[1], c[2]]).toEqual(mid);
    expect([c[6], c[7], c[8]]).toEqual(mid);
  });
});
