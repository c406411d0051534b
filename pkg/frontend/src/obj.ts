/** Minimal OBJ parsing for the meshes the service serves (v/f lines, with
 * optional per-vertex RGB appended to v lines). */

export interface ParsedMesh {
  /** flat xyz triples */
  positions: Float32Array;
  /** flat rgb triples, or null when the file has no vertex colors */
  colors: Float32Array | null;
  /** flat triangle indices (0-based) */
  indices: Uint32Array;
}

export class ObjError extends Error {}

export function parseObj(text: string): ParsedMesh {
  const positions: number[] = [];
  const colors: number[] = [];
  const indices: number[] = [];
  let sawColor = false;
  let vertexCount = 0;

  for (const [lineNo, raw] of text.split("\n").entries()) {
    const line = raw.trim();
    if (line === "" || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    if (parts[0] === "v") {
      const nums = parts.slice(1).map(Number);
      if ((nums.length !== 3 && nums.length !== 6) || nums.some(Number.isNaN)) {
        throw new ObjError(`line ${lineNo + 1}: malformed vertex`);
      }
      positions.push(nums[0]!, nums[1]!, nums[2]!);
      if (nums.length === 6) {
        sawColor = true;
        colors.push(nums[3]!, nums[4]!, nums[5]!);
      } else if (sawColor) {
        throw new ObjError(`line ${lineNo + 1}: mixed colored/uncolored vertices`);
      }
      vertexCount++;
    } else if (parts[0] === "f") {
      const ids = parts.slice(1).map((p) => Number(p.split("/")[0]) - 1);
      if (ids.length < 3 || ids.some((i) => Number.isNaN(i))) {
        throw new ObjError(`line ${lineNo + 1}: malformed face`);
      }
      for (const i of ids) {
        if (i < 0 || i >= vertexCount) {
          throw new ObjError(`line ${lineNo + 1}: face references vertex ${i + 1}`);
        }
      }
      // fan-triangulate polygons (the service emits triangles already)
      for (let k = 1; k + 1 < ids.length; k++) {
        indices.push(ids[0]!, ids[k]!, ids[k + 1]!);
      }
    }
  }
  if (vertexCount === 0) throw new ObjError("no vertices");
  return {
    positions: new Float32Array(positions),
    colors: sawColor ? new Float32Array(colors) : null,
    indices: new Uint32Array(indices),
  };
}

/** Vertex z-values, the channel the height overlay recolors from. */
export function heightChannel(mesh: ParsedMesh): Float32Array {
  const out = new Float32Array(mesh.positions.length / 3);
  for (let k = 0; k < out.length; k++) out[k] = mesh.positions[3 * k + 2]!;
  return out;
}
