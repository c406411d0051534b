"""Pattern files (JSON), Wavefront OBJ export, canonical serialization.

The pattern file is a small JSON document (version 1). Grid patterns carry a
grid description plus stitching lines as vertex-index lists; grid-free
patterns omit the grid and give the lines as coordinate polylines instead.
All output is canonical -- keys sorted, floats as shortest round-trip
decimals -- so identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json

import numpy as np

from .arap import ArapConfig, SmockedDesign
from .embedding import EmbedParams
from .errors import SchemaError
from .gridfree import GridFreeInput
from .pattern import (GridSpec, RadialDeform, SmockingPattern, StitchingLine,
                      build_grid, tile_unit)

PATTERN_VERSION = 1


def _err(pointer, message):
    raise SchemaError(pointer, message)


def _expect(cond, pointer, message):
    if not cond:
        _err(pointer, message)


def _as_number(value, pointer):
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            pointer, "expected a number")
    return float(value)


def _as_int(value, pointer):
    _expect(isinstance(value, int) and not isinstance(value, bool),
            pointer, "expected an integer")
    return value


def _as_point(value, pointer):
    _expect(isinstance(value, list) and len(value) == 2, pointer,
            "expected a 2-element [x, y] list")
    return [_as_number(value[k], f"{pointer}/{k}") for k in range(2)]


def _parse_grid(doc, pointer):
    _expect(isinstance(doc, dict), pointer, "expected an object")
    kind = doc.get("kind")
    _expect(kind in ("square", "hexagonal", "explicit"), f"{pointer}/kind",
            "kind must be 'square', 'hexagonal', or 'explicit'")
    if kind == "explicit":
        verts = doc.get("vertices")
        _expect(isinstance(verts, list) and len(verts) >= 1,
                f"{pointer}/vertices", "expected a non-empty list of points")
        vertices = np.array(
            [_as_point(p, f"{pointer}/vertices/{k}") for k, p in enumerate(verts)]
        )
        edges = doc.get("edges")
        _expect(isinstance(edges, list), f"{pointer}/edges", "expected a list")
        out = []
        for k, e in enumerate(edges):
            _expect(isinstance(e, list) and len(e) == 2, f"{pointer}/edges/{k}",
                    "expected a 2-element [i, j] list")
            a = _as_int(e[0], f"{pointer}/edges/{k}/0")
            b = _as_int(e[1], f"{pointer}/edges/{k}/1")
            for idx, v in ((0, a), (1, b)):
                _expect(0 <= v < len(vertices), f"{pointer}/edges/{k}/{idx}",
                        f"vertex {v} does not exist")
            out.append((a, b))
        return GridSpec(kind="explicit", vertices=vertices,
                        edges=np.array(out, dtype=int).reshape(-1, 2))
    cols = _as_int(doc.get("cols", 1), f"{pointer}/cols")
    rows = _as_int(doc.get("rows", 1), f"{pointer}/rows")
    _expect(cols >= 1, f"{pointer}/cols", "cols must be >= 1")
    _expect(rows >= 1, f"{pointer}/rows", "rows must be >= 1")
    spacing = _as_number(doc.get("spacing", 1.0), f"{pointer}/spacing")
    _expect(spacing > 0, f"{pointer}/spacing", "spacing must be > 0")
    deform = None
    if doc.get("deformation") is not None:
        d = doc["deformation"]
        _expect(isinstance(d, dict), f"{pointer}/deformation", "expected an object")
        deform = RadialDeform(
            inner_radius=_as_number(d.get("inner_radius", 1.0),
                                    f"{pointer}/deformation/inner_radius"),
            angular_span=_as_number(d.get("angular_span", 3.141592653589793),
                                    f"{pointer}/deformation/angular_span"),
        )
    return GridSpec(kind=kind, cols=cols, rows=rows, spacing=spacing,
                    deformation=deform)


def _parse_index_lines(doc, num_vertices):
    lines = doc.get("lines", [])
    _expect(isinstance(lines, list), "/lines", "expected a list")
    out = []
    for i, line in enumerate(lines):
        _expect(isinstance(line, list) and len(line) >= 2, f"/lines/{i}",
                "expected a list of >= 2 vertex indices")
        ids = []
        for j, v in enumerate(line):
            v = _as_int(v, f"/lines/{i}/{j}")
            _expect(0 <= v < num_vertices, f"/lines/{i}/{j}",
                    f"vertex {v} does not exist (pattern has {num_vertices})")
            ids.append(v)
        out.append(StitchingLine(tuple(ids)))
    return tuple(out)


def _parse_gridfree(doc):
    lines = doc.get("lines", [])
    _expect(isinstance(lines, list) and len(lines) >= 2, "/lines",
            "grid-free pattern needs >= 2 coordinate lines")
    polylines = []
    for i, line in enumerate(lines):
        _expect(isinstance(line, list) and len(line) >= 2, f"/lines/{i}",
                "expected a list of >= 2 [x, y] points")
        polylines.append([_as_point(p, f"/lines/{i}/{j}") for j, p in enumerate(line)])
    sampling = doc.get("pleat_sampling", "midpoints")
    if isinstance(sampling, dict):
        if "poisson" in sampling:
            sampling = ("poisson", _as_number(sampling["poisson"],
                                              "/pleat_sampling/poisson"))
        elif "explicit" in sampling:
            pts = sampling["explicit"]
            _expect(isinstance(pts, list), "/pleat_sampling/explicit",
                    "expected a list of points")
            sampling = ("explicit",
                        [_as_point(p, f"/pleat_sampling/explicit/{k}")
                         for k, p in enumerate(pts)])
        else:
            _err("/pleat_sampling", "expected 'midpoints', {'poisson': r}, "
                 "or {'explicit': [[x, y], ...]}")
    else:
        _expect(sampling == "midpoints", "/pleat_sampling",
                "expected 'midpoints', {'poisson': r}, or {'explicit': ...}")
    return GridFreeInput(stitching_lines=tuple(polylines), pleat_sampling=sampling)


def parse_pattern(doc) -> SmockingPattern | GridFreeInput:
    """Parse a pattern-file document (already JSON-decoded)."""
    _expect(isinstance(doc, dict), "", "expected a JSON object")
    version = doc.get("version")
    if version != PATTERN_VERSION:
        _err("/version", f"unsupported version {version!r}; this build reads "
             f"version {PATTERN_VERSION}")
    if doc.get("grid") is None:
        return _parse_gridfree(doc)
    spec = _parse_grid(doc["grid"], "/grid")
    pattern = build_grid(spec)
    from dataclasses import replace

    pattern = replace(pattern, stitching_lines=_parse_index_lines(doc, pattern.num_vertices))
    tile = doc.get("tile")
    if tile is not None:
        _expect(isinstance(tile, dict), "/tile", "expected an object")
        pattern = tile_unit(
            pattern,
            _as_int(tile.get("reps_x", 1), "/tile/reps_x"),
            _as_int(tile.get("reps_y", 1), "/tile/reps_y"),
            shift=_as_int(tile.get("shift", 0), "/tile/shift"),
        )
    return pattern.validate()


def parse_params(doc) -> tuple[EmbedParams, ArapConfig, int]:
    """Solver parameter overrides from a pattern file's ``params`` block."""
    params = doc.get("params") or {}
    _expect(isinstance(params, dict), "/params", "expected an object")
    embed_kwargs = {}
    for key in ("w_embed", "w_height", "max_iters", "grad_tol", "energy_tol",
                "pleat_init_height"):
        if key in params:
            embed_kwargs[key] = params[key]
    arap_kwargs = {}
    for key in ("max_outer_iters", "tol", "weight_scheme", "epsilon_schedule"):
        if key in params:
            arap_kwargs[key] = params[key]
    subdivision = _as_int(params.get("subdivision", 2), "/params/subdivision")
    return EmbedParams(**embed_kwargs), ArapConfig(**arap_kwargs), subdivision


def load_pattern(path) -> SmockingPattern | GridFreeInput:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            _err("", f"not valid JSON: {exc}")
    return parse_pattern(doc)


def pattern_to_doc(pattern: SmockingPattern | GridFreeInput) -> dict:
    if isinstance(pattern, GridFreeInput):
        doc = {"version": PATTERN_VERSION,
               "lines": [[list(map(float, p)) for p in line]
                         for line in pattern.stitching_lines]}
        mode = pattern.pleat_sampling
        if mode != "midpoints":
            if mode[0] == "poisson":
                doc["pleat_sampling"] = {"poisson": float(mode[1])}
            else:
                doc["pleat_sampling"] = {
                    "explicit": [list(map(float, p)) for p in np.asarray(mode[1])]
                }
        return doc
    g = pattern.grid
    if g.kind == "explicit":
        grid = {"kind": "explicit",
                "vertices": [list(map(float, p)) for p in g.vertices],
                "edges": [[int(a), int(b)] for a, b in g.edges]}
    else:
        grid = {"kind": g.kind, "cols": g.cols, "rows": g.rows,
                "spacing": float(g.spacing)}
        if g.deformation is not None:
            grid["deformation"] = {
                "inner_radius": float(g.deformation.inner_radius),
                "angular_span": float(g.deformation.angular_span),
            }
    return {
        "version": PATTERN_VERSION,
        "grid": grid,
        "lines": [list(line.vertex_ids) for line in pattern.stitching_lines],
    }


def canonical_json(doc) -> str:
    """Stable serialization: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_pattern(pattern, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(pattern_to_doc(pattern)))


# --- mesh export ------------------------------------------------------------

def _fmt(x: float) -> str:
    """Shortest decimal that round-trips; avoids trailing noise like 0.30000000000000004."""
    return repr(float(x))


def _ramp(t):
    """Blue-to-red color ramp on [0, 1]."""
    t = min(max(float(t), 0.0), 1.0)
    return (t, 0.25 + 0.5 * (1.0 - abs(2.0 * t - 1.0)), 1.0 - t)


def field_colors(values) -> np.ndarray:
    """Map a per-vertex scalar field to RGB via a normalized color ramp."""
    values = np.asarray(values, dtype=float)
    lo, hi = values.min(), values.max()
    span = hi - lo
    if span <= 0:
        return np.tile(np.array(_ramp(0.5)), (len(values), 1))
    return np.array([_ramp((v - lo) / span) for v in values])


def obj_text(vertices, faces, colors=None) -> str:
    """Wavefront OBJ text; colors (if given) are appended to each v line."""
    out = []
    vertices = np.asarray(vertices, dtype=float)
    for k, v in enumerate(vertices):
        parts = ["v", _fmt(v[0]), _fmt(v[1]), _fmt(v[2] if len(v) > 2 else 0.0)]
        if colors is not None:
            parts += [_fmt(c) for c in colors[k]]
        out.append(" ".join(parts))
    for f in np.asarray(faces, dtype=int):
        out.append("f " + " ".join(str(int(i) + 1) for i in f))
    return "\n".join(out) + "\n"


def export_obj_text(design: SmockedDesign, variant: str = "merged",
                    color_field: str | None = None) -> str:
    """OBJ text for a smocked design; variant 'fine' or 'merged'."""
    if variant == "fine":
        vertices, faces = design.fine_positions, design.faces
        scalars = {"height": design.height_field}
    elif variant == "merged":
        vertices, faces = design.merged.vertices, design.merged.faces
        scalars = {"height": design.height_field[_merged_reps(design)]}
    else:
        _err("/variant", f"unknown variant {variant!r}; use 'fine' or 'merged'")
    colors = None
    if color_field is not None:
        if color_field not in scalars:
            _err("/color_field", f"unknown color field {color_field!r}")
        colors = field_colors(scalars[color_field])
    return obj_text(vertices, faces, colors)


def export_obj(design: SmockedDesign, path, variant: str = "merged",
               color_field: str | None = None):
    """Write a smocked design as OBJ; returns the text written."""
    text = export_obj_text(design, variant, color_field)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def _merged_reps(design: SmockedDesign) -> np.ndarray:
    """One representative fine vertex per merged vertex."""
    f2m = design.merged.fine_to_merged
    reps = np.zeros(len(design.merged.vertices), dtype=int)
    reps[f2m[::-1]] = np.arange(len(f2m) - 1, -1, -1)
    return reps
