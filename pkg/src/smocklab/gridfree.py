"""Grid-free pattern construction from stitching lines alone.

Underlay connectivity comes from a Delaunay triangulation of the stitching
points, conditioned on the stitching-line segments; pleat nodes are sampled
(line midpoints by default) and wired in by local re-triangulation, one node
at a time. Orientation and incircle tests use exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import InvalidSpecError, TriangulationError
from .pattern import GridSpec, SmockingPattern, StitchingLine


def _f(x):
    return Fraction(float(x))


def orient2d(a, b, c):
    """Sign of the signed area of triangle abc (+1 ccw, -1 cw, 0 collinear)."""
    det = (_f(b[0]) - _f(a[0])) * (_f(c[1]) - _f(a[1])) - (_f(b[1]) - _f(a[1])) * (
        _f(c[0]) - _f(a[0])
    )
    return (det > 0) - (det < 0)


def incircle(a, b, c, d):
    """+1 if d lies inside the circumcircle of ccw triangle abc, -1 outside."""
    rows = []
    for p in (a, b, c):
        dx, dy = _f(p[0]) - _f(d[0]), _f(p[1]) - _f(d[1])
        rows.append((dx, dy, dx * dx + dy * dy))
    det = (
        rows[0][0] * (rows[1][1] * rows[2][2] - rows[2][1] * rows[1][2])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[2][0] * rows[1][2])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[2][0] * rows[1][1])
    )
    if orient2d(a, b, c) < 0:
        det = -det
    return (det > 0) - (det < 0)


def segments_cross(p1, p2, q1, q2):
    """Proper crossing test (shared endpoints do not count)."""
    if len({tuple(p1), tuple(p2)} & {tuple(q1), tuple(q2)}):
        return False
    d1 = orient2d(q1, q2, p1)
    d2 = orient2d(q1, q2, p2)
    d3 = orient2d(p1, p2, q1)
    d4 = orient2d(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def delaunay_triangles(points):
    points = np.asarray(points, dtype=float)
    try:
        tri = Delaunay(points)
    except QhullError as exc:
        raise TriangulationError(f"degenerate point set: {exc}") from exc
    return [tuple(int(v) for v in s) for s in tri.simplices]


def delaunay_edges(points):
    edges = set()
    for t in delaunay_triangles(points):
        for k in range(3):
            a, b = t[k], t[(k + 1) % 3]
            edges.add((min(a, b), max(a, b)))
    return edges


def _tri_edges(t):
    return [(t[k], t[(k + 1) % 3]) for k in range(3)]


def _retriangulate_pseudo(path, points, out):
    """Triangulate the pseudo-polygon bounded by path[0]..path[-1] and the
    base segment, per the standard cavity retriangulation rule."""
    if len(path) < 3:
        return
    a, b = path[0], path[-1]
    interior = path[1:-1]
    c = interior[0]
    for d in interior[1:]:
        if incircle(points[a], points[b], points[c], points[d]) > 0:
            c = d
    ci = path.index(c)
    out.append((a, b, c))
    _retriangulate_pseudo(path[: ci + 1], points, out)
    _retriangulate_pseudo(path[ci:], points, out)


def constrained_delaunay_edges(points, segments):
    """Edge set of the Delaunay triangulation with ``segments`` enforced."""
    points = np.asarray(points, dtype=float)
    triangles = delaunay_triangles(points)
    for a, b in segments:
        edge_set = set()
        for t in triangles:
            for u, v in _tri_edges(t):
                edge_set.add((min(u, v), max(u, v)))
        key = (min(a, b), max(a, b))
        if key in edge_set:
            continue
        crossed = [
            t
            for t in triangles
            if any(
                segments_cross(points[a], points[b], points[u], points[v])
                for u, v in _tri_edges(t)
            )
        ]
        if not crossed:
            raise TriangulationError(
                f"cannot enforce segment ({a}, {b}); a point may lie on it"
            )
        boundary = {}
        for t in crossed:
            for u, v in _tri_edges(t):
                k = (min(u, v), max(u, v))
                boundary[k] = boundary.get(k, 0) + 1
        cavity_edges = [k for k, cnt in boundary.items() if cnt == 1]
        triangles = [t for t in triangles if t not in crossed]
        for side in (1, -1):
            side_edges = [
                (u, v)
                for u, v in cavity_edges
                if orient2d(points[a], points[b], points[u]) * side >= 0
                and orient2d(points[a], points[b], points[v]) * side >= 0
            ]
            adj = {}
            for u, v in side_edges:
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            path = [a]
            prev = None
            while path[-1] != b:
                nxts = [w for w in adj.get(path[-1], []) if w != prev]
                if not nxts:
                    raise TriangulationError("cavity walk failed while enforcing a segment")
                prev = path[-1]
                path.append(nxts[0])
            _retriangulate_pseudo(path, points, triangles)
    edges = set()
    for t in triangles:
        for u, v in _tri_edges(t):
            edges.add((min(u, v), max(u, v)))
    return edges


@dataclass(frozen=True)
class GridFreeInput:
    """Stitching lines given directly as 2D polylines."""

    stitching_lines: tuple  # tuple of (k, 2) float arrays, k >= 2
    pleat_sampling: object = "midpoints"  # "midpoints" | ("poisson", r) | ("explicit", pts)

    def __post_init__(self):
        lines = tuple(np.asarray(l, dtype=float) for l in self.stitching_lines)
        object.__setattr__(self, "stitching_lines", lines)
        seen = set()
        for i, line in enumerate(lines):
            if line.ndim != 2 or line.shape[1] != 2 or len(line) < 2:
                raise InvalidSpecError(f"line {i} must be a list of >= 2 2D points")
            if not np.all(np.isfinite(line)):
                raise InvalidSpecError(f"line {i} has non-finite points")
            for p in map(tuple, line):
                if p in seen:
                    raise InvalidSpecError(f"lines are not point-disjoint at {p}")
                seen.add(p)


def _arclength_midpoint(line):
    seg = np.diff(line, axis=0)
    lens = np.linalg.norm(seg, axis=1)
    total = lens.sum()
    if total == 0:
        return line[0]
    target = total / 2
    acc = 0.0
    for k, l in enumerate(lens):
        if acc + l >= target:
            t = (target - acc) / l
            return line[k] + t * seg[k]
        acc += l
    return line[-1]


def _sample_pleats(inp: GridFreeInput, underlay_points):
    mode = inp.pleat_sampling
    if mode == "midpoints":
        return np.array([_arclength_midpoint(l) for l in inp.stitching_lines])
    if isinstance(mode, tuple) and mode[0] == "explicit":
        return np.asarray(mode[1], dtype=float).reshape(-1, 2)
    if isinstance(mode, tuple) and mode[0] == "poisson":
        radius = float(mode[1])
        lo = underlay_points.min(axis=0)
        hi = underlay_points.max(axis=0)
        rng = np.random.default_rng(0)  # fixed seed: output must be deterministic
        accepted = []
        for _ in range(2000):
            p = lo + rng.random(2) * (hi - lo)
            near = np.vstack([underlay_points] + [np.array([q]) for q in accepted])
            if np.linalg.norm(near - p, axis=1).min() >= radius:
                accepted.append(p)
        return np.array(accepted).reshape(-1, 2)
    raise InvalidSpecError(f"unknown pleat sampling {mode!r}")


def _pleat_edges_for_node(underlay_points, p):
    """Edges incident to p in Delaunay(underlay points + p).

    Returned as indices into underlay_points.
    """
    pts = np.vstack([underlay_points, p[None, :]])
    vid = len(underlay_points)
    out = set()
    for a, b in delaunay_edges(pts):
        if b == vid:
            out.add(a)
        elif a == vid:
            out.add(b)
    return sorted(out)


def build_gridfree(inp: GridFreeInput) -> SmockingPattern:
    """Algorithm: stitching points -> conditioned Delaunay underlay, sampled
    pleat nodes wired by per-node local Delaunay, pleat-pleat Delaunay last."""
    if len(inp.stitching_lines) < 2:
        raise InvalidSpecError("need at least 2 stitching lines")
    points = []
    lines_idx = []
    segments = []
    for line in inp.stitching_lines:
        ids = []
        for p in line:
            ids.append(len(points))
            points.append(tuple(p))
        lines_idx.append(ids)
        segments.extend(zip(ids[:-1], ids[1:]))
    points = np.array(points)
    for i in range(len(segments)):
        for j in range(i + 1, len(segments)):
            a, b = segments[i]
            c, d = segments[j]
            if segments_cross(points[a], points[b], points[c], points[d]):
                raise InvalidSpecError(
                    f"stitching segments ({a},{b}) and ({c},{d}) cross"
                )
    edges = constrained_delaunay_edges(points, segments)
    edges |= {(min(a, b), max(a, b)) for a, b in segments}

    pleats = _sample_pleats(inp, points)
    all_vertices = [points]
    nv = len(points)
    for p in pleats:
        for u in _pleat_edges_for_node(points, p):
            edges.add((u, nv))
        all_vertices.append(p[None, :])
        nv += 1
    if len(pleats) >= 3:
        for a, b in delaunay_edges(pleats):
            edges.add((len(points) + a, len(points) + b))
    elif len(pleats) == 2:
        edges.add((len(points), len(points) + 1))

    vertices = np.vstack(all_vertices)
    edges_arr = np.array(sorted(edges), dtype=int)
    pattern = SmockingPattern(
        vertices=vertices,
        edges=edges_arr,
        stitching_lines=tuple(StitchingLine(tuple(ids)) for ids in lines_idx),
        grid=GridSpec(kind="explicit", vertices=vertices, edges=edges_arr),
        unit_cell=None,
    )
    return pattern.validate()


def insert_pleat_nodes(pattern: SmockingPattern, positions) -> SmockingPattern:
    """Add pleat nodes wired to the stitched vertices by local Delaunay."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(positions) == 0:
        return pattern
    lo, hi = pattern.bounding_box()
    underlay_ids = sorted(pattern.stitched_vertex_ids())
    underlay_pts = pattern.vertices[underlay_ids]
    vertices = pattern.vertices
    edges = {(int(a), int(b)) for a, b in pattern.edges}
    for p in positions:
        if np.any(p < lo - 1e-9) or np.any(p > hi + 1e-9):
            raise InvalidSpecError(f"pleat node {p.tolist()} outside pattern bounding box")
        if np.linalg.norm(vertices - p, axis=1).min() < 1e-9:
            raise InvalidSpecError(f"pleat node {p.tolist()} coincides with a vertex")
        vid = len(vertices)
        for u in _pleat_edges_for_node(underlay_pts, p):
            edges.add((underlay_ids[u], vid))
        vertices = np.vstack([vertices, p[None, :]])
    edges_arr = np.array(sorted(edges), dtype=int)
    result = SmockingPattern(
        vertices=vertices,
        edges=edges_arr,
        stitching_lines=pattern.stitching_lines,
        grid=GridSpec(kind="explicit", vertices=vertices, edges=edges_arr),
        unit_cell=pattern.unit_cell,
    )
    return result.validate()
