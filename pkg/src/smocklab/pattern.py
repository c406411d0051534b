"""Smocking patterns: grids, stitching lines, tiling, editing, refinement.

A pattern is a flat fabric graph (vertices, edges) annotated with stitching
lines. All operations are pure: they return new pattern values and never
mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConflictError, InvalidSpecError, NotFoundError

# positions are merged/looked up at this resolution (pattern units)
POS_TOL = 1e-9


@dataclass(frozen=True)
class RadialDeform:
    """Bend a square grid into a circular-arc (radial) grid.

    Columns map uniformly to angles over ``angular_span``, rows map to radii
    starting at ``inner_radius``.
    """

    inner_radius: float
    angular_span: float

    def __post_init__(self):
        if self.inner_radius <= 0:
            raise InvalidSpecError("inner_radius must be > 0")
        if not (0 < self.angular_span <= 2 * math.pi):
            raise InvalidSpecError("angular_span must be in (0, 2*pi]")

    def apply(self, positions, width):
        """Map flat positions (x in [0, width]) to the radial layout."""
        positions = np.asarray(positions, dtype=float)
        # at a full turn the first and last column would coincide; leave a
        # one-unit seam gap to keep the mapping injective
        effective = width if self.angular_span < 2 * math.pi else width + 1.0
        theta = self.angular_span * positions[:, 0] / effective
        radius = self.inner_radius + positions[:, 1]
        return np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Description of the fabric grid underlying a pattern."""

    kind: str  # "square" | "hexagonal" | "explicit"
    cols: int = 1
    rows: int = 1
    spacing: float = 1.0
    deformation: RadialDeform | None = None
    # explicit kind carries its own geometry and ignores cols/rows/spacing
    vertices: np.ndarray | None = None
    edges: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("square", "hexagonal", "explicit"):
            raise InvalidSpecError(f"unknown grid kind {self.kind!r}")
        if self.kind == "explicit":
            if self.vertices is None or self.edges is None:
                raise InvalidSpecError("explicit grid requires vertices and edges")
        else:
            if self.cols < 1 or self.rows < 1:
                raise InvalidSpecError("cols and rows must be >= 1")
            if self.spacing <= 0:
                raise InvalidSpecError("spacing must be > 0")


@dataclass(frozen=True)
class StitchingLine:
    """Ordered vertex indices gathered and sewn into a single point."""

    vertex_ids: tuple[int, ...]

    def __post_init__(self):
        ids = tuple(int(v) for v in self.vertex_ids)
        object.__setattr__(self, "vertex_ids", ids)
        if len(ids) < 2:
            raise InvalidSpecError("stitching line needs >= 2 vertices")
        if len(set(ids)) != len(ids):
            raise InvalidSpecError("stitching line vertices must be distinct")

    def __len__(self):
        return len(self.vertex_ids)

    def __iter__(self):
        return iter(self.vertex_ids)


@dataclass(frozen=True, eq=False)
class SmockingPattern:
    """Fabric graph plus stitching-line annotations."""

    vertices: np.ndarray  # (n, 2) float
    edges: np.ndarray  # (m, 2) int, each row sorted, rows unique
    stitching_lines: tuple[StitchingLine, ...]
    grid: GridSpec
    unit_cell: tuple[float, float, float, float] | None = None  # xmin,ymin,xmax,ymax

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "edges", _canonical_edges(self.edges))
        object.__setattr__(self, "stitching_lines", tuple(self.stitching_lines))

    @property
    def num_vertices(self):
        return len(self.vertices)

    def stitched_vertex_ids(self):
        """All vertex ids that belong to some stitching line."""
        out = []
        for line in self.stitching_lines:
            out.extend(line.vertex_ids)
        return out

    def line_of_vertex(self):
        """Map vertex id -> stitching line index (-1 for unstitched)."""
        owner = np.full(self.num_vertices, -1, dtype=int)
        for lid, line in enumerate(self.stitching_lines):
            owner[list(line)] = lid
        return owner

    def bounding_box(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return lo, hi

    def validate(self):
        """Check pattern invariants, raising on violation."""
        n = self.num_vertices
        if n == 0:
            raise InvalidSpecError("pattern has no vertices")
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= n):
            raise InvalidSpecError("edge references nonexistent vertex")
        seen = set()
        for lid, line in enumerate(self.stitching_lines):
            for v in line:
                if v < 0 or v >= n:
                    raise InvalidSpecError(f"line {lid} references nonexistent vertex {v}")
                if v in seen:
                    raise ConflictError(f"vertex {v} shared by two stitching lines")
                seen.add(v)
        if not _is_connected(n, self.edges):
            raise InvalidSpecError("pattern graph is not connected")
        return self


@dataclass(frozen=True, eq=False)
class FinePattern:
    """Triangulated high-resolution version of a pattern."""

    vertices: np.ndarray  # (N, 2)
    faces: np.ndarray  # (M, 3) int
    coarse_to_fine: np.ndarray  # (n,) int, injective
    subdivision: int
    edges: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=int))
        object.__setattr__(self, "coarse_to_fine", np.asarray(self.coarse_to_fine, dtype=int))
        f = self.faces
        e = np.vstack([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        object.__setattr__(self, "edges", _canonical_edges(e))


def _canonical_edges(edges):
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    if len(edges) == 0:
        return edges
    edges = np.sort(edges, axis=1)
    edges = np.unique(edges, axis=0)
    return edges


def _is_connected(n, edges):
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


def square_vertex_id(i, j, cols):
    """Lattice index (column i, row j) -> vertex id for a square grid."""
    return j * (cols + 1) + i


def _square_grid_geometry(cols, rows, spacing):
    xs = np.arange(cols + 1) * spacing
    ys = np.arange(rows + 1) * spacing
    gx, gy = np.meshgrid(xs, ys)  # row-major: y outer, x inner
    vertices = np.stack([gx.ravel(), gy.ravel()], axis=1)
    edges = []
    vid = lambda i, j: square_vertex_id(i, j, cols)
    for j in range(rows + 1):
        for i in range(cols):
            edges.append((vid(i, j), vid(i + 1, j)))
    for j in range(rows):
        for i in range(cols + 1):
            edges.append((vid(i, j), vid(i, j + 1)))
    for j in range(rows):
        for i in range(cols):
            edges.append((vid(i, j), vid(i + 1, j + 1)))
            edges.append((vid(i + 1, j), vid(i, j + 1)))
    return vertices, np.array(edges, dtype=int)


def _hex_grid_geometry(cols, rows, spacing):
    # flat-top hexagons in offset columns; edges along hexagon sides only
    corners = np.array(
        [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(6)]
    ) * spacing
    key_of = {}
    vertices = []
    edges = set()

    def vertex_at(p):
        key = (round(p[0] / POS_TOL), round(p[1] / POS_TOL))
        if key not in key_of:
            key_of[key] = len(vertices)
            vertices.append(p)
        return key_of[key]

    for c in range(cols):
        for r in range(rows):
            cx = c * 1.5 * spacing
            cy = (r + 0.5 * (c % 2)) * math.sqrt(3) * spacing
            ids = [vertex_at((cx + dx, cy + dy)) for dx, dy in corners]
            for k in range(6):
                a, b = ids[k], ids[(k + 1) % 6]
                edges.add((min(a, b), max(a, b)))
    return np.array(vertices), np.array(sorted(edges), dtype=int)


def build_grid(spec: GridSpec) -> SmockingPattern:
    """Build a line-free pattern from a grid spec."""
    if spec.kind == "square":
        vertices, edges = _square_grid_geometry(spec.cols, spec.rows, spec.spacing)
        if spec.deformation is not None:
            width = spec.cols * spec.spacing
            vertices = spec.deformation.apply(vertices, width)
    elif spec.kind == "hexagonal":
        vertices, edges = _hex_grid_geometry(spec.cols, spec.rows, spec.spacing)
    else:
        vertices = np.asarray(spec.vertices, dtype=float)
        edges = np.asarray(spec.edges, dtype=int)
    pattern = SmockingPattern(
        vertices=vertices,
        edges=edges,
        stitching_lines=(),
        grid=spec,
        unit_cell=_bbox_tuple(vertices),
    )
    return pattern.validate()


def _bbox_tuple(vertices):
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def _grid_cells(pattern):
    """(cols, rows, spacing) of a square-grid pattern, or raise."""
    g = pattern.grid
    if g.kind != "square":
        raise InvalidSpecError(f"operation requires a square grid, got {g.kind!r}")
    return g.cols, g.rows, g.spacing


def _lattice_coords(pattern):
    """Integer lattice coordinates of each vertex of a square-grid pattern."""
    cols, rows, s = _grid_cells(pattern)
    n = pattern.num_vertices
    js, is_ = np.divmod(np.arange(n), cols + 1)
    return np.stack([is_, js], axis=1)


def tile_unit(unit: SmockingPattern, reps_x: int, reps_y: int, shift: int = 0) -> SmockingPattern:
    """Tile a unit pattern into a reps_x-by-reps_y full pattern.

    ``shift`` offsets each unit row horizontally by that many grid cells
    (brick-style tiling). Duplicate vertices on shared borders are merged by
    construction since the result is rebuilt as one big grid.
    """
    if unit.unit_cell is None:
        raise InvalidSpecError("unit pattern has no declared unit_cell")
    if reps_x < 1 or reps_y < 1:
        raise InvalidSpecError("reps must be >= 1")
    ucols, urows, s = _grid_cells(unit)
    if unit.grid.deformation is not None:
        raise InvalidSpecError("tile the undeformed pattern, then deform")
    shift = int(shift)
    extra = abs(shift) * (reps_y - 1)
    cols = ucols * reps_x + extra
    rows = urows * reps_y
    full = build_grid(GridSpec(kind="square", cols=cols, rows=rows, spacing=s))

    coords = _lattice_coords(unit)
    lines = []
    owner = {}
    base_shift = extra if shift < 0 else 0
    for iy in range(reps_y):
        for ix in range(reps_x):
            ox = ix * ucols + shift * iy + base_shift
            oy = iy * urows
            for lid, line in enumerate(unit.stitching_lines):
                ids = []
                for v in line:
                    i, j = coords[v]
                    ids.append(square_vertex_id(i + ox, j + oy, cols))
                new_lid = len(lines)
                for v in ids:
                    if v in owner:
                        raise ConflictError(
                            f"tiling makes lines {owner[v]} and {new_lid} share vertex {v}"
                        )
                    owner[v] = new_lid
                lines.append(StitchingLine(tuple(ids)))
    result = replace(full, stitching_lines=tuple(lines), unit_cell=_bbox_tuple(full.vertices))
    return result.validate()


def add_line(pattern: SmockingPattern, vertex_ids) -> SmockingPattern:
    line = StitchingLine(tuple(vertex_ids))
    stitched = set(pattern.stitched_vertex_ids())
    for v in line:
        if v < 0 or v >= pattern.num_vertices:
            raise NotFoundError(f"vertex {v} does not exist")
        if v in stitched:
            raise ConflictError(f"vertex {v} already belongs to a stitching line")
    return replace(pattern, stitching_lines=pattern.stitching_lines + (line,))


def delete_line(pattern: SmockingPattern, line_id: int) -> SmockingPattern:
    if not (0 <= line_id < len(pattern.stitching_lines)):
        raise NotFoundError(f"stitching line {line_id} does not exist")
    lines = tuple(l for i, l in enumerate(pattern.stitching_lines) if i != line_id)
    return replace(pattern, stitching_lines=lines)


def add_margin(pattern: SmockingPattern, cells: int) -> SmockingPattern:
    """Extend a square-grid pattern by plain cells on all four sides."""
    if cells < 0:
        raise InvalidSpecError("margin must be >= 0")
    if cells == 0:
        return pattern
    cols, rows, s = _grid_cells(pattern)
    grown = build_grid(
        GridSpec(
            kind="square",
            cols=cols + 2 * cells,
            rows=rows + 2 * cells,
            spacing=s,
            deformation=pattern.grid.deformation,
        )
    )
    coords = _lattice_coords(pattern)
    lines = []
    for line in pattern.stitching_lines:
        ids = tuple(
            square_vertex_id(coords[v][0] + cells, coords[v][1] + cells, cols + 2 * cells)
            for v in line
        )
        lines.append(StitchingLine(ids))
    result = replace(grown, stitching_lines=tuple(lines))
    return result.validate()


def combine(a: SmockingPattern, b: SmockingPattern, axis: str = "x", gap: int = 0) -> SmockingPattern:
    """Concatenate two square-grid patterns along an axis with a plain gap strip."""
    if gap < 0:
        raise InvalidSpecError("gap must be >= 0")
    acols, arows, s = _grid_cells(a)
    bcols, brows, sb = _grid_cells(b)
    if abs(s - sb) > POS_TOL:
        raise InvalidSpecError("patterns must share grid spacing")
    if axis == "x":
        if arows != brows:
            raise InvalidSpecError("combine along x requires equal row counts")
        cols, rows = acols + gap + bcols, arows
        offsets = [(0, 0), (acols + gap, 0)]
    elif axis == "y":
        if acols != bcols:
            raise InvalidSpecError("combine along y requires equal column counts")
        cols, rows = acols, arows + gap + brows
        offsets = [(0, 0), (0, arows + gap)]
    else:
        raise InvalidSpecError(f"axis must be 'x' or 'y', got {axis!r}")
    full = build_grid(GridSpec(kind="square", cols=cols, rows=rows, spacing=s))
    lines = []
    for pat, (ox, oy) in zip((a, b), offsets):
        coords = _lattice_coords(pat)
        for line in pat.stitching_lines:
            ids = tuple(
                square_vertex_id(coords[v][0] + ox, coords[v][1] + oy, cols) for v in line
            )
            lines.append(StitchingLine(ids))
    result = replace(full, stitching_lines=tuple(lines))
    return result.validate()


def edit_pattern(pattern: SmockingPattern, op: str, **kwargs) -> SmockingPattern:
    """Dispatch an edit by name: add_line, delete_line, add_margin, combine."""
    ops = {
        "add_line": add_line,
        "delete_line": delete_line,
        "add_margin": add_margin,
        "combine": combine,
    }
    if op not in ops:
        raise InvalidSpecError(f"unknown edit op {op!r}")
    return ops[op](pattern, **kwargs)


def refine(pattern: SmockingPattern, subdivision: int = 2) -> FinePattern:
    """Triangulated fine version of the pattern.

    Square grids are subdivided exactly (subdivision^2 subcells per cell, two
    triangles each, consistent diagonal orientation). Other grid kinds get a
    regular triangulated grid over the bounding box with the coarse vertices
    snapped onto the nearest fine vertices.
    """
    if subdivision < 1:
        raise InvalidSpecError("subdivision must be >= 1")
    if pattern.grid.kind == "square":
        return _refine_square(pattern, subdivision)
    return _refine_bbox(pattern, subdivision)


def _refine_square(pattern, s):
    cols, rows, spacing = _grid_cells(pattern)
    fc, fr = cols * s, rows * s
    fsp = spacing / s
    vertices, _ = _square_grid_geometry(fc, fr, fsp)
    faces = []
    vid = lambda i, j: square_vertex_id(i, j, fc)
    for j in range(fr):
        for i in range(fc):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    if pattern.grid.deformation is not None:
        vertices = pattern.grid.deformation.apply(vertices, cols * spacing)
    coarse_to_fine = np.array(
        [square_vertex_id(i * s, j * s, fc) for i, j in _lattice_coords(pattern)], dtype=int
    )
    return FinePattern(
        vertices=vertices,
        faces=np.array(faces, dtype=int),
        coarse_to_fine=coarse_to_fine,
        subdivision=s,
    )


def _refine_bbox(pattern, s):
    lo, hi = pattern.bounding_box()
    lengths = np.linalg.norm(
        pattern.vertices[pattern.edges[:, 0]] - pattern.vertices[pattern.edges[:, 1]], axis=1
    )
    h = float(np.median(lengths)) / s
    fc = max(1, int(round((hi[0] - lo[0]) / h)))
    fr = max(1, int(round((hi[1] - lo[1]) / h)))
    xs = np.linspace(lo[0], hi[0], fc + 1)
    ys = np.linspace(lo[1], hi[1], fr + 1)
    gx, gy = np.meshgrid(xs, ys)
    vertices = np.stack([gx.ravel(), gy.ravel()], axis=1)
    faces = []
    vid = lambda i, j: j * (fc + 1) + i
    for j in range(fr):
        for i in range(fc):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    # snap each coarse vertex onto its nearest fine vertex
    coarse_to_fine = np.empty(pattern.num_vertices, dtype=int)
    taken = {}
    for v, p in enumerate(pattern.vertices):
        dists = np.linalg.norm(vertices - p, axis=1)
        order = np.argsort(dists)
        for cand in order:
            if cand not in taken:
                break
        taken[int(cand)] = v
        vertices[cand] = p
        coarse_to_fine[v] = cand
    return FinePattern(
        vertices=vertices,
        faces=np.array(faces, dtype=int),
        coarse_to_fine=coarse_to_fine,
        subdivision=s,
    )
