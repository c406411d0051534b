"""Canonical smocking patterns used by tests, docs, and the CLI examples."""

from __future__ import annotations

import numpy as np

from .pattern import (GridSpec, SmockingPattern, StitchingLine, build_grid,
                      square_vertex_id, tile_unit)


def _with_lines(pattern, lines):
    from dataclasses import replace

    cols = pattern.grid.cols
    sls = tuple(
        StitchingLine(tuple(square_vertex_id(i, j, cols) for i, j in line)) for line in lines
    )
    return replace(pattern, stitching_lines=sls).validate()


def arrow_unit() -> SmockingPattern:
    """Arrow (chevron) unit: two diagonal stitches on a 3x2 cell grid."""
    grid = build_grid(GridSpec(kind="square", cols=3, rows=2))
    return _with_lines(grid, [[(0, 1), (1, 2)], [(1, 1), (2, 0)]])


def arrow(reps_x: int = 4, reps_y: int = 3) -> SmockingPattern:
    """Tiled arrow pattern; the default tiling carries 24 stitching lines."""
    return tile_unit(arrow_unit(), reps_x, reps_y)


def box_unit() -> SmockingPattern:
    """Box unit: a facing pair of diagonal stitches on a 4x2 cell grid."""
    grid = build_grid(GridSpec(kind="square", cols=4, rows=2))
    return _with_lines(grid, [[(0, 0), (1, 1)], [(2, 1), (3, 0)]])


def box(reps_x: int = 3, reps_y: int = 3) -> SmockingPattern:
    return tile_unit(box_unit(), reps_x, reps_y)


def braid_unit() -> SmockingPattern:
    """Braid unit: the box unit, meant to be tiled with a row offset."""
    return box_unit()


def braid(reps_x: int = 3, reps_y: int = 3) -> SmockingPattern:
    return tile_unit(braid_unit(), reps_x, reps_y, shift=2)


def p1() -> SmockingPattern:
    """Well-constrained three-line pattern (bounds 1, 1, sqrt(2))."""
    grid = build_grid(GridSpec(kind="square", cols=3, rows=2))
    return _with_lines(grid, [[(0, 0), (1, 1)], [(1, 2), (2, 1)], [(2, 0), (3, 1)]])


def p2() -> SmockingPattern:
    """Under-constrained variant of p1: middle cells widened from 1 to 2.

    Bounds become 1, 1, sqrt(5); the 1-3 constraint is implied by the
    triangle inequality and prunes away.
    """
    xs = [0.0, 1.0, 3.0, 4.0]
    ys = [0.0, 1.0, 2.0]
    vertices = np.array([[x, y] for y in ys for x in xs])
    cols = 3
    edges = []
    vid = lambda i, j: j * (cols + 1) + i
    for j in range(len(ys)):
        for i in range(cols):
            edges.append((vid(i, j), vid(i + 1, j)))
    for j in range(len(ys) - 1):
        for i in range(cols + 1):
            edges.append((vid(i, j), vid(i, j + 1)))
    for j in range(len(ys) - 1):
        for i in range(cols):
            edges.append((vid(i, j), vid(i + 1, j + 1)))
            edges.append((vid(i + 1, j), vid(i, j + 1)))
    edges = np.array(edges, dtype=int)
    lines = (
        StitchingLine((vid(0, 0), vid(1, 1))),
        StitchingLine((vid(1, 2), vid(2, 1))),
        StitchingLine((vid(2, 0), vid(3, 1))),
    )
    pattern = SmockingPattern(
        vertices=vertices,
        edges=edges,
        stitching_lines=lines,
        grid=GridSpec(kind="explicit", vertices=vertices, edges=edges),
    )
    return pattern.validate()


def p4() -> SmockingPattern:
    """Over-constrained pattern: a long central line ringed by stitches.

    The fused central node ends up with more exact-distance demands than a
    planar placement can satisfy, so the underlay residual stays positive.
    """
    grid = build_grid(GridSpec(kind="square", cols=4, rows=4))
    return _with_lines(
        grid,
        [
            [(1, 2), (2, 2), (3, 2)],  # central 3-point line
            [(0, 0), (1, 1)],
            [(2, 1), (3, 0)],
            [(3, 1), (4, 0)],
            [(0, 3), (1, 4)],
            [(2, 3), (3, 4)],
            [(3, 3), (4, 4)],
            [(0, 1), (1, 0)],
            [(0, 4), (1, 3)],
        ],
    )


def basket() -> SmockingPattern:
    """Dense basket pattern whose pleat set is (almost) empty."""
    grid = build_grid(GridSpec(kind="square", cols=4, rows=3))
    lines = []
    for j in range(4):
        if j % 2 == 0:
            lines += [[(0, j), (1, j)], [(2, j), (3, j)]]
        else:
            lines += [[(1, j), (2, j)], [(3, j), (4, j)]]
    return _with_lines(grid, lines)


def leaf() -> SmockingPattern:
    """Leaf pattern: staggered chevrons used for the regularizer sweep."""
    grid = build_grid(GridSpec(kind="square", cols=6, rows=4))
    lines = []
    for j in range(0, 4, 2):
        for i in range(0, 6, 2):
            lines.append([(i, j), (i + 1, j + 1)])
    for j in range(1, 4, 2):
        for i in range(1, 6, 2):
            lines.append([(i + 1, j), (i, j + 1)])
    return _with_lines(grid, lines)


ALL = {
    "arrow": arrow,
    "box": box,
    "braid": braid,
    "p1": p1,
    "p2": p2,
    "p4": p4,
    "basket": basket,
    "leaf": leaf,
}
