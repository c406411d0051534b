"""Pattern diagnostics: constraint taxonomy, residual fields, shrinkage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arap import SmockedDesign
from .embedding import (EmbeddingSolution, EmbedParams, embed_underlay,
                        prune_constraints)
from .pattern import SmockingPattern
from .smocked_graph import all_pair_bounds, extract

WELL_ENERGY_TOL = 1e-8
RANK_TOL = 1e-6


@dataclass
class ConstraintReport:
    classification: str  # "well" | "under" | "over" | "inconclusive"
    slack_pairs: list = field(default_factory=list)  # (i, j, slack)
    residual: float = 0.0
    dof_note: str = ""

    def to_dict(self):
        return {
            "classification": self.classification,
            "slack_pairs": [[int(i), int(j), float(s)] for i, j, s in self.slack_pairs],
            "residual": float(self.residual),
            "dof_note": self.dof_note,
        }


def _active_jacobian(coords, pairs):
    """Jacobian of the retained pair-distance constraints w.r.t. 2D coords."""
    n = len(coords)
    J = np.zeros((len(pairs), 2 * n))
    for r, (i, j) in enumerate(pairs):
        diff = coords[i] - coords[j]
        norm = np.linalg.norm(diff)
        if norm < 1e-12:
            continue
        u = diff / norm
        J[r, 2 * i: 2 * i + 2] = u
        J[r, 2 * j: 2 * j + 2] = -u
    return J


def classify_pattern(pattern: SmockingPattern, params: EmbedParams | None = None) -> ConstraintReport:
    """Well / under / over classification of the underlay constraints.

    The underlay is solved on the constraint set retained after
    triangle-inequality pruning; over-constrained patterns keep a positive
    residual, under-constrained ones converge but leave a continuous flex
    (rank-deficient active Jacobian beyond the 3 planar rigid modes).
    """
    params = params or EmbedParams()
    graph = extract(pattern)
    nu = graph.num_underlay
    D = all_pair_bounds(pattern, graph)[:nu, :nu]
    edges, _ = graph.underlay_edges()
    edge_pairs = [(int(a), int(b)) for a, b in edges]
    retained, pruned = prune_constraints(D, edge_pairs)

    # solve on retained underlay edges only
    from .embedding import EmbedObjective, _anchor_2d  # local import avoids cycle

    base = np.zeros((nu, 3))
    base[:, :2] = graph.init_positions[:nu]
    free = np.zeros((nu, 3), dtype=bool)
    free[:, :2] = True
    bounds = np.array([D[i, j] for i, j in retained])
    obj = EmbedObjective(base, free, np.array(retained, dtype=int), bounds)
    res = obj.solve(params)
    coords = _anchor_2d(obj.positions(res.x)[:, :2])

    slack = [(i, j, s) for i, j, s in pruned]
    if not res.converged:
        return ConstraintReport("inconclusive", slack, res.energy,
                                "underlay solve did not converge")
    if res.energy > WELL_ENERGY_TOL:
        return ConstraintReport("over", slack, res.energy,
                                "distance bounds cannot all be met in the plane")
    J = _active_jacobian(coords, retained)
    sv = np.linalg.svd(J, compute_uv=False) if len(retained) else np.zeros(0)
    smax = sv.max() if len(sv) else 1.0
    rank = int((sv > RANK_TOL * smax).sum())
    flex = (2 * nu - 3) - rank
    if pruned and flex > 0:
        return ConstraintReport(
            "under", slack, res.energy,
            f"{flex} non-rigid degrees of freedom remain after pruning",
        )
    return ConstraintReport("well", slack, res.energy, "")


def energy_distribution(pattern: SmockingPattern, solution: EmbeddingSolution) -> np.ndarray:
    """Per-pattern-vertex residual energy of the embedding, for 2D display.

    Each edge's squared residual is added to both endpoint nodes and then
    spread back to the pattern vertices each node came from.
    """
    graph = extract(pattern)
    P = solution.node_positions()
    r = np.linalg.norm(P[graph.edges[:, 0]] - P[graph.edges[:, 1]], axis=1)
    residual = (r - graph.bounds) ** 2
    per_node = np.zeros(graph.num_nodes)
    np.add.at(per_node, graph.edges[:, 0], residual)
    np.add.at(per_node, graph.edges[:, 1], residual)
    out = np.zeros(pattern.num_vertices)
    for node, prov in enumerate(graph.provenance):
        for v in prov:
            out[v] = per_node[node]
    return out


def shrinkage(pattern: SmockingPattern, design: SmockedDesign) -> dict:
    """Bounding-box shrink ratios of the smocked result vs the flat pattern.

    The design is aligned to its principal axes first so the ratios do not
    depend on the rigid motion of the output.
    """
    rest = pattern.vertices
    rest_extent = rest.max(axis=0) - rest.min(axis=0)
    V = design.merged.vertices
    if not pattern.stitching_lines:
        return {"ratio_x": 1.0, "ratio_y": 1.0, "area_ratio": 1.0}
    centered = V - V.mean(axis=0)
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    axes = vecs[:, ::-1]  # principal first
    aligned = centered @ axes
    extent = aligned.max(axis=0) - aligned.min(axis=0)
    rx = float(extent[0] / max(rest_extent[0], rest_extent[1]))
    ry = float(extent[1] / min(rest_extent[0], rest_extent[1]))
    return {
        "ratio_x": rx,
        "ratio_y": ry,
        "area_ratio": rx * ry,
    }
