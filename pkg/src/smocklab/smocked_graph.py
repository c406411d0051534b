"""Smocked graph extraction: vertex/edge classification, line fusing, bounds.

Fusing each stitching line into a single node turns the pattern graph into
the smocked graph, split into an underlay part (fused stitch nodes and the
edges between different lines) and a pleat part (everything else). Each edge
carries an upper bound on its embedded length, derived from flat-fabric
distances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ExtractionError
from .pattern import SmockingPattern

UNDERLAY = "underlay"
PLEAT = "pleat"
DEGENERATED = "degenerated"


def classify(pattern: SmockingPattern):
    """Per-vertex and per-edge classes.

    Returns (vertex_class, edge_class): arrays of strings aligned with
    pattern.vertices / pattern.edges.
    """
    owner = pattern.line_of_vertex()
    vertex_class = np.where(owner >= 0, UNDERLAY, PLEAT)
    a, b = pattern.edges[:, 0], pattern.edges[:, 1]
    both_stitched = (owner[a] >= 0) & (owner[b] >= 0)
    same_line = both_stitched & (owner[a] == owner[b])
    edge_class = np.full(len(pattern.edges), PLEAT, dtype=object)
    edge_class[both_stitched] = UNDERLAY
    edge_class[same_line] = DEGENERATED
    return vertex_class.astype(object), edge_class


@dataclass(frozen=True, eq=False)
class SmockedGraph:
    """Fused pattern graph with per-edge embedding distance bounds.

    Nodes 0..num_underlay-1 are underlay nodes (one per stitching line, in
    line order); the rest are pleat nodes. ``provenance[i]`` lists the
    pattern vertex ids a node came from.
    """

    num_underlay: int
    num_pleat: int
    provenance: tuple[tuple[int, ...], ...]
    edges: np.ndarray  # (m, 2) int
    bounds: np.ndarray  # (m,) float
    edge_class: tuple[str, ...]  # "underlay" | "pleat" per edge
    init_positions: np.ndarray  # (n, 2) mean flat position per node
    pattern: SmockingPattern

    @property
    def num_nodes(self):
        return self.num_underlay + self.num_pleat

    def is_underlay_node(self, i):
        return i < self.num_underlay

    def underlay_edges(self):
        mask = np.array([c == UNDERLAY for c in self.edge_class])
        return self.edges[mask], self.bounds[mask]

    def pleat_edges(self):
        mask = np.array([c == PLEAT for c in self.edge_class])
        return self.edges[mask], self.bounds[mask]

    def underlay_connected(self):
        """Whether the underlay subgraph has a single connected component."""
        edges, _ = self.underlay_edges()
        if self.num_underlay <= 1:
            return True
        adj = [[] for _ in range(self.num_underlay)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = [False] * self.num_underlay
        stack, seen[0] = [0], True
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return all(seen)


def _node_map(pattern):
    """Pattern vertex id -> smocked node id, plus node provenance."""
    owner = pattern.line_of_vertex()
    nl = len(pattern.stitching_lines)
    node_of = np.empty(pattern.num_vertices, dtype=int)
    provenance = [tuple(line.vertex_ids) for line in pattern.stitching_lines]
    nxt = nl
    for v in range(pattern.num_vertices):
        if owner[v] >= 0:
            node_of[v] = owner[v]
        else:
            node_of[v] = nxt
            provenance.append((v,))
            nxt += 1
    return node_of, tuple(provenance), nxt - nl


def distance_bound(pattern: SmockingPattern, prov_a, prov_b) -> float:
    """Embedding distance bound between two smocked-graph nodes.

    ``prov_a``/``prov_b`` are the nodes' pattern vertex id sets. The bound is
    the minimum flat-fabric (Euclidean) distance over all point pairs, which
    covers all three cases of the underlay/pleat split at once.
    """
    pa = pattern.vertices[list(prov_a)]
    pb = pattern.vertices[list(prov_b)]
    diff = pa[:, None, :] - pb[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).min())


def extract(pattern: SmockingPattern) -> SmockedGraph:
    """Fuse stitching lines into nodes and build the smocked graph."""
    pattern.validate()
    if not pattern.stitching_lines:
        raise ExtractionError("pattern has no stitching lines")
    node_of, provenance, num_pleat = _node_map(pattern)
    nl = len(pattern.stitching_lines)

    merged = {}
    for a, b in pattern.edges:
        na, nb = int(node_of[a]), int(node_of[b])
        if na == nb:
            continue  # degenerated edge collapses under fusing
        key = (min(na, nb), max(na, nb))
        if key not in merged:
            d = distance_bound(pattern, provenance[key[0]], provenance[key[1]])
            cls = UNDERLAY if (key[0] < nl and key[1] < nl) else PLEAT
            merged[key] = (d, cls)
        else:
            # duplicates share the same Eq.-of-min bound; keep the minimum
            d = min(merged[key][0], distance_bound(pattern, provenance[key[0]], provenance[key[1]]))
            merged[key] = (d, merged[key][1])

    keys = sorted(merged)
    edges = np.array(keys, dtype=int).reshape(-1, 2)
    bounds = np.array([merged[k][0] for k in keys])
    edge_class = tuple(merged[k][1] for k in keys)

    if not any(c == UNDERLAY for c in edge_class):
        raise ExtractionError(
            "underlay edge set is empty (pattern too fine / disconnected "
            "underlay); make the pattern coarser or use the grid-free builder"
        )
    if num_pleat == 0:
        warnings.warn(
            "pattern has no pleat nodes; consider inserting additional pleat "
            "nodes for a more regular texture",
            stacklevel=2,
        )

    init = np.array([pattern.vertices[list(p)].mean(axis=0) for p in provenance])
    return SmockedGraph(
        num_underlay=nl,
        num_pleat=num_pleat,
        provenance=provenance,
        edges=edges,
        bounds=bounds,
        edge_class=edge_class,
        init_positions=init,
        pattern=pattern,
    )


def all_pair_bounds(pattern: SmockingPattern, graph: SmockedGraph) -> np.ndarray:
    """Dense symmetric matrix of distance bounds for every node pair."""
    n = graph.num_nodes
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = distance_bound(pattern, graph.provenance[i], graph.provenance[j])
            D[i, j] = D[j, i] = d
    return D
