"""Smocked-graph extraction against small brute-force oracles."""

import itertools

import numpy as np
import pytest

from smocklab import fixtures
from smocklab.errors import ExtractionError
from smocklab.pattern import GridSpec, add_line, build_grid
from smocklab.smocked_graph import (all_pair_bounds, classify, distance_bound,
                                    extract)


def brute_force_bound(pattern, prov_a, prov_b):
    """Min Euclidean distance over all provenance point pairs, the slow way."""
    best = np.inf
    for u, v in itertools.product(prov_a, prov_b):
        best = min(best, float(np.linalg.norm(pattern.vertices[u] - pattern.vertices[v])))
    return best


SMALL_FIXTURES = [
    name for name in ("arrow_unit", "p1", "p2")
    if getattr(fixtures, name)().num_vertices <= 12
]


@pytest.mark.parametrize("name", SMALL_FIXTURES)
def test_bounds_match_brute_force(name):
    pattern = getattr(fixtures, name)()
    graph = extract(pattern)
    for (a, b), d in zip(graph.edges, graph.bounds):
        expected = brute_force_bound(pattern, graph.provenance[a], graph.provenance[b])
        assert d == pytest.approx(expected, abs=0)


def test_vertex_and_edge_classes():
    pattern = fixtures.arrow_unit()
    vclass, eclass = classify(pattern)
    stitched = set(pattern.stitched_vertex_ids())
    for v in range(pattern.num_vertices):
        assert vclass[v] == ("underlay" if v in stitched else "pleat")
    owner = pattern.line_of_vertex()
    for (a, b), c in zip(pattern.edges, eclass):
        if owner[a] >= 0 and owner[b] >= 0:
            assert c == ("degenerated" if owner[a] == owner[b] else "underlay")
        else:
            assert c == "pleat"


def test_degenerated_edges_dropped():
    # a stitching line along an existing edge collapses that edge
    p = build_grid(GridSpec(kind="square", cols=2, rows=1))
    p = add_line(p, [0, 1])
    p = add_line(p, [2, 5])
    graph = extract(p)
    for a, b in graph.edges:
        assert a != b


def test_duplicate_edges_merged_min_bound():
    # two pattern edges fuse to the same node pair; merged bound is the min
    p = fixtures.p1()
    graph = extract(p)
    keys = [tuple(e) for e in graph.edges]
    assert len(keys) == len(set(keys))


def test_p1_underlay_bounds():
    graph = extract(fixtures.p1())
    eu, bu = graph.underlay_edges()
    got = {tuple(sorted(e)): b for e, b in zip(eu.tolist(), bu)}
    assert got[(0, 1)] == pytest.approx(1.0)
    assert got[(1, 2)] == pytest.approx(1.0)
    assert got[(0, 2)] == pytest.approx(np.sqrt(2))


def test_p2_underlay_bounds():
    graph = extract(fixtures.p2())
    eu, bu = graph.underlay_edges()
    got = {tuple(sorted(e)): b for e, b in zip(eu.tolist(), bu)}
    assert got[(0, 1)] == pytest.approx(1.0)
    assert got[(1, 2)] == pytest.approx(1.0)
    assert got[(0, 2)] == pytest.approx(np.sqrt(5))


def test_node_layout():
    pattern = fixtures.arrow_unit()
    graph = extract(pattern)
    assert graph.num_underlay == len(pattern.stitching_lines)
    stitched = len(pattern.stitched_vertex_ids())
    assert graph.num_pleat == pattern.num_vertices - stitched
    # underlay nodes inherit their line's vertices in order
    for lid, line in enumerate(pattern.stitching_lines):
        assert graph.provenance[lid] == tuple(line.vertex_ids)


def test_init_positions_are_means():
    pattern = fixtures.arrow_unit()
    graph = extract(pattern)
    for node, prov in enumerate(graph.provenance):
        assert np.allclose(graph.init_positions[node],
                           pattern.vertices[list(prov)].mean(axis=0))


def test_extract_requires_lines():
    p = build_grid(GridSpec(kind="square", cols=2, rows=2))
    with pytest.raises(ExtractionError):
        extract(p)


def test_no_pleat_warning():
    # every vertex stitched -> warn that the texture will be degenerate
    p = build_grid(GridSpec(kind="square", cols=1, rows=1))
    p = add_line(p, [0, 1])
    p = add_line(p, [2, 3])
    with pytest.warns(UserWarning):
        extract(p)


def test_all_pair_bounds_symmetric():
    pattern = fixtures.p1()
    graph = extract(pattern)
    D = all_pair_bounds(pattern, graph)
    assert np.allclose(D, D.T)
    assert np.all(np.diag(D) == 0)
    d01 = distance_bound(pattern, graph.provenance[0], graph.provenance[1])
    assert D[0, 1] == pytest.approx(d01)
