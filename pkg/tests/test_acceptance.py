"""End-to-end acceptance checks, one verdict line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the PASS/FAIL lines
even for passing criteria.
"""

import json
import time

import numpy as np
import pytest

from smocklab import fixtures
from smocklab.arap import ArapConfig, _ArapSystem, arap_pinned, full_pipeline
from smocklab.embedding import (EmbedObjective, EmbedParams, check_bounds,
                                embed_pleats, embed_two_stage, embed_underlay)
from smocklab.gridfree import _pleat_edges_for_node, incircle, orient2d
from smocklab.pattern import GridSpec, SmockingPattern, StitchingLine, build_grid, refine, tile_unit
from smocklab.smocked_graph import SmockedGraph, extract


def _report(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{tag}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


def test_underlay_convergence():
    worst_energy, worst_time = 0.0, 0.0
    for name in ("arrow", "box", "braid"):
        graph = extract(getattr(fixtures, name)())
        t0 = time.perf_counter()
        res = embed_underlay(graph)
        dt = time.perf_counter() - t0
        worst_energy = max(worst_energy, res.energy)
        worst_time = max(worst_time, dt)
    _report("underlay convergence",
            worst_energy < 1e-8 and worst_time < 30.0,
            f"max energy {worst_energy:.2e}, max time {worst_time:.2f}s")


def test_stitch_satisfaction_and_merge_count():
    ok = True
    for name in ("arrow", "box", "p1"):
        pattern = getattr(fixtures, name)()
        design = full_pipeline(pattern, subdivision=2)
        fine = design.fine
        for line in pattern.stitching_lines:
            fids = [fine.coarse_to_fine[v] for v in line]
            ref = design.fine_positions[fids[0]]
            ok &= all(np.array_equal(design.fine_positions[f], ref) for f in fids[1:])
        expected = len(fine.vertices) - sum(len(l) - 1 for l in pattern.stitching_lines)
        ok &= len(design.merged.vertices) == expected
    _report("stitch satisfaction and merge count", ok)


def test_distance_bound_satisfaction():
    worst = 0.0
    for name in ("arrow", "box", "braid", "p1"):
        graph = extract(getattr(fixtures, name)())
        sol = embed_two_stage(graph)
        _, excess = check_bounds(graph, sol, rel_tol=1e-3)
        worst = max(worst, excess)
    _report("distance-bound satisfaction", worst <= 1e-3,
            f"worst relative excess {worst:.3e}")


def test_constraint_taxonomy():
    from smocklab.analysis import classify_pattern

    r1 = classify_pattern(fixtures.p1())
    r2 = classify_pattern(fixtures.p2())
    r4 = classify_pattern(fixtures.p4())
    slack = {(i, j): s for i, j, s in r2.slack_pairs}
    ok = (
        r1.classification == "well"
        and r2.classification == "under"
        and (0, 2) in slack
        and abs(slack[(0, 2)] - (np.sqrt(5) - 2)) < 1e-9
        and r4.classification == "over"
        and r4.residual > 1e-8
    )
    _report("constraint taxonomy", ok,
            f"{r1.classification}/{r2.classification}/{r4.classification}")


def test_solver_correctness():
    # finite-difference gradients on 20 random embedding objectives
    rng = np.random.default_rng(0)
    max_rel = 0.0
    for _ in range(20):
        n = int(rng.integers(4, 8))
        base = np.zeros((n, 3))
        base[:, :2] = rng.normal(size=(n, 2))
        free = rng.random((n, 3)) < 0.8
        free[0] = True
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        idx = rng.choice(len(pairs), size=min(len(pairs), 2 * n), replace=False)
        edges = np.array([pairs[k] for k in idx])
        obj = EmbedObjective(base, free, edges, rng.random(len(edges)) + 0.5,
                             spread_pairs=pairs, w_embed=1e-3,
                             var_nodes=np.arange(n), w_height=1e-3)
        x = obj.x0() + 0.2 * rng.normal(size=obj.x0().shape)
        g = obj.gradient(x)
        h = 1e-6
        gfd = np.array([(obj.energy(x + h * e) - obj.energy(x - h * e)) / (2 * h)
                        for e in np.eye(len(x))])
        max_rel = max(max_rel,
                      np.linalg.norm(g - gfd) / max(np.linalg.norm(gfd), 1e-12))

    # monotone traces on the fixture solves
    monotone = True
    for name in ("arrow", "p1", "p4"):
        trace = []
        embed_underlay(extract(getattr(fixtures, name)()),
                       trace_cb=lambda it, e, gn: trace.append(e))
        monotone &= all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    # ARAP identity and rigid motion, exact
    fine = refine(build_grid(GridSpec(kind="square", cols=2, rows=2)), 2)
    rest3 = np.column_stack([fine.vertices, np.zeros(len(fine.vertices))])
    _, e_id, _ = arap_pinned(fine, {0: rest3[fine.coarse_to_fine[0]]})
    theta = 0.37
    R = np.array([[np.cos(theta), -np.sin(theta), 0.0],
                  [np.sin(theta), np.cos(theta), 0.0],
                  [0.0, 0.0, 1.0]])
    t = np.array([0.3, -1.2, 2.0])
    pins = {int(cv): rest3[fv] @ R.T + t
            for cv, fv in enumerate(fine.coarse_to_fine)}
    _, e_rigid, _ = arap_pinned(fine, pins)

    ok = max_rel < 1e-5 and monotone and e_id < 1e-10 and e_rigid < 1e-10
    _report("solver correctness", ok,
            f"fd {max_rel:.1e}, monotone {monotone}, "
            f"arap id {e_id:.1e} rigid {e_rigid:.1e}")


def _brute_delaunay_edges(points):
    n = len(points)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if orient2d(points[i], points[j], points[k]) == 0:
                    continue
                if all(incircle(points[i], points[j], points[k], points[m]) <= 0
                       for m in range(n) if m not in (i, j, k)):
                    edges.update({(i, j), (i, k), (j, k)})
    return edges


def test_oracle_equivalence():
    # distance bounds vs brute-force min over stitching-point pairs
    bounds_ok = True
    for name, make in fixtures.ALL.items():
        pattern = make()
        if pattern.num_vertices > 12:
            continue
        graph = extract(pattern)
        V = pattern.vertices
        for (a, b), d in zip(graph.edges, graph.bounds):
            brute = min(np.linalg.norm(V[u] - V[v])
                        for u in graph.provenance[a] for v in graph.provenance[b])
            bounds_ok &= abs(d - brute) < 1e-12

    # pleat wiring vs an independent exact-incircle triangulator
    rng = np.random.default_rng(7)
    wiring_ok = True
    for _ in range(6):
        n = int(rng.integers(4, 10))
        pts = rng.random((n, 2)) * 5
        p = rng.random(2) * 5
        got = set(_pleat_edges_for_node(pts, p))
        allpts = np.vstack([pts, p[None, :]])
        want = {a for a, b in _brute_delaunay_edges(allpts) if b == n}
        want |= {b for a, b in _brute_delaunay_edges(allpts) if a == n}
        wiring_ok &= got == want

    # ARAP vs derivative-free descent on the same energy (<= 30 variables)
    from scipy.optimize import minimize as sp_minimize

    fine = refine(build_grid(GridSpec(kind="square", cols=2, rows=1)), 1)
    system = _ArapSystem(fine.vertices, fine.faces,
                         ArapConfig(max_outer_iters=20000))
    pins = {0: np.array([0.0, 0.0, 0.0]), 2: np.array([1.6, 0.3, 0.5])}
    X, e, _ = system.solve_pinned(pins)
    free = [v for v in range(system.n) if v not in pins]

    def pack_energy(xf):
        Y = X.copy()
        Y[free] = xf.reshape(-1, 3)
        return system.energy(Y)

    ref = sp_minimize(pack_energy, X[free].ravel(), method="Nelder-Mead",
                      options={"maxiter": 20000, "xatol": 1e-10, "fatol": 1e-12})
    arap_ok = 3 * len(free) <= 30 and e <= ref.fun * (1 + 1e-4) + 1e-10

    _report("oracle equivalence", bounds_ok and wiring_ok and arap_ok,
            f"bounds {bounds_ok}, wiring {wiring_ok}, arap {arap_ok}")


def test_pleat_analytic_case():
    init = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]])
    edges = np.array([[0, 1], [0, 2], [1, 2]])
    pattern = SmockingPattern(
        vertices=init, edges=edges, stitching_lines=(),
        grid=GridSpec(kind="explicit", vertices=init, edges=edges),
    )
    graph = SmockedGraph(
        num_underlay=2, num_pleat=1,
        provenance=((0,), (1,), (2,)), edges=edges,
        bounds=np.array([2.0, 1.5, 1.5]),
        edge_class=("underlay", "pleat", "pleat"),
        init_positions=init, pattern=pattern,
    )
    res = embed_pleats(graph, init[:2],
                       EmbedParams(w_embed=0.0, w_height=0.0,
                                   energy_tol=1e-18, grad_tol=1e-10))
    err = np.linalg.norm(res.coords[0] - [1.0, 0.0, np.sqrt(1.25)])
    _report("pleat analytic case", err < 1e-6, f"position error {err:.1e}")


def test_regularity_of_tiled_texture():
    pattern = tile_unit(fixtures.arrow_unit(), 3, 3)
    graph = extract(pattern)
    sol = embed_two_stage(graph)
    P = sol.node_positions()
    init = graph.init_positions
    lo, hi = init.min(axis=0), init.max(axis=0)
    cell = np.array([3.0, 2.0])  # arrow unit spans 3x2 grid cells
    by_pos = {tuple(np.round(init[k], 9)): k
              for k in range(graph.num_underlay, graph.num_nodes)}

    def interior(p):
        return np.all(p >= lo + cell - 1e-9) and np.all(p <= hi - cell + 1e-9)

    worst, pairs = 0.0, 0
    for off in (np.array([cell[0], 0.0]), np.array([0.0, cell[1]])):
        ts = []
        for key, k in by_pos.items():
            p = np.array(key)
            q = tuple(np.round(p + off, 9))
            if q in by_pos and interior(p) and interior(p + off):
                ts.append(P[by_pos[q]] - P[k])
        ts = np.array(ts)
        pairs += len(ts)
        worst = max(worst, np.linalg.norm(ts - ts.mean(axis=0), axis=1).max())
    limit = 0.05 * np.linalg.norm(cell)
    _report("tiled texture regularity", pairs >= 4 and worst < limit,
            f"{pairs} pairs, max deviation {worst:.2e} (limit {limit:.2e})")


def test_cli_service_determinism(tmp_path):
    from fastapi.testclient import TestClient

    from smocklab.cli import main
    from smocklab.io import pattern_to_doc, save_pattern
    from smocklab.service import create_app

    client = TestClient(create_app(store_dir=tmp_path / "store"))
    sid = client.post("/sessions", json=pattern_to_doc(fixtures.arrow())).json()["id"]
    client.post(f"/sessions/{sid}/simulate")
    served = client.get(f"/sessions/{sid}/result/mesh").content

    pattern_file = tmp_path / "arrow.json"
    save_pattern(fixtures.arrow(), pattern_file)
    obj_file = tmp_path / "arrow.obj"
    code = main(["export", str(pattern_file), "--out", str(obj_file)])
    ok = code == 0 and obj_file.read_bytes() == served
    _report("CLI/service OBJ determinism", ok)
