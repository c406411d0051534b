"""As-rigid-as-possible deformation of the fine fabric mesh.

The pipeline path pins every coarse vertex to its embedded position and runs
local-global ARAP on the fine triangulation. The stitch-constrained baseline
(direct and progressive epsilon schedules) is kept for ablations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .embedding import EmbeddingSolution, EmbedParams, embed_two_stage
from .errors import InvalidSpecError, MergeError
from .pattern import FinePattern, SmockingPattern, refine
from .smocked_graph import SmockedGraph, extract

log = logging.getLogger(__name__)

COINCIDE_TOL = 1e-6


@dataclass(frozen=True)
class ArapConfig:
    max_outer_iters: int = 200
    tol: float = 1e-12  # relative energy change
    weight_scheme: str = "cotangent"  # or "uniform"
    epsilon_schedule: tuple[float, ...] | None = None  # baseline only

    def __post_init__(self):
        if self.weight_scheme not in ("cotangent", "uniform"):
            raise InvalidSpecError(f"unknown weight scheme {self.weight_scheme!r}")
        if self.epsilon_schedule is not None:
            eps = tuple(float(e) for e in self.epsilon_schedule)
            if any(b > a + 1e-15 for a, b in zip(eps, eps[1:])) or (eps and eps[-1] != 0.0):
                raise InvalidSpecError("epsilon schedule must be non-increasing and end at 0")
            object.__setattr__(self, "epsilon_schedule", eps)


@dataclass
class MergedMesh:
    vertices: np.ndarray  # (n', 3)
    faces: np.ndarray  # (m', 3)
    fine_to_merged: np.ndarray  # (N,) int


@dataclass
class SmockedDesign:
    fine_positions: np.ndarray  # (N, 3)
    faces: np.ndarray
    merged: MergedMesh
    arap_energy: float
    height_field: np.ndarray  # per fine vertex z after underlay normalization
    embedding: EmbeddingSolution | None = None
    graph: SmockedGraph | None = None
    fine: FinePattern | None = None
    diagnostics: dict = field(default_factory=dict)


def cotangent_weights(vertices2d, faces, scheme="cotangent"):
    """Symmetric per-edge weights from the rest triangulation.

    Degenerate triangles fall back to a uniform contribution for their edges
    (with a logged warning); negative cotangents are kept.
    """
    weights = {}

    def add(a, b, w):
        key = (min(a, b), max(a, b))
        weights[key] = weights.get(key, 0.0) + w

    if scheme == "uniform":
        for f in faces:
            for k in range(3):
                add(f[k], f[(k + 1) % 3], 0.5)
        return weights

    V = np.asarray(vertices2d, dtype=float)
    for f in faces:
        pts = V[f]
        degenerate = False
        cots = []
        for k in range(3):
            o, a, b = pts[k], pts[(k + 1) % 3], pts[(k + 2) % 3]
            u, v = a - o, b - o
            cross = u[0] * v[1] - u[1] * v[0]
            if abs(cross) < 1e-14:
                degenerate = True
                break
            cots.append(float(np.dot(u, v) / abs(cross)))
        if degenerate:
            log.warning("degenerate rest triangle %s; using uniform weight", f.tolist())
            for k in range(3):
                add(f[k], f[(k + 1) % 3], 0.5)
        else:
            for k in range(3):
                # cot at vertex k weights the opposite edge
                add(f[(k + 1) % 3], f[(k + 2) % 3], 0.5 * cots[k])
    return weights


class _ArapSystem:
    """Precomputed structure for local-global ARAP on one rest mesh."""

    def __init__(self, rest2d, faces, cfg: ArapConfig):
        self.n = len(rest2d)
        self.rest = np.zeros((self.n, 3))
        self.rest[:, :2] = rest2d
        self.cfg = cfg
        w = cotangent_weights(rest2d, faces, cfg.weight_scheme)
        items = sorted(w.items())
        self.pairs = np.array([k for k, _ in items], dtype=int).reshape(-1, 2)
        self.w = np.array([v for _, v in items])
        self.rest_edge = self.rest[self.pairs[:, 0]] - self.rest[self.pairs[:, 1]]
        i, j = self.pairs[:, 0], self.pairs[:, 1]
        data = np.concatenate([-self.w, -self.w, self.w, self.w])
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([j, i, i, j])
        self.L = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        # neighbor structure for rotation fitting
        self.adj = [[] for _ in range(self.n)]
        for k, (a, b) in enumerate(self.pairs):
            self.adj[a].append((b, k, 1.0))
            self.adj[b].append((a, k, -1.0))

    def fit_rotations(self, X):
        R = np.empty((self.n, 3, 3))
        cur_edge = X[self.pairs[:, 0]] - X[self.pairs[:, 1]]
        for v in range(self.n):
            S = np.zeros((3, 3))
            for _, k, sgn in self.adj[v]:
                S += self.w[k] * np.outer(self.rest_edge[k], cur_edge[k])
            U, _, Vt = np.linalg.svd(S)
            Rv = Vt.T @ U.T
            if np.linalg.det(Rv) < 0:
                Vt[-1] *= -1
                Rv = Vt.T @ U.T
            R[v] = Rv
        return R

    def energy(self, X, R=None):
        if R is None:
            R = self.fit_rotations(X)
        e = 0.0
        cur = X[self.pairs[:, 0]] - X[self.pairs[:, 1]]
        for k, (a, b) in enumerate(self.pairs):
            ra = cur[k] - R[a] @ self.rest_edge[k]
            rb = -cur[k] + R[b] @ self.rest_edge[k]
            e += self.w[k] * (ra @ ra) + self.w[k] * (rb @ rb)
        return float(e)

    def rhs(self, R):
        B = np.zeros((self.n, 3))
        for k, (a, b) in enumerate(self.pairs):
            d = self.w[k] * 0.5 * ((R[a] + R[b]) @ self.rest_edge[k])
            B[a] += 2.0 * d
            B[b] -= 2.0 * d
        return B

    def solve_pinned(self, pins: dict, init=None):
        """Local-global iterations with hard positional pins."""
        pin_ids = np.array(sorted(pins), dtype=int)
        pin_pos = np.array([pins[i] for i in sorted(pins)], dtype=float)
        free = np.setdiff1d(np.arange(self.n), pin_ids)
        X = self.rest.copy() if init is None else init.copy()
        X[pin_ids] = pin_pos
        if len(free) == 0:
            R = self.fit_rotations(X)
            return X, self.energy(X, R), [self.energy(X, R)]
        Lff = (2.0 * self.L[free][:, free]).tocsc()
        Lfp = 2.0 * self.L[free][:, pin_ids]
        lu = spla.splu(Lff)
        energies = []
        prev = np.inf
        for _ in range(self.cfg.max_outer_iters):
            R = self.fit_rotations(X)
            B = self.rhs(R)
            rhs = B[free] - Lfp @ pin_pos
            X[free] = lu.solve(rhs)
            e = self.energy(X, R)
            energies.append(e)
            if np.isfinite(prev) and prev - e <= self.cfg.tol * max(prev, 1e-30):
                break
            prev = e
        return X, self.energy(X), energies


def arap_pinned(fine: FinePattern, pins: dict, cfg: ArapConfig | None = None):
    """Deform the fine mesh with coarse vertices pinned to 3D targets.

    ``pins`` maps coarse vertex ids to target positions; they are routed
    through coarse_to_fine. Returns (positions, energy, energy_trace).
    """
    cfg = cfg or ArapConfig()
    fine_pins = {}
    for cv, target in pins.items():
        target = np.asarray(target, dtype=float)
        if not np.all(np.isfinite(target)):
            raise InvalidSpecError(f"pin target for coarse vertex {cv} is not finite")
        fine_pins[int(fine.coarse_to_fine[cv])] = target
    system = _ArapSystem(fine.vertices, fine.faces, cfg)
    if not fine_pins:
        # anchor one vertex to quotient out translation
        fine_pins[0] = system.rest[0]
    return system.solve_pinned(fine_pins)


def default_epsilon_schedule(pattern: SmockingPattern, steps: int = 5):
    """Geometric schedule from half the initial stitching-line length to 0."""
    lengths = []
    for line in pattern.stitching_lines:
        pts = pattern.vertices[list(line)]
        diff = pts[:, None, :] - pts[None, :, :]
        lengths.append(np.sqrt((diff**2).sum(axis=2)).max())
    eps0 = 0.5 * float(np.mean(lengths))
    if steps < 2:
        return (0.0,)
    geo = eps0 * (0.25 ** np.arange(steps - 1))
    return tuple(geo.tolist()) + (0.0,)


def _stitch_pairs(pattern, fine):
    pairs = []
    for line in pattern.stitching_lines:
        fids = [int(fine.coarse_to_fine[v]) for v in line]
        for a in range(len(fids)):
            for b in range(a + 1, len(fids)):
                pairs.append((fids[a], fids[b]))
    return pairs


def _stitch_groups(pattern, fine):
    return [
        [int(fine.coarse_to_fine[v]) for v in line] for line in pattern.stitching_lines
    ]


def arap_stitch_baseline(fine: FinePattern, pattern: SmockingPattern,
                         cfg: ArapConfig | None = None):
    """Eq.-style baseline: ARAP with stitched-pair distance constraints.

    Each epsilon in the schedule is solved warm-started from the previous
    one; nonzero epsilons use constraints linearized at the current iterate,
    the final epsilon of 0 collapses the pairs exactly.
    """
    cfg = cfg or ArapConfig()
    schedule = cfg.epsilon_schedule
    if schedule is None:
        schedule = default_epsilon_schedule(pattern) if pattern.stitching_lines else (0.0,)
    system = _ArapSystem(fine.vertices, fine.faces, cfg)
    if not pattern.stitching_lines:
        X, e, _ = system.solve_pinned({0: system.rest[0]})
        return X, e
    pairs = _stitch_pairs(pattern, fine)
    groups = _stitch_groups(pattern, fine)
    X = system.rest.copy()
    for eps in schedule:
        if eps == 0.0:
            X = _solve_merged(system, groups, cfg, X)
        else:
            X = _solve_linearized(system, pairs, eps, cfg, X)
    return X, system.energy(X)


def _solve_merged(system, groups, cfg, X0):
    """ARAP with stitched groups collapsed to shared variables."""
    n = system.n
    rep = np.arange(n)
    for g in groups:
        for v in g[1:]:
            rep[v] = g[0]
    reduced_ids = np.unique(rep)
    idx_of = {int(r): k for k, r in enumerate(reduced_ids)}
    M = sp.csr_matrix(
        (np.ones(n), (np.arange(n), [idx_of[int(rep[v])] for v in range(n)])),
        shape=(n, len(reduced_ids)),
    )
    Lr = (2.0 * (M.T @ system.L @ M)).tocsc()
    # anchor the first reduced vertex to pin down translation
    anchor = 0
    keep = np.arange(1, len(reduced_ids))
    lu = spla.splu(Lr[keep][:, keep])
    Y = np.zeros((len(reduced_ids), 3))
    for k, r in enumerate(reduced_ids):
        Y[k] = X0[rep == r].mean(axis=0)
    X = np.asarray(M @ Y)
    prev = np.inf
    for _ in range(cfg.max_outer_iters):
        R = system.fit_rotations(X)
        B = np.asarray(M.T @ system.rhs(R))
        rhs = B[keep] - np.asarray(Lr[keep][:, [anchor]] @ Y[[anchor]])
        Y[keep] = lu.solve(rhs)
        X = np.asarray(M @ Y)
        e = system.energy(X, R)
        if np.isfinite(prev) and prev - e <= cfg.tol * max(prev, 1e-30):
            break
        prev = e
    return X


def _solve_linearized(system, pairs, eps, cfg, X0):
    """ARAP with scalar linearized constraints n.(xp - xq) = eps."""
    n = system.n
    nc = len(pairs)
    L3 = sp.kron(sp.eye(3), 2.0 * system.L, format="csr")
    X = X0.copy()
    prev = np.inf
    for _ in range(cfg.max_outer_iters):
        R = system.fit_rotations(X)
        B = system.rhs(R)
        rows, cols, vals, rhs_c = [], [], [], []
        for c, (p, q) in enumerate(pairs):
            d = X[p] - X[q]
            norm = np.linalg.norm(d)
            nvec = d / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
            for axis in range(3):
                rows += [c, c]
                cols += [axis * n + p, axis * n + q]
                vals += [nvec[axis], -nvec[axis]]
            rhs_c.append(eps)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(nc, 3 * n))
        # anchor vertex 0 via three extra constraints to fix translation
        A0 = sp.csr_matrix(
            (np.ones(3), (np.arange(3), [axis * n + 0 for axis in range(3)])),
            shape=(3, 3 * n),
        )
        A = sp.vstack([A, A0])
        rhs_full = np.concatenate([rhs_c, X0[0]])
        K = sp.bmat([[L3, A.T], [A, None]], format="csc")
        rhs = np.concatenate([B.T.ravel(), rhs_full])
        sol = spla.spsolve(K, rhs)
        X = sol[: 3 * n].reshape(3, n).T
        e = system.energy(X, R)
        if np.isfinite(prev) and prev - e <= cfg.tol * max(prev, 1e-30):
            break
        prev = e
    return X


def merge_stitched(fine_positions, faces, pattern: SmockingPattern, fine: FinePattern) -> MergedMesh:
    """Collapse coincident stitched fine vertices into the non-manifold mesh."""
    X = np.asarray(fine_positions, dtype=float)
    n = len(X)
    rep = np.arange(n)
    for group in _stitch_groups(pattern, fine):
        pts = X[group]
        dev = float(np.linalg.norm(pts - pts.mean(axis=0), axis=1).max())
        if dev > COINCIDE_TOL:
            raise MergeError(f"stitched group not coincident (max deviation {dev:.3g})")
        for v in group[1:]:
            rep[v] = group[0]
    reduced_ids = np.unique(rep)
    new_index = np.full(n, -1, dtype=int)
    new_index[reduced_ids] = np.arange(len(reduced_ids))
    mapping = new_index[rep]
    new_faces = []
    for f in np.asarray(faces, dtype=int):
        g = mapping[f]
        if len(set(g.tolist())) == 3:
            new_faces.append(g)
    return MergedMesh(
        vertices=X[reduced_ids],
        faces=np.array(new_faces, dtype=int).reshape(-1, 3),
        fine_to_merged=mapping,
    )


def full_pipeline(pattern: SmockingPattern, embed_params: EmbedParams | None = None,
                  arap_cfg: ArapConfig | None = None, subdivision: int = 2,
                  trace_cb=None) -> SmockedDesign:
    """Pattern to smocked design: extract, embed, refine, ARAP, merge."""
    embed_params = embed_params or EmbedParams()
    arap_cfg = arap_cfg or ArapConfig()
    graph = extract(pattern)
    solution = embed_two_stage(graph, embed_params, trace_cb)
    fine = refine(pattern, subdivision)
    node_pos = solution.node_positions()
    owner = pattern.line_of_vertex()
    pins = {}
    next_pleat = graph.num_underlay
    pleat_of = {}
    for v in range(pattern.num_vertices):
        if owner[v] >= 0:
            pins[v] = node_pos[owner[v]]
        else:
            pleat_of[v] = next_pleat
            pins[v] = node_pos[next_pleat]
            next_pleat += 1
    positions, energy, trace = arap_pinned(fine, pins, arap_cfg)
    merged = merge_stitched(positions, fine.faces, pattern, fine)
    height = positions[:, 2].copy()
    stitched_fine = [fine.coarse_to_fine[v] for v in pattern.stitched_vertex_ids()]
    if stitched_fine:
        height -= height[stitched_fine].mean()
    return SmockedDesign(
        fine_positions=positions,
        faces=fine.faces,
        merged=merged,
        arap_energy=energy,
        height_field=height,
        embedding=solution,
        graph=graph,
        fine=fine,
        diagnostics={"arap_trace": trace},
    )


def height_map(design: SmockedDesign, fine: FinePattern):
    """Per-fine-vertex height paired with its rest-pattern position."""
    return fine.vertices.copy(), design.height_field.copy()
