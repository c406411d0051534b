"""Two-stage smocked-graph embedding.

Stage one lays out the underlay nodes in the plane by stretching every
underlay edge to its distance bound. Stage two lifts the pleat nodes into 3D
against the pinned underlay, stretching pleat edges to their bounds, with a
small node-spreading term and a height-variance penalty to regularize the
boundary pleats. A simultaneous solve over both stages is kept for
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import solver
from .errors import ExtractionError, InvalidSpecError
from .smocked_graph import SmockedGraph

COINCIDENT_EPS = 1e-12


@dataclass(frozen=True)
class EmbedParams:
    w_embed: float = 1e-3
    w_height: float = 1e-3
    max_iters: int = 2000
    grad_tol: float = 1e-8
    energy_tol: float = 1e-8
    pleat_init_height: float = 1.0
    # distance terms act as soft upper bounds in the pleat stage: residuals
    # past the bound are weighted this much harder than those below it
    over_weight: float = 1e4

    def __post_init__(self):
        if self.w_embed < 0 or self.w_height < 0:
            raise InvalidSpecError("regularizer weights must be >= 0")
        if self.grad_tol <= 0 or self.energy_tol <= 0:
            raise InvalidSpecError("tolerances must be > 0")


@dataclass
class StageResult:
    coords: np.ndarray
    energy: float
    iterations: int
    converged: bool
    trace: list


@dataclass
class EmbeddingSolution:
    underlay_xy: np.ndarray  # (nu, 2)
    pleat_xyz: np.ndarray  # (np, 3)
    underlay_energy: float
    pleat_energy: float
    iterations: dict = field(default_factory=dict)
    converged: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)

    def node_positions(self):
        """All node positions stacked, underlay first, z=0 for underlay."""
        nu = len(self.underlay_xy)
        out = np.zeros((nu + len(self.pleat_xyz), 3))
        out[:nu, :2] = self.underlay_xy
        out[nu:] = self.pleat_xyz
        return out


class EmbedObjective:
    """Distance least squares plus optional spread and height-variance terms.

    Works on a full (n, 3) position table where only the coordinates flagged
    in ``free_mask`` are optimization variables.
    """

    def __init__(self, base_positions, free_mask, dist_edges, dist_bounds,
                 spread_pairs=None, w_embed=0.0, var_nodes=None, w_height=0.0,
                 over_weight=1.0):
        self.base = np.asarray(base_positions, dtype=float)
        self.free_mask = np.asarray(free_mask, dtype=bool)
        self.ei = np.asarray(dist_edges, dtype=int).reshape(-1, 2)
        self.d = np.asarray(dist_bounds, dtype=float)
        self.sp = (np.asarray(spread_pairs, dtype=int).reshape(-1, 2)
                   if spread_pairs is not None and len(spread_pairs) else np.zeros((0, 2), int))
        self.w_embed = float(w_embed)
        self.var_nodes = np.asarray(var_nodes, dtype=int) if var_nodes is not None else np.zeros(0, int)
        self.w_height = float(w_height)
        # residuals above the bound can be weighted harder than those below
        # it, turning the distance terms into soft inequality constraints
        self.over_weight = float(over_weight)
        self.nfree = int(self.free_mask.sum())
        self.dofmap = np.full(self.base.shape, -1, dtype=int)
        self.dofmap[self.free_mask] = np.arange(self.nfree)

    def x0(self):
        return self.base[self.free_mask].copy()

    def positions(self, x):
        P = self.base.copy()
        P[self.free_mask] = x
        return P

    def _dists(self, P, pairs):
        diff = P[pairs[:, 0]] - P[pairs[:, 1]]
        return diff, np.linalg.norm(diff, axis=1)

    def _edge_weights(self, r):
        if self.over_weight == 1.0:
            return np.ones_like(r)
        return np.where(r > self.d, self.over_weight, 1.0)

    def energy(self, x):
        P = self.positions(x)
        e = 0.0
        if len(self.ei):
            _, r = self._dists(P, self.ei)
            e += float((self._edge_weights(r) * (r - self.d) ** 2).sum())
        if self.w_embed > 0 and len(self.sp):
            _, r = self._dists(P, self.sp)
            e -= self.w_embed * float(r.sum())
        if self.w_height > 0 and len(self.var_nodes):
            z = P[self.var_nodes, 2]
            e += self.w_height * float(np.var(z))
        return e

    def gradient(self, x):
        P = self.positions(x)
        G = np.zeros_like(P)
        if len(self.ei):
            diff, r = self._dists(P, self.ei)
            safe = np.maximum(r, COINCIDENT_EPS)
            u = np.where(r[:, None] < COINCIDENT_EPS, 0.0, diff / safe[:, None])
            coeff = 2.0 * self._edge_weights(r) * (r - self.d)
            np.add.at(G, self.ei[:, 0], coeff[:, None] * u)
            np.add.at(G, self.ei[:, 1], -coeff[:, None] * u)
        if self.w_embed > 0 and len(self.sp):
            diff, r = self._dists(P, self.sp)
            safe = np.maximum(r, COINCIDENT_EPS)
            u = np.where(r[:, None] < COINCIDENT_EPS, 0.0, diff / safe[:, None])
            np.add.at(G, self.sp[:, 0], -self.w_embed * u)
            np.add.at(G, self.sp[:, 1], self.w_embed * u)
        if self.w_height > 0 and len(self.var_nodes):
            z = P[self.var_nodes, 2]
            n = len(z)
            G[self.var_nodes, 2] += self.w_height * 2.0 / n * (z - z.mean())
        return G[self.free_mask]

    def _scatter_pair_blocks(self, H, pairs, B):
        """Accumulate per-pair 3x3 blocks (+B on diagonals, -B off) into H."""
        di = self.dofmap[pairs[:, 0]]  # (m, 3)
        dj = self.dofmap[pairs[:, 1]]
        flat = H.ravel()
        for rows, cols, sign in ((di, di, 1.0), (dj, dj, 1.0),
                                 (di, dj, -1.0), (dj, di, -1.0)):
            rr = rows[:, :, None]  # (m, 3, 1)
            cc = cols[:, None, :]  # (m, 1, 3)
            mask = (rr >= 0) & (cc >= 0)
            idx = (rr * self.nfree + cc)[mask]
            np.add.at(flat, idx, sign * B[np.broadcast_to(mask, B.shape)])

    def hessian(self, x):
        """Exact Hessian of the objective; PSD projection happens in the
        solver, which is what makes the indefinite terms safe."""
        P = self.positions(x)
        H = np.zeros((self.nfree, self.nfree))
        eye = np.eye(3)

        if len(self.ei):
            diff, r = self._dists(P, self.ei)
            ok = r >= COINCIDENT_EPS
            u = diff[ok] / r[ok, None]
            uu = u[:, :, None] * u[:, None, :]
            scale = (2.0 * self._edge_weights(r)[ok])[:, None, None]
            tang = (1.0 - self.d[ok] / r[ok])[:, None, None]
            B = scale * (uu + tang * (eye - uu))
            self._scatter_pair_blocks(H, self.ei[ok], B)
        if self.w_embed > 0 and len(self.sp):
            diff, r = self._dists(P, self.sp)
            ok = r >= COINCIDENT_EPS
            u = diff[ok] / r[ok, None]
            uu = u[:, :, None] * u[:, None, :]
            A = (-self.w_embed / r[ok])[:, None, None] * (eye - uu)
            self._scatter_pair_blocks(H, self.sp[ok], A)
        if self.w_height > 0 and len(self.var_nodes):
            n = len(self.var_nodes)
            zdofs = self.dofmap[self.var_nodes, 2]
            ok = zdofs >= 0
            zd = zdofs[ok]
            C = self.w_height * 2.0 / n * (np.eye(len(zd)) - np.ones((len(zd), len(zd))) / n)
            H[np.ix_(zd, zd)] += C
        return H

    def solve(self, params: EmbedParams, trace_cb=None):
        return solver.minimize(
            self.energy, self.gradient, self.hessian, self.x0(),
            max_iters=params.max_iters, grad_tol=params.grad_tol,
            energy_tol=params.energy_tol, trace_cb=trace_cb,
        )


def _anchor_2d(coords):
    """Translate node 0 to the origin and rotate node 1 onto the +x axis."""
    coords = coords - coords[0]
    if len(coords) > 1:
        v = coords[1]
        r = np.hypot(v[0], v[1])
        if r > COINCIDENT_EPS:
            c, s = v[0] / r, v[1] / r
            R = np.array([[c, s], [-s, c]])
            coords = coords @ R.T
    return coords


def embed_underlay(graph: SmockedGraph, params: EmbedParams | None = None,
                   trace_cb=None) -> StageResult:
    """2D embedding of the underlay graph (distance least squares)."""
    params = params or EmbedParams()
    edges, bounds = graph.underlay_edges()
    if len(edges) == 0:
        raise ExtractionError("underlay graph is empty")
    if not graph.underlay_connected():
        raise ExtractionError("underlay graph is not connected")
    nu = graph.num_underlay
    base = np.zeros((nu, 3))
    base[:, :2] = graph.init_positions[:nu]
    free = np.zeros((nu, 3), dtype=bool)
    free[:, :2] = True
    obj = EmbedObjective(base, free, edges, bounds)
    res = obj.solve(params, trace_cb)
    coords = _anchor_2d(obj.positions(res.x)[:, :2])
    return StageResult(coords, res.energy, res.iterations, res.converged, res.trace)


def _align_to_underlay(graph, underlay_xy):
    """Rigidly map pattern-frame pleat positions into the underlay's frame.

    The solved underlay may be anchored in an arbitrary rigid frame; a 2D
    Procrustes fit from the underlay init positions to the solved ones gives
    the motion to apply to the pleat initializer so it starts nearby.
    """
    nu = graph.num_underlay
    src = graph.init_positions[:nu]
    dst = np.asarray(underlay_xy, dtype=float)
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    H = (src - cs).T @ (dst - cd)
    U, _, Vt = np.linalg.svd(H)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U[:, -1] *= -1
        R = U @ Vt
    pleats = graph.init_positions[nu:]
    return (pleats - cs) @ R + cd


def _pleat_objective(graph, underlay_xy, params):
    nu, npl = graph.num_underlay, graph.num_pleat
    n = nu + npl
    edges, bounds = graph.pleat_edges()
    incident = np.zeros(n, dtype=bool)
    incident[edges.ravel()] = True
    for i in range(nu, n):
        if not incident[i]:
            raise ExtractionError(
                f"pleat node {i} has no incident pleat edge; insert pleat "
                "edges via the grid-free builder"
            )
    base = np.zeros((n, 3))
    base[:nu, :2] = underlay_xy
    base[nu:, :2] = _align_to_underlay(graph, underlay_xy)
    base[nu:, 2] = params.pleat_init_height
    free = np.zeros((n, 3), dtype=bool)
    free[nu:, :] = True
    spread = [(i, j) for i in range(n) for j in range(i + 1, n) if i >= nu or j >= nu]
    return EmbedObjective(
        base, free, edges, bounds,
        spread_pairs=spread, w_embed=params.w_embed,
        var_nodes=np.arange(nu, n), w_height=params.w_height,
        over_weight=params.over_weight,
    )


def embed_pleats(graph: SmockedGraph, underlay_xy, params: EmbedParams | None = None,
                 trace_cb=None) -> StageResult:
    """3D embedding of the pleat nodes against a fixed underlay."""
    params = params or EmbedParams()
    if graph.num_pleat == 0:
        return StageResult(np.zeros((0, 3)), 0.0, 0, True, [])
    obj = _pleat_objective(graph, underlay_xy, params)
    res = obj.solve(params, trace_cb)
    coords = obj.positions(res.x)[graph.num_underlay:]
    # report the unweighted objective value at the solution
    plain = EmbedObjective(obj.base, obj.free_mask, obj.ei, obj.d,
                           spread_pairs=obj.sp, w_embed=obj.w_embed,
                           var_nodes=obj.var_nodes, w_height=obj.w_height)
    return StageResult(coords, plain.energy(res.x), res.iterations,
                       res.converged, res.trace)


def embed_two_stage(graph: SmockedGraph, params: EmbedParams | None = None,
                    trace_cb=None) -> EmbeddingSolution:
    params = params or EmbedParams()
    under = embed_underlay(graph, params, trace_cb)
    pleat = embed_pleats(graph, under.coords, params, trace_cb)
    return EmbeddingSolution(
        underlay_xy=under.coords,
        pleat_xyz=pleat.coords,
        underlay_energy=under.energy,
        pleat_energy=pleat.energy,
        iterations={"underlay": under.iterations, "pleat": pleat.iterations},
        converged={"underlay": under.converged, "pleat": pleat.converged},
        traces={"underlay": under.trace, "pleat": pleat.trace},
    )


def embed_simultaneous(graph: SmockedGraph, params: EmbedParams | None = None,
                       trace_cb=None) -> EmbeddingSolution:
    """Joint solve of both stages; kept for the solver ablation."""
    params = params or EmbedParams()
    nu, npl = graph.num_underlay, graph.num_pleat
    n = nu + npl
    base = np.zeros((n, 3))
    base[:, :2] = graph.init_positions
    base[nu:, 2] = params.pleat_init_height
    free = np.zeros((n, 3), dtype=bool)
    free[:nu, :2] = True  # underlay stays planar
    free[nu:, :] = True
    spread = [(i, j) for i in range(n) for j in range(i + 1, n) if i >= nu or j >= nu]
    obj = EmbedObjective(
        base, free, graph.edges, graph.bounds,
        spread_pairs=spread if npl else None, w_embed=params.w_embed if npl else 0.0,
        var_nodes=np.arange(nu, n) if npl else None, w_height=params.w_height if npl else 0.0,
    )
    res = obj.solve(params, trace_cb)
    P = obj.positions(res.x)
    xy = _anchor_2d(P[:nu, :2].copy())
    # apply the same rigid motion to the pleat nodes for a consistent frame
    shift = P[0, :2]
    Pp = P[nu:].copy()
    Pp[:, :2] -= shift
    if nu > 1:
        v = P[1, :2] - shift
        r = np.hypot(v[0], v[1])
        if r > COINCIDENT_EPS:
            c, s = v[0] / r, v[1] / r
            R = np.array([[c, s], [-s, c]])
            Pp[:, :2] = Pp[:, :2] @ R.T
    eu, bu = graph.underlay_edges()
    under_e = _distance_energy(P, eu, bu)
    return EmbeddingSolution(
        underlay_xy=xy,
        pleat_xyz=Pp,
        underlay_energy=under_e,
        pleat_energy=res.energy - under_e,
        iterations={"simultaneous": res.iterations},
        converged={"simultaneous": res.converged},
        traces={"simultaneous": res.trace},
    )


def _distance_energy(P, edges, bounds):
    if len(edges) == 0:
        return 0.0
    r = np.linalg.norm(P[edges[:, 0]] - P[edges[:, 1]], axis=1)
    return float(((r - bounds) ** 2).sum())


def prune_constraints(bounds: np.ndarray, pairs=None):
    """Drop pairwise constraints implied by the triangle inequality.

    A pair (i, k) is inactive when some intermediate j satisfies
    d_ij + d_jk <= d_ik: the bound can then never be violated. Returns
    (retained, pruned) where pruned entries are (i, k, slack).
    """
    D = np.asarray(bounds, dtype=float)
    n = D.shape[0]
    if pairs is None:
        pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    retained, pruned = [], []
    for i, k in pairs:
        best = np.inf
        for j in range(n):
            if j == i or j == k:
                continue
            best = min(best, D[i, j] + D[j, k])
        if best <= D[i, k] + 1e-12:
            pruned.append((i, k, float(D[i, k] - best)))
        else:
            retained.append((i, k))
    return retained, pruned


def check_bounds(graph: SmockedGraph, solution: EmbeddingSolution, rel_tol=1e-3):
    """Verify every smocked-graph edge satisfies its distance bound.

    Returns (ok, worst_relative_excess).
    """
    P = solution.node_positions()
    r = np.linalg.norm(P[graph.edges[:, 0]] - P[graph.edges[:, 1]], axis=1)
    excess = (r - graph.bounds) / graph.bounds
    worst = float(excess.max()) if len(excess) else 0.0
    return worst <= rel_tol, worst
