"""Projected-Newton solver unit tests."""

import numpy as np
import pytest

from smocklab.solver import SolveResult, minimize, project_psd


def quadratic(A, b):
    energy = lambda x: 0.5 * x @ A @ x - b @ x
    grad = lambda x: A @ x - b
    hess = lambda x: A
    return energy, grad, hess


def test_quadratic_converges_in_few_steps():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 6))
    A = M @ M.T + np.eye(6)
    b = rng.normal(size=6)
    e, g, h = quadratic(A, b)
    res = minimize(e, g, h, np.zeros(6), grad_tol=1e-10, energy_tol=-np.inf)
    assert res.converged
    assert res.iterations <= 2
    assert np.allclose(res.x, np.linalg.solve(A, b), atol=1e-8)


def test_indefinite_hessian_still_descends():
    # saddle-shaped quartic: exact Hessian is indefinite away from the minimum
    energy = lambda x: (x[0] ** 2 - 1) ** 2 + 0.5 * x[1] ** 2
    grad = lambda x: np.array([4 * x[0] * (x[0] ** 2 - 1), x[1]])
    hess = lambda x: np.array([[12 * x[0] ** 2 - 4, 0.0], [0.0, 1.0]])
    res = minimize(energy, grad, hess, np.array([0.1, 1.0]),
                   grad_tol=1e-12, energy_tol=1e-12)
    assert res.converged
    assert abs(abs(res.x[0]) - 1.0) < 1e-5


def test_trace_is_monotone():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(5, 2))
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    pairs = [(i, j) for i in range(5) for j in range(i + 1, 5)]

    def energy(x):
        P = x.reshape(5, 2)
        return sum((np.linalg.norm(P[i] - P[j]) - d[i, j]) ** 2 for i, j in pairs)

    def grad(x):
        h = 1e-7
        return np.array([(energy(x + h * e) - energy(x - h * e)) / (2 * h)
                         for e in np.eye(len(x))])

    hess = lambda x: np.eye(10)
    res = minimize(energy, grad, hess, rng.normal(size=10), max_iters=100)
    energies = [t[1] for t in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_project_psd_floor():
    H = np.diag([4.0, -1.0, 0.0])
    P = project_psd(H)
    w = np.linalg.eigvalsh(P)
    assert w.min() >= 1e-8 * 4.0 - 1e-15
    assert w.max() == pytest.approx(4.0)


def test_project_psd_symmetrizes():
    H = np.array([[2.0, 1.0], [0.0, 2.0]])
    P = project_psd(H)
    assert np.allclose(P, P.T)


def test_stops_at_energy_tol():
    e, g, h = quadratic(np.eye(2), np.zeros(2))
    res = minimize(e, g, h, np.full(2, 1e-6), energy_tol=1e-8)
    assert res.converged
    assert res.iterations == 1  # already below tolerance


def test_max_iters_reports_non_convergence():
    # a linear slope never converges; the solver should say so
    energy = lambda x: float(x[0])
    grad = lambda x: np.array([1.0])
    hess = lambda x: np.array([[0.0]])
    res = minimize(energy, grad, hess, np.zeros(1), max_iters=5,
                   grad_tol=1e-12, energy_tol=-np.inf)
    assert not res.converged
    assert isinstance(res, SolveResult)


def test_finite_difference_gradients_random_instances():
    """Embedding-style objectives: analytic gradient vs central differences."""
    from smocklab.embedding import EmbedObjective

    rng = np.random.default_rng(0)
    rel_errs = []
    for _ in range(20):
        n = int(rng.integers(4, 8))
        base = np.zeros((n, 3))
        base[:, :2] = rng.normal(size=(n, 2))
        free = rng.random((n, 3)) < 0.8
        free[0] = True  # keep at least one free node
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        idx = rng.choice(len(pairs), size=min(len(pairs), 2 * n), replace=False)
        edges = np.array([pairs[k] for k in idx])
        bounds = rng.random(len(edges)) + 0.5
        obj = EmbedObjective(base, free, edges, bounds,
                             spread_pairs=pairs, w_embed=1e-3,
                             var_nodes=np.arange(n), w_height=1e-3)
        x = obj.x0() + 0.2 * rng.normal(size=obj.x0().shape)
        g = obj.gradient(x)
        h = 1e-6
        gfd = np.array([(obj.energy(x + h * e) - obj.energy(x - h * e)) / (2 * h)
                        for e in np.eye(len(x))])
        rel_errs.append(np.linalg.norm(g - gfd) / max(np.linalg.norm(gfd), 1e-12))
    assert max(rel_errs) < 1e-5
