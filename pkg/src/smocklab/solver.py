"""Projected Newton solver for small dense nonlinear least-squares problems.

The Hessian approximation is projected to positive definite by eigenvalue
clamping (floor at 1e-8 times the largest eigenvalue), followed by a
backtracking Armijo line search. Deterministic given the initial point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EIG_FLOOR_RATIO = 1e-8
ARMIJO_C1 = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-16


@dataclass
class SolveResult:
    x: np.ndarray
    energy: float
    iterations: int
    converged: bool
    grad_norm: float
    trace: list = field(default_factory=list)  # (iteration, energy, grad_norm)


def project_psd(H):
    """Clamp eigenvalues to keep the (symmetrized) matrix positive definite."""
    H = 0.5 * (H + H.T)
    w, V = np.linalg.eigh(H)
    floor = max(EIG_FLOOR_RATIO * float(w.max()), EIG_FLOOR_RATIO)
    w = np.maximum(w, floor)
    return (V * w) @ V.T


def minimize(energy_fn, grad_fn, hess_fn, x0, *, max_iters=500, grad_tol=1e-10,
             energy_tol=1e-8, trace_cb=None) -> SolveResult:
    """Minimize a smooth function with projected Newton steps.

    ``hess_fn`` may return any symmetric approximation (e.g. Gauss-Newton);
    it is PSD-projected before solving. Stops when the gradient norm drops
    below ``grad_tol``, the energy below ``energy_tol``, or ``max_iters`` is
    reached. Line-search failure yields ``converged=False``.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = float(energy_fn(x))
    trace = []
    converged = False
    it = 0
    g = grad_fn(x)
    for it in range(1, max_iters + 1):
        gnorm = float(np.linalg.norm(g))
        trace.append((it, f, gnorm))
        if trace_cb is not None:
            trace_cb(it, f, gnorm)
        if f < energy_tol or gnorm < grad_tol:
            converged = True
            break
        H = project_psd(hess_fn(x))
        try:
            p = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            p = -g
        if g @ p >= 0:  # not a descent direction; fall back to steepest descent
            p = -g
        step = 1.0
        gp = float(g @ p)
        while True:
            x_new = x + step * p
            f_new = float(energy_fn(x_new))
            if f_new <= f + ARMIJO_C1 * step * gp:
                break
            step *= BACKTRACK
            if step < MIN_STEP:
                return SolveResult(x, f, it, False, gnorm, trace)
        x, f = x_new, f_new
        g = grad_fn(x)
    else:
        it = max_iters
    gnorm = float(np.linalg.norm(g))
    return SolveResult(x, f, it, converged, gnorm, trace)
