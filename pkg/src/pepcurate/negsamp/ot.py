"""Entropic optimal transport by Sinkhorn scaling.

Two problems are solved. ``sinkhorn`` is the balanced one: the plan's row
sums equal ``a`` and its column sums equal ``b``. ``sinkhorn_capacity``
keeps the row constraint but only caps each column at ``cap``; it is what the
sampler uses, because under uniform balanced marginals every pool column
receives identical mass and "greatest transported mass" cannot rank them.

Both switch to log-domain updates when some row (or, for the balanced case,
column) of exp(-C/eps) would be entirely below ``exp(-LOG_SWITCH)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import NoConvergence

LOG_SWITCH = 50.0


@dataclass
class SinkhornResult:
    plan: np.ndarray | None     # omitted when return_plan=False
    row_mass: np.ndarray
    column_mass: np.ndarray
    converged: bool
    iterations: int
    violation: float            # L1 marginal violation of the returned iterate
    log_domain: bool


def _check(a, C, epsilon):
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if C.ndim != 2 or C.shape[0] != a.size:
        raise ValueError("cost matrix shape does not match marginals")


def _masses(K, u, v, C, f, g, epsilon, return_plan):
    if K is not None:
        rows, cols = u * (K @ v), v * (K.T @ u)
        P = u[:, None] * K * v[None, :] if return_plan else None
    else:
        L = (f[:, None] + g[None, :] - C) / epsilon
        rows, cols = np.exp(logsumexp(L, axis=1)), np.exp(logsumexp(L, axis=0))
        P = np.exp(L) if return_plan else None
    return P, rows, cols


def _finish(P, rows, cols, viol, it, log_domain, tol):
    converged = viol < tol
    if not converged:
        warnings.warn(f"Sinkhorn stopped after {it} iterations with marginal violation {viol:.3g} "
                      f"(tolerance {tol:g})", NoConvergence, stacklevel=3)
    return SinkhornResult(P, rows, cols, converged, it, viol, log_domain)


def sinkhorn(a, b, C, epsilon: float = 0.05, iters: int = 1000, tol: float = 1e-6,
             return_plan: bool = True) -> SinkhornResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    _check(a, C, epsilon)
    if C.shape[1] != b.size:
        raise ValueError("cost matrix shape does not match marginals")
    use_log = max(C.min(axis=1).max(), C.min(axis=0).max()) / epsilon > LOG_SWITCH
    viol, it = np.inf, 0
    if not use_log:
        f = g = None
        K = np.exp(-C / epsilon)
        u, v = np.ones_like(a), np.ones_like(b)
        for it in range(1, iters + 1):
            u = a / (K @ v)
            v = b / (K.T @ u)
            # columns are exact after the v update; only rows can be off
            viol = float(np.abs(u * (K @ v) - a).sum())
            if viol < tol:
                break
    else:
        K = u = v = None
        la, lb = np.log(a), np.log(b)
        f, g = np.zeros_like(a), np.zeros_like(b)
        for it in range(1, iters + 1):
            f = epsilon * (la - logsumexp((g[None, :] - C) / epsilon, axis=1))
            g = epsilon * (lb - logsumexp((f[:, None] - C) / epsilon, axis=0))
            rows = np.exp(logsumexp((f[:, None] + g[None, :] - C) / epsilon, axis=1))
            viol = float(np.abs(rows - a).sum())
            if viol < tol:
                break
    P, rows, cols = _masses(K, u, v, C, f, g, epsilon, return_plan)
    viol = float(np.abs(rows - a).sum() + np.abs(cols - b).sum())
    return _finish(P, rows, cols, viol, it, use_log, tol)


def sinkhorn_capacity(a, cap: float, C, epsilon: float = 0.05, iters: int = 1000,
                      tol: float = 1e-6, return_plan: bool = True) -> SinkhornResult:
    """Rows sum to ``a``; every column sum is at most ``cap``.

    The column step is the KL proximal map of the capacity constraint,
    v = min(1, cap / K^T u).
    """
    a = np.asarray(a, dtype=float)
    C = np.asarray(C, dtype=float)
    _check(a, C, epsilon)
    if cap * C.shape[1] < a.sum() - 1e-12:
        raise ValueError("column capacity cannot absorb the row mass")
    use_log = C.min(axis=1).max() / epsilon > LOG_SWITCH
    viol, it = np.inf, 0
    if not use_log:
        f = g = None
        K = np.exp(-C / epsilon)
        u, v = np.ones_like(a), np.ones(C.shape[1])
        for it in range(1, iters + 1):
            u = a / (K @ v)
            v = np.minimum(1.0, cap / (K.T @ u))
            viol = float(np.abs(u * (K @ v) - a).sum())
            if viol < tol:
                break
    else:
        K = u = v = None
        la, lcap = np.log(a), np.log(cap)
        f, g = np.zeros_like(a), np.zeros(C.shape[1])
        for it in range(1, iters + 1):
            f = epsilon * (la - logsumexp((g[None, :] - C) / epsilon, axis=1))
            g = np.minimum(0.0, epsilon * (lcap - logsumexp((f[:, None] - C) / epsilon, axis=0)))
            rows = np.exp(logsumexp((f[:, None] + g[None, :] - C) / epsilon, axis=1))
            viol = float(np.abs(rows - a).sum())
            if viol < tol:
                break
    P, rows, cols = _masses(K, u, v, C, f, g, epsilon, return_plan)
    viol = float(np.abs(rows - a).sum() + np.maximum(cols - cap, 0.0).sum())
    return _finish(P, rows, cols, viol, it, use_log, tol)
