"""Active-set nonnegative least squares (Lawson and Hanson)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class NNLSResult:
    x: np.ndarray
    rnorm: float
    stationarity: float
    iterations: int


def projected_gradient(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Projected gradient of ``|Ax - b|^2 / 2`` on the orthant; zero at a KKT point."""
    g = A.T @ (A @ x - b)
    return np.where(x > 0, g, np.minimum(g, 0.0))


def nnls(A, b, tol: float | None = None, max_iter: int | None = None) -> NNLSResult:
    """Solve ``min |Ax - b|`` subject to ``x >= 0``.

    Parameters
    ----------
    A : array_like, shape (m, n)
    b : array_like, shape (m,)
    tol : float, optional
        Threshold on the dual vector for adding variables to the passive
        set. Defaults to ``1e-11 * max(1, |b|_inf)``, which keeps the
        projected gradient of the quadratic below ``1e-10`` on well-scaled
        problems.
    max_iter : int, optional
        Cap on outer iterations (default ``3 * n``).

    Returns
    -------
    NNLSResult
        Solution, residual norm, sup-norm of the projected gradient, and the
        number of outer iterations.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"b must have shape ({m},), got {b.shape}")
    eps = np.finfo(float).eps
    if tol is None:
        tol = 1e-11 * max(1.0, np.abs(b).max(initial=0.0))
    if max_iter is None:
        max_iter = 3 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    it = 0
    while (~passive).any() and w[~passive].max() > tol and it < max_iter:
        it += 1
        j = np.flatnonzero(~passive)[np.argmax(w[~passive])]
        passive[j] = True
        while passive.any():
            s = np.zeros(n)
            s[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if s[passive].min() > 0:
                x = s
                break
            neg = passive & (s <= 0)
            alpha = np.min(x[neg] / (x[neg] - s[neg]))
            x = x + alpha * (s - x)
            passive &= x > eps * max(1.0, np.abs(x).max())
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)

    if passive.any():
        # final polish on the passive set
        s = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
        if s.min() > 0:
            x = np.zeros(n)
            x[passive] = s
    r = A @ x - b
    return NNLSResult(x, float(np.linalg.norm(r)), float(np.abs(projected_gradient(A, b, x)).max(initial=0.0)), it)
