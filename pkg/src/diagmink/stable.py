"""D_p-balls and one-sided stable / max-stable laws.

A D_p-ball ``L`` has Minkowski functional ``|u|_L = sum_j w_j |u o v_j|_p``
for a spectral measure on the positive orthant. With ``p = 1/alpha`` it
parametrizes the one-sided strictly alpha-stable laws through their
Laplace transform ``exp(-|u^alpha|_L)``; with ``p = inf`` it parametrizes
the simple max-stable laws through ``P(xi <= u) = exp(-|1/u|_L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import (
    ZERO_TOL,
    ConvexBody,
    DiagScaled,
    DimensionError,
    MinkSum,
    Scaled,
    _frozen,
    _rows,
    lp_norm,
    support_set_singleton,
)
from .measures import DiscreteRandomVector, SphereMeasure
from .nnls import nnls
from .transforms import DirectionGrid

DEFAULT_SEED = 0xD1A6


def signed_power(x, beta: float) -> np.ndarray:
    """Componentwise ``sign(x) |x|^beta``."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** beta


@dataclass(frozen=True, eq=False)
class DpBall:
    """Exponent ``p`` in ``[1, inf]`` and a nonnegative spectral measure on ``S_+``."""

    p: float
    spectral: SphereMeasure
    bounded: bool = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (p >= 1 or math.isinf(p)) or math.isnan(p):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        mu = self.spectral
        if np.any(mu.weights < 0):
            raise ValueError("spectral weights must be nonnegative")
        if np.any(mu.directions < -ZERO_TOL):
            raise ValueError("spectral atoms must lie in the closed positive orthant")
        charged = mu.directions[mu.weights > 0]
        bounded = bool(np.all(np.any(charged > ZERO_TOL, axis=0))) if len(charged) else False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "bounded", bounded)

    @property
    def dim(self) -> int:
        return self.spectral.dim

    @classmethod
    def from_atoms(cls, p: float, directions, weights) -> "DpBall":
        return cls(p, SphereMeasure(directions, weights))

    @classmethod
    def lp_ball(cls, p: float, n: int) -> "DpBall":
        """``B_p`` itself: one atom at ``(1,...,1)/sqrt(n)`` of weight ``sqrt(n)``."""
        return cls(p, SphereMeasure(np.full((1, n), 1 / math.sqrt(n)), [math.sqrt(n)]))

    @classmethod
    def cross_polytope(cls, p: float, w) -> "DpBall":
        """``w^{-1} B_1`` with atoms ``w_i delta_{e_i}``; a D_p-ball for every ``p``."""
        w = np.asarray(w, dtype=float)
        return cls(p, SphereMeasure(np.eye(len(w)), w))


def minkowski_functional(L: DpBall, u):
    """``|u|_L = sum_j w_j |u o v_j|_p``, which is also ``h(L polar, u)``."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != L.dim:
        raise DimensionError(f"direction has dimension {u.shape[-1]}, ball has {L.dim}")
    U = np.atleast_2d(u)
    vals = np.zeros(len(U))
    for v, w in zip(L.spectral.directions, L.spectral.weights):
        vals += w * lp_norm(U * v, L.p)
    return float(vals[0]) if u.ndim == 1 else vals


def signed_power_functional(L: DpBall, beta: float, u):
    """Minkowski functional of the signed power ``L^<beta>``: ``|u^<1/beta>|_L^beta``."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    vals = np.asarray(minkowski_functional(L, signed_power(u, 1.0 / beta)))
    out = vals**beta
    return float(out) if out.ndim == 0 else out


# -- one-sided stable laws -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StableSpec:
    """Exponent ``alpha`` and spectral atoms ``(v_k, a_k)`` with ``v_k`` on ``S_+``.

    The law has Laplace transform ``exp(-sum_k a_k <u, v_k>^alpha)``.
    """

    alpha: float
    directions: np.ndarray
    weights: np.ndarray

    def __init__(self, alpha: float, directions, weights):
        alpha = float(alpha)
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        d = _rows(directions)
        a = np.atleast_1d(np.asarray(weights, dtype=float))
        if len(d) != len(a) or len(a) == 0:
            raise ValueError("need at least one atom and one weight per atom")
        if np.any(a <= 0):
            raise ValueError("spectral weights must be positive")
        if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > 1e-12) or np.any(d < -ZERO_TOL):
            raise ValueError("spectral atoms must be unit vectors in the positive orthant")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "directions", _frozen(np.maximum(d, 0.0)))
        object.__setattr__(self, "weights", _frozen(a))

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def exponent(self, u):
        """``sum_k a_k <u, v_k>^alpha`` for ``u`` in the positive orthant."""
        U = np.atleast_2d(np.asarray(u, dtype=float))
        vals = (np.maximum(U @ self.directions.T, 0.0) ** self.alpha) @ self.weights
        return float(vals[0]) if np.ndim(u) == 1 else vals

    def laplace(self, u):
        return np.exp(-np.asarray(self.exponent(u)))


def dp_to_stable(L: DpBall, alpha: float | None = None) -> StableSpec:
    """Spectral measure of the one-sided ``alpha``-stable law attached to a ``D_{1/alpha}``-ball.

    Each atom ``(m, b)`` becomes the direction ``m^{1/alpha}`` normalized,
    with weight ``b |m^{1/alpha}|^alpha``.
    """
    if alpha is None:
        alpha = 1.0 / L.p
    if not 0 < alpha <= 1 or abs(L.p * alpha - 1.0) > 1e-12:
        raise ValueError(f"need p = 1/alpha, got p={L.p}, alpha={alpha}")
    if not L.bounded:
        raise ValueError("the D_p-ball is unbounded")
    m, b = L.spectral.directions, L.spectral.weights
    if np.any(m < -ZERO_TOL):
        raise ValueError("spectral atoms must have nonnegative coordinates")
    keep = b > 0
    m, b = np.maximum(m[keep], 0.0), b[keep]
    powered = m ** (1.0 / alpha)
    norms = np.linalg.norm(powered, axis=1)
    return StableSpec(alpha, powered / norms[:, None], b * norms**alpha)


def stable_to_dp(spec: StableSpec) -> DpBall:
    """Inverse of :func:`dp_to_stable`."""
    a = spec.alpha
    powered = spec.directions**a
    norms = np.linalg.norm(powered, axis=1)
    return DpBall(1.0 / a, SphereMeasure(powered / norms[:, None], spec.weights * norms))


def laplace_exact(L: DpBall, u):
    """``exp(-|u^alpha|_L)`` with ``alpha = 1/p``."""
    alpha = 1.0 / L.p
    return np.exp(-np.asarray(minkowski_functional(L, np.asarray(u, dtype=float) ** alpha)))


def kanter_sample(alpha: float, rng: np.random.Generator, size=None):
    """One-sided strictly ``alpha``-stable draws with ``E exp(-s X) = exp(-s^alpha)``.

    Uses Kanter's representation
    ``X = sin(a T) / (sin T)^{1/a} * (sin((1-a) T) / W)^{(1-a)/a}`` with ``T``
    uniform on ``(0, pi)`` and ``W`` standard exponential.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    t = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    return np.sin(alpha * t) / np.sin(t) ** (1.0 / alpha) * (np.sin((1.0 - alpha) * t) / w) ** ((1.0 - alpha) / alpha)


def levy_half_sample(rng: np.random.Generator, size=None):
    """``1 / (2 Z^2)`` for standard normal ``Z``: the 1/2-stable law with transform ``exp(-sqrt(s))``."""
    z = rng.standard_normal(size)
    return 1.0 / (2.0 * z * z)


def sample_one_sided_stable(spec: StableSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` draws of ``sum_k zeta_k a_k^{1/alpha} v_k`` with independent stable ``zeta_k``."""
    if count <= 0:
        raise ValueError("count must be positive")
    a = spec.alpha
    loads = spec.weights[:, None] ** (1.0 / a) * spec.directions
    if a == 1:
        return np.tile(loads.sum(axis=0), (count, 1))
    zeta = kanter_sample(a, rng, (count, len(spec.weights)))
    return zeta @ loads


def empirical_laplace(samples: np.ndarray, U) -> tuple[np.ndarray, np.ndarray]:
    """Mean of ``exp(-<u, X>)`` per row of ``U`` and its three-sigma half width."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    e = np.exp(-samples @ U.T)
    return e.mean(axis=0), 3.0 * e.std(axis=0, ddof=1) / math.sqrt(len(samples))


@dataclass
class VerificationReport:
    grid: np.ndarray
    empirical: np.ndarray
    exact: np.ndarray
    three_sigma: np.ndarray
    n_samples: int
    seed: int
    tol: float

    @property
    def max_abs_dev(self) -> float:
        return float(np.abs(self.empirical - self.exact).max())

    @property
    def passed(self) -> bool:
        return self.max_abs_dev <= self.tol

    def to_json(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "empirical": self.empirical.tolist(),
            "exact": self.exact.tolist(),
            "three_sigma": self.three_sigma.tolist(),
            "max_abs_dev": self.max_abs_dev,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "tol": self.tol,
            "passed": self.passed,
        }


def square_grid(lo: float, hi: float, k: int, n: int = 2) -> np.ndarray:
    axis = np.linspace(lo, hi, k)
    return np.array(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T


def verify_laplace(L: DpBall, grid, count: int = 200_000, seed: int = DEFAULT_SEED, tol: float = 0.005) -> VerificationReport:
    """Empirical Laplace transform of sampled draws against ``exp(-|u^alpha|_L)``."""
    spec = dp_to_stable(L)
    rng = np.random.default_rng(seed)
    X = sample_one_sided_stable(spec, count, rng)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    emp, band = empirical_laplace(X, grid)
    return VerificationReport(grid, emp, laplace_exact(L, grid), band, count, seed, tol)


# -- max-stable laws -------------------------------------------------------------------


def _require_inf(L: DpBall) -> None:
    if not math.isinf(L.p):
        raise ValueError(f"max-stable laws need a D_inf-ball, got p={L.p}")


def sample_max_stable(L: DpBall, count: int, rng: np.random.Generator) -> np.ndarray:
    """``xi_i = max_j Z_j a_j v_{j,i}`` with independent unit Frechet ``Z_j``."""
    _require_inf(L)
    if count <= 0:
        raise ValueError("count must be positive")
    loads = L.spectral.weights[:, None] * L.spectral.directions
    Z = 1.0 / rng.standard_exponential((count, len(loads)))
    return (Z[:, :, None] * loads[None, :, :]).max(axis=1)


def max_stable_cdf(L: DpBall, u):
    """``P(xi <= u) = exp(-|1/u|_L)`` for ``u`` in the open positive orthant."""
    _require_inf(L)
    return np.exp(-np.asarray(minkowski_functional(L, 1.0 / np.asarray(u, dtype=float))))


def verify_cdf(L: DpBall, grid, count: int = 100_000, seed: int = DEFAULT_SEED, tol: float = 0.01) -> VerificationReport:
    rng = np.random.default_rng(seed)
    X = sample_max_stable(L, count, rng)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    hits = np.all(X[:, None, :] <= grid[None, :, :], axis=2).astype(float)
    emp = hits.mean(axis=0)
    band = 3.0 * hits.std(axis=0, ddof=1) / math.sqrt(count)
    return VerificationReport(grid, emp, max_stable_cdf(L, grid), band, count, seed, tol)


# -- re-representation --------------------------------------------------------------------


def positive_candidates(n: int, count: int | None = None) -> np.ndarray:
    """Near-uniform directions in ``S_+`` (``32 n`` by default) plus the coordinate axes."""
    count = count or 32 * n
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        t = np.linspace(0.0, math.pi / 2, count)
        pts = np.column_stack([np.cos(t), np.sin(t)])
    elif n == 3:
        k = np.arange(4 * count)
        z = (k + 0.5) / (4 * count)
        r = np.sqrt(1.0 - z * z)
        phi = k * math.pi * (3.0 - math.sqrt(5.0))
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        pts = pts[np.all(pts >= 0, axis=1)]
    else:
        pts = np.abs(np.random.default_rng(0).standard_normal((count, n)))
    pts = np.clip(pts, 0.0, None)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    axes = np.eye(n)
    fresh = [e for e in axes if np.min(np.linalg.norm(pts - e, axis=1)) > 1e-12]
    return np.vstack([pts] + fresh) if fresh else pts


def _positive_eval(grid: DirectionGrid) -> np.ndarray:
    return np.abs(grid.half)


@dataclass
class FitReport:
    residual: float
    fit_residual: float
    stationarity: float
    n_candidates: int
    n_eval: int
    n_holdout: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def rerepresent(
    L: DpBall,
    r: float,
    candidates=None,
    eval_grid: DirectionGrid | None = None,
    holdout_grid: DirectionGrid | None = None,
) -> tuple[DpBall, FitReport]:
    """Fit ``L`` as a ``D_r``-ball with atoms from ``candidates`` by nonnegative least squares.

    The residual is the largest absolute error of the fitted functional
    on held-out unit directions.
    """
    r = float(r)
    if not r > L.p:
        raise ValueError(f"need r > p, got r={r}, p={L.p}")
    n = L.dim
    cands = positive_candidates(n) if candidates is None else _rows(candidates)
    if len(cands) == 0:
        raise ValueError("candidate grid is empty")
    cands = cands / np.linalg.norm(cands, axis=1, keepdims=True)
    eval_grid = eval_grid or DirectionGrid.fibonacci(n, max(400, 16 * len(cands)))
    holdout_grid = holdout_grid or DirectionGrid.uniform(n, eval_grid.size, seed=DEFAULT_SEED)
    U, H = _positive_eval(eval_grid), _positive_eval(holdout_grid)
    if len(U) == 0 or len(H) == 0:
        raise ValueError("evaluation grids are empty")

    A = np.column_stack([lp_norm(U * v, r) for v in cands])
    b = np.asarray(minkowski_functional(L, U))
    sol = nnls(A, b)
    keep = sol.x > 0
    fitted = DpBall(r, SphereMeasure(cands[keep], sol.x[keep], dim=n))
    fit_res = float(np.abs(A @ sol.x - b).max())
    held = float(np.abs(minkowski_functional(fitted, H) - minkowski_functional(L, H)).max())
    return fitted, FitReport(held, fit_res, sol.stationarity, len(cands), len(U), len(H))


def polar_zonoid_check(L: DpBall, grid: DirectionGrid | None = None, candidates=None) -> FitReport:
    """Nonnegative cosine-transform fit to ``u -> |u|_L``.

    A small residual is numerical evidence that the polar body is a zonoid;
    it is not a proof. Residuals are relative to the largest target value.
    """
    if not 1 <= L.p <= 2:
        raise ValueError(f"the polar is known to be a zonoid only for p in [1, 2], got {L.p}")
    n = L.dim
    grid = grid or DirectionGrid.fibonacci(n, 400 if n == 2 else 2000)
    if candidates is None:
        cands = grid.half
    else:
        cands = _rows(candidates)
        cands = cands / np.linalg.norm(cands, axis=1, keepdims=True)
    U = grid.half
    holdout = DirectionGrid.uniform(n, grid.size, seed=DEFAULT_SEED).half
    A = np.abs(U @ cands.T)
    b = np.asarray(minkowski_functional(L, U))
    sol = nnls(A, b)
    scale = float(np.abs(b).max()) or 1.0
    fit_res = float(np.abs(A @ sol.x - b).max()) / scale
    held = float(np.abs(np.abs(holdout @ cands.T) @ sol.x - minkowski_functional(L, holdout)).max()) / scale
    return FitReport(held, fit_res, sol.stationarity, len(cands), len(U), len(holdout))


# -- expectations of random bodies -----------------------------------------------------------


def expectation_body(zeta: DiscreteRandomVector, L: ConvexBody) -> MinkSum:
    """``E(zeta L) = sum_i p_i (x_i L)``."""
    if zeta.dim != L.dim:
        raise DimensionError("law and body must share one dimension")
    return MinkSum(Scaled(p, DiagScaled(x, L)) for x, p in zip(zeta.points, zeta.probs))


def support_singleton_expectation(zeta: DiscreteRandomVector, L: ConvexBody, j: int) -> bool:
    """Whether ``F(E(zeta L), e_j)`` is a point (``j`` 0-based)."""
    return support_set_singleton(expectation_body(zeta, L), j)
