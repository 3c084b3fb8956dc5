"""K-transforms of sphere measures and the numerical probes built on them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, DimensionError, Polygon2D, _frozen, _rows, support
from .measures import SphereMeasure

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Antipodally closed set of unit directions.

    The first half of ``points`` holds one representative per antipodal
    pair; the second half holds their negatives in the same order.
    """

    points: np.ndarray
    scheme: str
    seed: int | None = None
    n: int = field(init=False)

    def __init__(self, points, scheme: str, seed: int | None = None):
        pts = _rows(points)
        half = len(pts) // 2
        if len(pts) % 2 or not np.array_equal(pts[half:], -pts[:half]):
            raise ValueError("grid points must be stored as (representatives, negatives)")
        if np.any(np.abs(np.linalg.norm(pts, axis=1) - 1.0) > 1e-12):
            raise ValueError("grid points must be unit vectors")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "n", pts.shape[1])

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def half(self) -> np.ndarray:
        return self.points[: self.size // 2]

    @classmethod
    def _from_half(cls, half: np.ndarray, scheme: str, seed=None) -> "DirectionGrid":
        half = half / np.linalg.norm(half, axis=1, keepdims=True)
        return cls(np.vstack([half, -half]), scheme, seed)

    @classmethod
    def fibonacci(cls, n: int, size: int) -> "DirectionGrid":
        """Deterministic near-uniform grid of ``size`` points.

        Equally spaced angles in the plane, a Fibonacci lattice on the upper
        hemisphere in 3-D, and a fixed-seed Gaussian cloud otherwise.
        """
        m = _half_count(size)
        if n == 1:
            if m != 1:
                raise ValueError("the 0-sphere has exactly two points")
            return cls._from_half(np.ones((1, 1)), "fibonacci-symmetric")
        if n == 2:
            t = math.pi * (np.arange(m) + 0.5) / m
            return cls._from_half(np.column_stack([np.cos(t), np.sin(t)]), "fibonacci-symmetric")
        if n == 3:
            k = np.arange(m)
            z = (k + 0.5) / m
            r = np.sqrt(1.0 - z * z)
            phi = k * GOLDEN_ANGLE
            return cls._from_half(np.column_stack([r * np.cos(phi), r * np.sin(phi), z]), "fibonacci-symmetric")
        rng = np.random.default_rng(0)
        return cls._from_half(rng.standard_normal((m, n)), "gaussian-symmetric")

    @classmethod
    def uniform(cls, n: int, size: int, seed: int) -> "DirectionGrid":
        """``size / 2`` seeded uniform directions plus their antipodes."""
        m = _half_count(size)
        rng = np.random.default_rng(seed)
        return cls._from_half(rng.standard_normal((m, n)), "uniform-seeded", seed)

    def positive_part(self) -> np.ndarray:
        """Representatives folded into the closed positive orthant."""
        return np.abs(self.half)


def _half_count(size: int) -> int:
    if size < 2 or size % 2:
        raise ValueError(f"grid size must be an even number >= 2, got {size}")
    return size // 2


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in ``R^n``."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _check_dims(K: ConvexBody, mu: SphereMeasure, u: np.ndarray) -> None:
    if K.dim != mu.dim or u.shape[-1] != K.dim:
        raise DimensionError(f"dimensions disagree: body {K.dim}, measure {mu.dim}, direction {u.shape[-1]}")


def k_transform(K: ConvexBody, mu: SphereMeasure, u):
    """``(T_K mu)(u) = sum_j w_j h(v_j K, u)``; vectorized over rows of ``u``."""
    u = np.asarray(u, dtype=float)
    _check_dims(K, mu, u)
    U = np.atleast_2d(u)
    vals = np.zeros(len(U))
    for v, w in zip(mu.directions, mu.weights):
        vals += w * support(K, U * v)
    return float(vals[0]) if u.ndim == 1 else vals


def cosine_transform(mu: SphereMeasure, u):
    """``sum_j w_j |<u, v_j>|``."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != mu.dim:
        raise DimensionError(f"direction has dimension {u.shape[-1]}, measure has {mu.dim}")
    vals = np.abs(np.atleast_2d(u) @ mu.directions.T) @ mu.weights
    return float(vals[0]) if u.ndim == 1 else vals


def lp_k_transform(K: ConvexBody, mu: SphereMeasure, u, p: float):
    """``(sum_j w_j h(v_j K, u)^p)^{1/p}`` for a nonnegative measure."""
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if np.any(mu.weights < 0):
        raise ValueError("the L_p transform needs a nonnegative measure")
    u = np.asarray(u, dtype=float)
    _check_dims(K, mu, u)
    U = np.atleast_2d(u)
    acc = np.zeros(len(U))
    for v, w in zip(mu.directions, mu.weights):
        acc += w * support(K, U * v) ** p
    vals = acc ** (1.0 / p)
    return float(vals[0]) if u.ndim == 1 else vals


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """Sampled K-transform ``M[k, j] = h(v_j K, u_k)`` with its SVD diagnostics."""

    directions: np.ndarray
    atoms: np.ndarray
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    kernel: np.ndarray
    residual: float
    rank_tol: float

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1]) if self.singular_values.size else 0.0

    def summary(self) -> dict:
        return {
            "rank": self.rank,
            "kernel_dim": self.kernel_dim,
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
            "residual": self.residual,
            "rank_tol": self.rank_tol,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.directions.shape[1]
        w.writerow([f"u{i + 1}" for i in range(n)] + [f"atom{j + 1}" for j in range(self.matrix.shape[1])])
        for u, row in zip(self.directions, self.matrix):
            w.writerow([repr(float(x)) for x in u] + [repr(float(x)) for x in row])
        return buf.getvalue()


def transform_matrix(K: ConvexBody, atoms: np.ndarray, directions: np.ndarray) -> np.ndarray:
    atoms = _rows(atoms)
    return np.column_stack([support(K, directions * v) for v in atoms])


def injectivity_probe(
    K: ConvexBody,
    atoms,
    grid: DirectionGrid,
    rank_tol: float = 1e-10,
    check_grid: DirectionGrid | None = None,
) -> TransformMatrix:
    """Numerical rank and kernel of the K-transform restricted to ``atoms``.

    ``atoms`` holds one representative per antipodal pair of an even
    measure. Each kernel vector is re-evaluated on ``check_grid`` (a fresh
    seeded grid by default); the reported residual is
    ``max |M' c| / (|c| * max |M'|)`` over the kernel basis.
    """
    atoms = _rows(atoms)
    if atoms.shape[1] != K.dim or grid.n != K.dim:
        raise DimensionError("atoms, grid and body must share one dimension")
    if len(atoms) == 0:
        raise ValueError("need at least one atom")
    if grid.size < 2 * len(atoms):
        raise ValueError(f"grid of {grid.size} directions is too small for {len(atoms)} atoms")
    M = transform_matrix(K, atoms, grid.points)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    kernel = vt[rank:].T.copy()
    residual = 0.0
    if kernel.shape[1]:
        if check_grid is None:
            check_grid = DirectionGrid.uniform(K.dim, grid.size, seed=0x5EED)
        M2 = transform_matrix(K, atoms, check_grid.points)
        scale = float(np.abs(M2).max()) or 1.0
        residual = float(np.abs(M2 @ kernel).max() / scale)
    return TransformMatrix(grid.points, atoms, M, s, rank, kernel, residual, rank_tol)


def surface_measure_2d(P: Polygon2D) -> SphereMeasure:
    """Outer edge normals weighted by edge lengths; collinear edges are merged."""
    e = P.edges()
    lengths = np.linalg.norm(e, axis=1)
    keep = lengths > 1e-12
    e, lengths = e[keep], lengths[keep]
    normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
    return SphereMeasure(normals, lengths, dim=2).merged()


def mixed_volume_transform(S: SphereMeasure, K: ConvexBody, u) -> float:
    """``V(L, ..., L, uK) = (1/n) sum_j S_j h(uK, n_j)`` for the surface measure ``S`` of ``L``."""
    u = np.asarray(u, dtype=float)
    _check_dims(K, S, u)
    return float(np.dot(S.weights, support(K, S.directions * u))) / K.dim


def mean_width_transform(K: ConvexBody, u, grid: DirectionGrid) -> float:
    """``(1/n) int h(uK, v) dv`` by equal-weight quadrature over ``grid``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (K.dim,) or grid.n != K.dim:
        raise DimensionError("body, direction and grid must share one dimension")
    vals = support(K, grid.points * u)
    return sphere_area(K.dim) * float(vals.mean()) / K.dim


def g_transform(K: ConvexBody, G, u) -> float:
    """``sum_g w_g h(gK, u)`` over a finite list of ``(matrix, weight)`` pairs."""
    u = np.asarray(u, dtype=float)
    if u.shape != (K.dim,):
        raise DimensionError(f"direction has dimension {u.shape}, body has {K.dim}")
    total = 0.0
    for g, w in G:
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"transformation must be a square matrix, got shape {g.shape}")
        if g.shape[0] != K.dim:
            raise DimensionError(f"matrix acts on R^{g.shape[0]}, body lives in R^{K.dim}")
        total += w * support(K, g.T @ u)
    return float(total)
