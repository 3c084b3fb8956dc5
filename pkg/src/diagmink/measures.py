"""Discrete signed sphere measures and finitely supported random vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .bodies import (
    MERGE_TOL,
    UNIT_TOL,
    ZERO_TOL,
    ConvexBody,
    DimensionError,
    Zonotope,
    _cluster_directions,
    _frozen,
    _rows,
    hadamard,
    support,
)

WEIGHT_DROP = 1e-15
PROB_RENORM_TOL = 1e-9
SIMPLEX_TOL = 1e-9


def on_S0(v, tol: float = ZERO_TOL) -> bool:
    """Some coordinate of ``v`` vanishes."""
    return bool(np.any(np.abs(np.asarray(v, dtype=float)) <= tol))


def in_Splus(v, tol: float = ZERO_TOL) -> bool:
    """All coordinates of ``v`` are nonnegative."""
    return bool(np.all(np.asarray(v, dtype=float) >= -tol))


def _pairs_antipodally(points: np.ndarray, masses: np.ndarray, tol: float) -> bool:
    """Whether the discrete law/measure is invariant under ``x -> -x``."""
    if len(points) == 0:
        return True
    clusters = _cluster_directions(np.vstack([points, -points]), tol)
    k = len(points)
    for c in clusters:
        plus = sum(masses[i] for i in c if i < k)
        minus = sum(masses[i - k] for i in c if i >= k)
        if abs(plus - minus) > tol * max(1.0, abs(plus), abs(minus)):
            return False
    return True


@dataclass(frozen=True, eq=False)
class SphereMeasure:
    """Finite signed measure ``sum_j w_j delta_{v_j}`` on the unit sphere."""

    directions: np.ndarray
    weights: np.ndarray
    even: bool = False
    dim: int = field(init=False)

    def __init__(self, directions, weights, even: bool = False, dim: int | None = None):
        d = _rows(directions, dim)
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if d.shape[0] != w.shape[0]:
            raise ValueError("need one weight per atom")
        if dim is not None and d.shape[1] != dim:
            raise DimensionError(f"atoms have dimension {d.shape[1]}, expected {dim}")
        if d.shape[1] < 1:
            raise DimensionError("dimension must be at least 1")
        if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > UNIT_TOL):
            raise ValueError("atoms must be unit vectors")
        keep = np.abs(w) > WEIGHT_DROP
        d, w = d[keep], w[keep]
        if even and not _pairs_antipodally(d, w, MERGE_TOL):
            raise ValueError("measure flagged even is not invariant under v -> -v")
        object.__setattr__(self, "directions", _frozen(d))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "even", bool(even))
        object.__setattr__(self, "dim", d.shape[1])

    @classmethod
    def dirac(cls, v, w: float = 1.0) -> "SphereMeasure":
        v = np.asarray(v, dtype=float)
        return cls(v[None, :] / np.linalg.norm(v), [w])

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    def __add__(self, other: "SphereMeasure") -> "SphereMeasure":
        if other.dim != self.dim:
            raise DimensionError("measures live in different dimensions")
        return SphereMeasure(
            np.vstack([self.directions, other.directions]),
            np.concatenate([self.weights, other.weights]),
            dim=self.dim,
        )

    def scaled(self, c: float) -> "SphereMeasure":
        return SphereMeasure(self.directions, c * self.weights, even=self.even, dim=self.dim)

    def reflected(self) -> "SphereMeasure":
        return SphereMeasure(-self.directions, self.weights, even=self.even, dim=self.dim)

    def merged(self, tol: float = MERGE_TOL) -> "SphereMeasure":
        """Combine atoms at coincident directions."""
        if len(self) == 0:
            return self
        dirs, ws = [], []
        for c in _cluster_directions(self.directions, tol):
            dirs.append(self.directions[c[0]])
            ws.append(self.weights[c].sum())
        return SphereMeasure(np.array(dirs), np.array(ws), even=self.even, dim=self.dim)


@dataclass(frozen=True, eq=False)
class DiscreteRandomVector:
    """Finitely supported law ``sum_i p_i delta_{x_i}`` on ``R^n``."""

    points: np.ndarray
    probs: np.ndarray
    symmetric: bool = False
    dim: int = field(init=False)

    def __init__(self, points, probs, symmetric: bool = False, dim: int | None = None):
        x = _rows(points, dim)
        p = np.atleast_1d(np.asarray(probs, dtype=float))
        if x.shape[0] != p.shape[0] or x.shape[0] == 0:
            raise ValueError("need at least one atom and one probability per atom")
        if dim is not None and x.shape[1] != dim:
            raise DimensionError(f"atoms have dimension {x.shape[1]}, expected {dim}")
        if np.any(p <= 0):
            raise ValueError("probabilities must be positive")
        total = p.sum()
        if abs(total - 1.0) > PROB_RENORM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")
        p = p / total
        if symmetric and not _pairs_antipodally(x, p, MERGE_TOL):
            raise ValueError("law flagged symmetric is not invariant under x -> -x")
        object.__setattr__(self, "points", _frozen(x))
        object.__setattr__(self, "probs", _frozen(p))
        object.__setattr__(self, "symmetric", bool(symmetric))
        object.__setattr__(self, "dim", x.shape[1])

    @classmethod
    def dirac(cls, x) -> "DiscreteRandomVector":
        return cls(np.asarray(x, dtype=float)[None, :], [1.0])

    @classmethod
    def uniform(cls, points, symmetric: bool = False) -> "DiscreteRandomVector":
        x = _rows(points)
        return cls(x, np.full(len(x), 1.0 / len(x)), symmetric=symmetric)

    def symmetrized(self) -> "DiscreteRandomVector":
        """Law of ``eps * x`` with an independent fair sign ``eps``."""
        return DiscreteRandomVector(
            np.vstack([self.points, -self.points]),
            np.concatenate([self.probs, self.probs]) / 2,
            symmetric=True,
        )

    def scaled(self, c) -> "DiscreteRandomVector":
        """Law of ``c * x`` (scalar) or ``c o x`` (componentwise)."""
        return DiscreteRandomVector(self.points * np.asarray(c, dtype=float), self.probs, symmetric=self.symmetric)

    def mixture(self, other: "DiscreteRandomVector", t: float) -> "DiscreteRandomVector":
        """Law of the mixture ``(1 - t) self + t other``."""
        if not 0 < t < 1:
            raise ValueError("mixture weight must lie in (0, 1)")
        return DiscreteRandomVector(
            np.vstack([self.points, other.points]),
            np.concatenate([(1 - t) * self.probs, t * other.probs]),
            symmetric=self.symmetric and other.symmetric,
        )

    def mean(self, f) -> float:
        """``E f(x)`` for ``f`` mapping an ``(m, n)`` stack to ``(m,)`` values."""
        return float(np.dot(self.probs, f(self.points)))


def evenize(mu: SphereMeasure) -> SphereMeasure:
    """``(mu + reflected mu) / 2``, with coincident atoms merged."""
    both = SphereMeasure(
        np.vstack([mu.directions, -mu.directions]),
        np.concatenate([mu.weights, mu.weights]) / 2,
        dim=mu.dim,
    ).merged()
    return SphereMeasure(both.directions, both.weights, even=True, dim=mu.dim)


def measure_of_vector(xi: DiscreteRandomVector) -> SphereMeasure:
    """The measure ``A -> E(|xi| 1{xi/|xi| in A})``."""
    norms = np.linalg.norm(xi.points, axis=1)
    keep = norms > ZERO_TOL
    d = xi.points[keep] / norms[keep, None]
    return SphereMeasure(d, xi.probs[keep] * norms[keep], even=xi.symmetric, dim=xi.dim)


def expected_support(xi: DiscreteRandomVector, K: ConvexBody, u) -> float:
    """``E h(uK, xi)``, evaluated as ``sum_i p_i h(K, u o x_i)``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (xi.dim,) or K.dim != xi.dim:
        raise DimensionError("law, body and direction must share one dimension")
    return float(np.dot(xi.probs, support(K, xi.points * u)))


def expected_support_by_atoms(xi: DiscreteRandomVector, K: ConvexBody, u) -> float:
    """Same quantity via ``sum_i p_i h(x_i K, u)``; diagonal actions are self-adjoint."""
    u = np.asarray(u, dtype=float)
    return float(sum(p * support(hadamard(x, K), u) for x, p in zip(xi.points, xi.probs)))


def zonoid_of(xi: DiscreteRandomVector) -> Zonotope:
    """Zonotope with support ``E|<u, xi>|``: generators ``p_i x_i``."""
    return Zonotope(xi.points * xi.probs[:, None], dim=xi.dim)


def _check_simplex(alpha: np.ndarray, E: list[int], n: int) -> None:
    if alpha.shape != (n,):
        raise DimensionError(f"alpha must have dimension {n}")
    off = np.ones(n, dtype=bool)
    off[E] = False
    if (
        np.any(alpha < -SIMPLEX_TOL)
        or np.any(np.abs(alpha[off]) > SIMPLEX_TOL)
        or abs(alpha.sum() - 1.0) > SIMPLEX_TOL
    ):
        raise ValueError(f"alpha={alpha.tolist()} is not in the unit simplex over E={E}")


def in_A_E(x: np.ndarray, E, tol: float = ZERO_TOL) -> np.ndarray:
    """Rows of ``x`` that are nonzero exactly on the coordinates ``E``."""
    x = np.atleast_2d(x)
    mask = np.zeros(x.shape[1], dtype=bool)
    mask[list(E)] = True
    nz = np.abs(x) > tol
    return np.all(nz == mask, axis=1)


def abs_power(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """``[x]^alpha = prod_i |x_i|^alpha_i`` per row, with ``0^0 = 1``."""
    x = np.atleast_2d(np.abs(x))
    with np.errstate(divide="ignore"):
        terms = np.where(alpha == 0, 1.0, x ** np.where(alpha == 0, 1.0, alpha))
    return terms.prod(axis=1)


def moment_f(xi: DiscreteRandomVector, alpha, J, E) -> float:
    """``E(f_{alpha,J}(xi) 1{xi in A_E})`` where ``f = [x]^alpha prod_{j in J} sign(x_j)``.

    ``J`` and ``E`` are 0-based index sets with ``J`` inside ``E``; ``alpha``
    lies in the unit simplex supported on ``E``.
    """
    E = sorted(set(int(e) for e in E))
    J = sorted(set(int(j) for j in J))
    if not set(J) <= set(E):
        raise ValueError("J must be a subset of E")
    if E and (E[0] < 0 or E[-1] >= xi.dim):
        raise IndexError("index out of range")
    alpha = np.asarray(alpha, dtype=float)
    if E:
        _check_simplex(alpha, E, xi.dim)
    elif np.any(np.abs(alpha) > SIMPLEX_TOL):
        raise ValueError("alpha must vanish for empty E")
    x = xi.points
    vals = abs_power(x, alpha) * np.prod(np.sign(x[:, J]), axis=1) * in_A_E(x, E)
    # exactly rounded sum: antipodal atoms of a symmetric law cancel to 0.0
    return math.fsum(xi.probs * vals)


def sign_conditioned_moment(xi: DiscreteRandomVector, alpha, s, E) -> float:
    """``E([xi]^alpha 1{xi in A_E} 1{sign(xi) = s})`` for a sign pattern ``s`` on ``E``."""
    E = sorted(set(int(e) for e in E))
    s = np.asarray(s, dtype=float)
    x = xi.points
    signs = np.sign(np.where(np.abs(x) > ZERO_TOL, x, 0.0))
    match = np.all(signs == s, axis=1)
    vals = abs_power(x, np.asarray(alpha, dtype=float)) * in_A_E(x, E) * match
    return float(np.dot(xi.probs, vals))


def sign_pattern_reconstruction(xi: DiscreteRandomVector, alpha, s, E) -> float:
    """``2^{-|E|} sum_{J subset E} prod_{i in J} s_i E(f_{alpha,J} 1_{A_E})``.

    The sum over subsets isolates the sign class ``s``; the result equals
    :func:`sign_conditioned_moment`.
    """
    E = sorted(set(int(e) for e in E))
    s = np.asarray(s, dtype=float)
    total = 0.0
    for mask in product((0, 1), repeat=len(E)):
        J = [e for e, m in zip(E, mask) if m]
        total += np.prod(s[J]) * moment_f(xi, alpha, J, E)
    return total / 2 ** len(E)


def alpha_moment(xi: DiscreteRandomVector, u, alpha: float) -> float:
    """``E|<u, xi>|^alpha``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return float(np.dot(xi.probs, np.abs(xi.points @ np.asarray(u, dtype=float)) ** alpha))


def max_moment(xi: DiscreteRandomVector, u, alpha: float) -> float:
    """``E(max_i u_i xi_i)^alpha`` for ``xi`` and ``u`` in the positive orthant."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(xi.points < 0):
        raise ValueError("max moments need nonnegative u and a nonnegative law")
    return float(np.dot(xi.probs, (xi.points * u).max(axis=1) ** alpha))
