"""Origin-symmetric convex bodies and their support functions.

Every body is an immutable value. ``support(K, u)`` accepts a single
direction of shape ``(n,)`` or a stack of directions of shape ``(m, n)``
and returns a float or an array of shape ``(m,)`` respectively.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

ZERO_TOL = 1e-12
UNIT_TOL = 1e-12
MERGE_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when the dimensions of a body and a vector disagree."""


class UnsupportedBodyError(TypeError):
    """Raised when an operation has no rule for the given body variant."""


def _vec(u) -> np.ndarray:
    a = np.asarray(u, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"expected a vector, got shape {a.shape}")
    return a


def _rows(a, n: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, n or 0)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def dual_exponent(q: float) -> float:
    """Conjugate exponent ``p`` with ``1/p + 1/q = 1``; boundaries exact."""
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    if not q > 1:
        raise ValueError(f"exponent must lie in [1, inf], got {q}")
    return q / (q - 1.0)


def lp_norm(x: np.ndarray, p: float) -> np.ndarray:
    """``p``-norm along the last axis (``p`` may be ``inf``)."""
    x = np.abs(np.asarray(x, dtype=float))
    if math.isinf(p):
        return x.max(axis=-1) if x.shape[-1] else np.zeros(x.shape[:-1])
    if p == 1:
        return x.sum(axis=-1)
    if p == 2:
        return np.sqrt((x * x).sum(axis=-1))
    # scale before powering to avoid overflow / underflow for large p
    m = x.max(axis=-1, keepdims=True) if x.shape[-1] else np.zeros(x.shape[:-1] + (1,))
    safe = np.where(m > 0, m, 1.0)
    return (m[..., 0]) * ((x / safe) ** p).sum(axis=-1) ** (1.0 / p)


class ConvexBody:
    """Base class of all body variants."""

    dim: int

    def support(self, u):
        return support(self, u)

    def __add__(self, other: "ConvexBody") -> "MinkSum":
        return MinkSum((self, other))


@dataclass(frozen=True, eq=False)
class Zonotope(ConvexBody):
    """Minkowski sum of the segments ``[-g, g]`` over the generator rows ``g``."""

    generators: np.ndarray
    dim: int = field(init=False)

    def __init__(self, generators, dim: int | None = None):
        g = np.asarray(generators, dtype=float)
        if g.ndim == 1:
            g = g.reshape(1, -1) if g.size else g.reshape(0, dim or 0)
        if g.ndim != 2:
            raise ValueError("generators must be a 2-D array")
        if dim is not None and g.shape[1] != dim:
            raise DimensionError(f"generators have dimension {g.shape[1]}, expected {dim}")
        if g.shape[1] < 1:
            raise DimensionError("dimension must be at least 1")
        object.__setattr__(self, "generators", _frozen(g))
        object.__setattr__(self, "dim", g.shape[1])

    def __repr__(self):
        return f"Zonotope({self.generators.tolist()})"


@dataclass(frozen=True, eq=False)
class GeneralizedZonoid(ConvexBody):
    """Body with support function ``sum_j w_j |<u, v_j>|`` for unit ``v_j``.

    Negative weights are allowed; they need not produce a convex body. A
    sampled subadditivity check is run and a warning is emitted on failure.
    """

    directions: np.ndarray
    weights: np.ndarray
    dim: int = field(init=False)

    def __init__(self, directions, weights, check: bool = True):
        d = _rows(directions)
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if d.shape[0] != w.shape[0]:
            raise ValueError("need one weight per direction")
        if d.shape[1] < 1:
            raise DimensionError("dimension must be at least 1")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError("atom directions must have unit Euclidean norm")
        object.__setattr__(self, "directions", _frozen(d))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "dim", d.shape[1])
        if check and np.any(w < 0) and not subadditive_on_samples(self):
            warnings.warn(
                "signed representing measure fails sampled subadditivity; "
                "the support values do not define a convex body",
                RuntimeWarning,
                stacklevel=2,
            )

    @classmethod
    def from_vectors(cls, vectors, check: bool = True) -> "GeneralizedZonoid":
        """Atoms ``(x/|x|, |x|)`` from nonzero vectors ``x``."""
        x = _rows(vectors)
        norms = np.linalg.norm(x, axis=1)
        keep = norms > ZERO_TOL
        return cls(x[keep] / norms[keep, None], norms[keep], check=check)

    def __repr__(self):
        return f"GeneralizedZonoid(directions={self.directions.tolist()}, weights={self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class LpBall(ConvexBody):
    """Unit ball of the ``q``-norm in ``R^dim``."""

    q: float
    dim: int

    def __post_init__(self):
        q = float(self.q)
        if not (q >= 1 or math.isinf(q)) or math.isnan(q):
            raise ValueError(f"q must lie in [1, inf], got {self.q}")
        if int(self.dim) < 1:
            raise DimensionError("dimension must be at least 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def p(self) -> float:
        return dual_exponent(self.q)


@dataclass(frozen=True, eq=False)
class DiagScaled(ConvexBody):
    """The image ``scale * inner`` under the diagonal matrix ``diag(scale)``."""

    scale: np.ndarray
    inner: ConvexBody
    dim: int = field(init=False)

    def __init__(self, scale, inner: ConvexBody):
        s = _vec(scale)
        if s.shape[0] != inner.dim:
            raise DimensionError(f"scale has dimension {s.shape[0]}, body has {inner.dim}")
        object.__setattr__(self, "scale", _frozen(s))
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "dim", inner.dim)


@dataclass(frozen=True, eq=False)
class MinkSum(ConvexBody):
    parts: tuple
    dim: int = field(init=False)

    def __init__(self, parts: Iterable[ConvexBody]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("a Minkowski sum needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DimensionError(f"parts have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "dim", dims.pop())


@dataclass(frozen=True, eq=False)
class Scaled(ConvexBody):
    c: float
    inner: ConvexBody
    dim: int = field(init=False)

    def __init__(self, c: float, inner: ConvexBody):
        c = float(c)
        if not c >= 0:
            raise ValueError(f"scaling factor must be nonnegative, got {c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "dim", inner.dim)


@dataclass(frozen=True, eq=False)
class Polygon2D(ConvexBody):
    """Origin-symmetric convex polygon, vertices in strict counterclockwise order."""

    vertices: np.ndarray
    dim: int = field(init=False, default=2)

    def __init__(self, vertices, tol: float = 1e-9):
        v = _rows(vertices)
        if v.shape[1] != 2 or v.shape[0] < 4 or v.shape[0] % 2:
            raise ValueError("need an even number (>= 4) of planar vertices")
        k = v.shape[0]
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = max(1.0, float(np.abs(v).max()))
        if np.any(cross <= -tol * scale * scale):
            raise ValueError("vertices are not in convex counterclockwise order")
        # winding number one: edge directions turn through 2*pi in total
        ang = np.arctan2(e[:, 1], e[:, 0])
        turn = np.mod(np.roll(ang, -1) - ang, 2 * np.pi)
        if abs(turn.sum() - 2 * np.pi) > 1e-6:
            raise ValueError("vertices are not in convex counterclockwise order")
        half = k // 2
        if not np.allclose(v[half:], -v[:half], atol=tol * scale):
            raise ValueError("polygon is not origin-symmetric (v[i + k/2] must equal -v[i])")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "dim", 2)

    @classmethod
    def regular(cls, k: int, radius: float = 1.0, phase: float = 0.0) -> "Polygon2D":
        if k % 2 or k < 4:
            raise ValueError("a symmetric regular polygon needs an even k >= 4")
        t = phase + 2 * np.pi * np.arange(k) / k
        return cls(radius * np.column_stack([np.cos(t), np.sin(t)]))

    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


Body = Union[Zonotope, GeneralizedZonoid, LpBall, DiagScaled, MinkSum, Scaled, Polygon2D]


def unit_segment(n: int) -> Zonotope:
    """The segment with end points ``-(1,...,1)`` and ``(1,...,1)``."""
    return Zonotope(np.ones((1, n)))


def support(K: ConvexBody, u):
    """Support function ``h(K, u)``; vectorized over rows of ``u``."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError(f"directions must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[-1] != K.dim:
        raise DimensionError(f"direction has dimension {arr.shape[-1]}, body has {K.dim}")
    out = _support_rows(K, np.atleast_2d(arr))
    return float(out[0]) if arr.ndim == 1 else out


def _support_rows(K: ConvexBody, U: np.ndarray) -> np.ndarray:
    if isinstance(K, Zonotope):
        return np.abs(U @ K.generators.T).sum(axis=1)
    if isinstance(K, GeneralizedZonoid):
        return np.abs(U @ K.directions.T) @ K.weights
    if isinstance(K, LpBall):
        return lp_norm(U, K.p)
    if isinstance(K, DiagScaled):
        return _support_rows(K.inner, U * K.scale)
    if isinstance(K, MinkSum):
        return sum(_support_rows(p, U) for p in K.parts)
    if isinstance(K, Scaled):
        if K.c == 0:
            return np.zeros(U.shape[0])
        return K.c * _support_rows(K.inner, U)
    if isinstance(K, Polygon2D):
        return (U @ K.vertices.T).max(axis=1)
    raise UnsupportedBodyError(f"no support rule for {type(K).__name__}")


def subadditive_on_samples(K: ConvexBody, trials: int = 256, seed: int = 0, rtol: float = 1e-9) -> bool:
    """Sampled check of ``h(u + v) <= h(u) + h(v)`` on random direction pairs."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((trials, K.dim))
    v = rng.standard_normal((trials, K.dim))
    hu, hv, huv = _support_rows(K, u), _support_rows(K, v), _support_rows(K, u + v)
    scale = np.abs(hu) + np.abs(hv) + 1.0
    return bool(np.all(huv <= hu + hv + rtol * scale))


def hadamard(u, K: ConvexBody) -> ConvexBody:
    """Diagonal image ``uK``; zonotope generators are rescaled in place."""
    u = _vec(u)
    if u.shape[0] != K.dim:
        raise DimensionError(f"vector has dimension {u.shape[0]}, body has {K.dim}")
    if isinstance(K, Zonotope):
        return Zonotope(K.generators * u)
    return DiagScaled(u, K)


def diag_body(terms: Sequence[tuple], K: ConvexBody) -> MinkSum:
    """Minkowski sum ``c_1 v_1 K + ... + c_m v_m K``."""
    if not terms:
        raise ValueError("need at least one term")
    parts = []
    for c, v in terms:
        if c < 0:
            raise ValueError(f"coefficients must be nonnegative, got {c}")
        parts.append(Scaled(c, DiagScaled(v, K)))
    return MinkSum(parts)


def project(K: ConvexBody, J) -> ConvexBody:
    """Projection ``K_J`` onto the coordinate subspace indexed by ``J`` (0-based)."""
    J = _index_set(J, K.dim)
    if isinstance(K, Zonotope):
        return Zonotope(K.generators[:, J], dim=len(J))
    if isinstance(K, GeneralizedZonoid):
        sub = K.directions[:, J]
        norms = np.linalg.norm(sub, axis=1)
        keep = norms > ZERO_TOL
        if not keep.any():
            return Zonotope(np.zeros((0, len(J))), dim=len(J))
        return GeneralizedZonoid(sub[keep] / norms[keep, None], K.weights[keep] * norms[keep], check=False)
    if isinstance(K, LpBall):
        return LpBall(K.q, len(J))
    if isinstance(K, DiagScaled):
        return DiagScaled(K.scale[J], project(K.inner, J))
    if isinstance(K, MinkSum):
        return MinkSum(project(p, J) for p in K.parts)
    if isinstance(K, Scaled):
        return Scaled(K.c, project(K.inner, J))
    if isinstance(K, Polygon2D):
        if len(J) == 2:
            return K
        e = np.zeros(2)
        e[J[0]] = 1.0
        return Zonotope([[support(K, e)]])
    raise UnsupportedBodyError(f"no projection rule for {type(K).__name__}")


def _index_set(J, n: int) -> list[int]:
    J = sorted({int(j) for j in J})
    if not J:
        raise ValueError("index set must be nonempty")
    if J[0] < 0 or J[-1] >= n:
        raise IndexError(f"indices {J} out of range for dimension {n}")
    return J


# -- reductions -------------------------------------------------------------


def as_zonotope(K: ConvexBody) -> Zonotope | None:
    """Exact zonotope form of ``K``, or ``None`` if ``K`` is not one we can see.

    Symmetric polygons are zonotopes with half of their edges as generators;
    the cube ``B_inf`` is the zonotope of the basis vectors.
    """
    if isinstance(K, Zonotope):
        return K
    if isinstance(K, GeneralizedZonoid):
        if np.any(K.weights < 0):
            merged = canonical_genzonoid(K)
            if np.any(merged.weights < 0):
                return None
            K = merged
        return Zonotope(K.directions * K.weights[:, None], dim=K.dim)
    if isinstance(K, LpBall):
        if math.isinf(K.q) or K.dim == 1:
            return Zonotope(np.eye(K.dim))
        return None
    if isinstance(K, DiagScaled):
        z = as_zonotope(K.inner)
        return None if z is None else Zonotope(z.generators * K.scale, dim=K.dim)
    if isinstance(K, MinkSum):
        zs = [as_zonotope(p) for p in K.parts]
        if any(z is None for z in zs):
            return None
        return Zonotope(np.vstack([z.generators for z in zs]), dim=K.dim)
    if isinstance(K, Scaled):
        z = as_zonotope(K.inner)
        return None if z is None else Zonotope(z.generators * K.c, dim=K.dim)
    if isinstance(K, Polygon2D):
        half = K.vertices.shape[0] // 2
        return Zonotope(0.5 * K.edges()[:half])
    return None


def as_generalized_zonoid(K: ConvexBody) -> GeneralizedZonoid | None:
    """Representing atoms of ``K`` if it is (visibly) a generalized zonoid."""
    if isinstance(K, GeneralizedZonoid):
        return K
    if isinstance(K, DiagScaled):
        g = as_generalized_zonoid(K.inner)
        if g is None:
            return None
        x = g.directions * K.scale
        norms = np.linalg.norm(x, axis=1)
        keep = norms > ZERO_TOL
        return GeneralizedZonoid(x[keep] / norms[keep, None], g.weights[keep] * norms[keep], check=False)
    if isinstance(K, Scaled):
        g = as_generalized_zonoid(K.inner)
        return None if g is None else GeneralizedZonoid(g.directions, K.c * g.weights, check=False)
    if isinstance(K, MinkSum):
        gs = [as_generalized_zonoid(p) for p in K.parts]
        if any(g is None for g in gs):
            return None
        return GeneralizedZonoid(
            np.vstack([g.directions for g in gs]).reshape(-1, K.dim),
            np.concatenate([g.weights for g in gs]),
            check=False,
        )
    z = as_zonotope(K)
    if z is None:
        return None
    return GeneralizedZonoid.from_vectors(z.generators, check=False) if len(z.generators) else GeneralizedZonoid(
        np.zeros((0, K.dim)), np.zeros(0), check=False
    )


# -- canonical forms ----------------------------------------------------------


def _orient(x: np.ndarray, tol: float) -> np.ndarray:
    """Flip rows so that the first coordinate above ``tol`` in magnitude is positive."""
    x = x.copy()
    for i, row in enumerate(x):
        nz = np.flatnonzero(np.abs(row) > tol)
        if nz.size and row[nz[0]] < 0:
            x[i] = -row
    return x


def _cluster_directions(dirs: np.ndarray, tol: float) -> list[list[int]]:
    clusters: list[list[int]] = []
    reps: list[np.ndarray] = []
    for i, d in enumerate(dirs):
        for c, r in zip(clusters, reps):
            if np.linalg.norm(d - r) <= tol:
                c.append(i)
                break
        else:
            clusters.append([i])
            reps.append(d)
    return clusters


def _lexsort_rows(x: np.ndarray, tol: float) -> np.ndarray:
    if len(x) == 0:
        return x
    keys = np.round(x / tol) if tol > 0 else x
    order = np.lexsort(keys.T[::-1])
    return x[order]


def canonical_zonotope(Z: Zonotope, tol: float = MERGE_TOL) -> Zonotope:
    """Canonical generator list of a zonotope.

    Zero generators are dropped, each generator is oriented so its first
    nonzero coordinate is positive, parallel generators are merged, and the
    result is sorted lexicographically.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = Z.generators
    norms = np.linalg.norm(g, axis=1)
    g, norms = g[norms > tol], norms[norms > tol]
    if len(g) == 0:
        return Zonotope(np.zeros((0, Z.dim)), dim=Z.dim)
    g = _orient(g, tol)
    dirs = g / norms[:, None]
    merged = np.array([g[c].sum(axis=0) for c in _cluster_directions(dirs, tol)])
    return Zonotope(_lexsort_rows(merged, tol), dim=Z.dim)


def zonotopes_equal(A: Zonotope, B: Zonotope, tol: float = MERGE_TOL) -> bool:
    """Equality of zonotopes as point sets, via canonical generators."""
    if A.dim != B.dim:
        raise DimensionError("zonotopes live in different dimensions")
    ca, cb = canonical_zonotope(A, tol).generators, canonical_zonotope(B, tol).generators
    if ca.shape != cb.shape:
        return False
    scale = max(1.0, float(np.abs(ca).max(initial=0.0)), float(np.abs(cb).max(initial=0.0)))
    if np.allclose(ca, cb, rtol=0, atol=tol * scale):
        return True
    # rows with nearly tied sort keys can land in different orders
    unused = list(range(len(cb)))
    for row in ca:
        for k in unused:
            if np.max(np.abs(row - cb[k])) <= tol * scale:
                unused.remove(k)
                break
        else:
            return False
    return True


def canonical_genzonoid(K: GeneralizedZonoid, tol: float = MERGE_TOL) -> GeneralizedZonoid:
    """Merge antipodal and coincident atoms; drop atoms with negligible weight."""
    if len(K.weights) == 0:
        return K
    d = _orient(K.directions, tol)
    out_d, out_w = [], []
    for c in _cluster_directions(d, tol):
        w = float(K.weights[c].sum())
        if abs(w) > 1e-15:
            out_d.append(d[c[0]])
            out_w.append(w)
    if not out_d:
        return GeneralizedZonoid(np.zeros((0, K.dim)), np.zeros(0), check=False)
    return GeneralizedZonoid(np.array(out_d), np.array(out_w), check=False)


# -- support sets ---------------------------------------------------------------


def support_set_singleton(K: ConvexBody, i: int) -> bool:
    """Whether the support set ``F(K, e_i)`` is a single point (``i`` is 0-based).

    For zonotopes and generalized zonoids this holds iff no (nonzero)
    generator or representing atom lies in the hyperplane ``{x_i = 0}``.
    """
    if not 0 <= i < K.dim:
        raise IndexError(f"coordinate {i} out of range for dimension {K.dim}")
    z = as_zonotope(K)
    if z is not None:
        g = canonical_zonotope(z).generators
        return bool(np.all(np.abs(g[:, i]) > ZERO_TOL))
    g = as_generalized_zonoid(K)
    if g is not None:
        g = canonical_genzonoid(g)
        return bool(np.all(np.abs(g.directions[:, i]) > ZERO_TOL))
    if isinstance(K, LpBall):
        return not math.isinf(K.q)
    if isinstance(K, Scaled):
        return K.c == 0 or support_set_singleton(K.inner, i)
    if isinstance(K, MinkSum):
        return all(support_set_singleton(p, i) for p in K.parts)
    if isinstance(K, DiagScaled) and isinstance(K.inner, LpBall):
        s = K.scale
        if not np.any(np.abs(s) > ZERO_TOL):
            return True
        if abs(s[i]) <= ZERO_TOL:
            # F(sK, e_i) is all of sK, which is not a point
            return False
        if not math.isinf(K.inner.q):
            return True
        # face of the cube collapses iff every other scale entry vanishes
        others = np.delete(np.abs(s), i)
        return bool(np.all(others <= ZERO_TOL))
    if isinstance(K, DiagScaled) and isinstance(K.inner, (DiagScaled, Scaled)):
        inner = K.inner
        if isinstance(inner, Scaled):
            return support_set_singleton(Scaled(inner.c, DiagScaled(K.scale, inner.inner)), i)
        return support_set_singleton(DiagScaled(K.scale * inner.scale, inner.inner), i)
    if isinstance(K, DiagScaled) and isinstance(K.inner, MinkSum):
        return all(support_set_singleton(DiagScaled(K.scale, p), i) for p in K.inner.parts)
    raise UnsupportedBodyError(f"cannot decide support-set shape for {type(K).__name__}")
