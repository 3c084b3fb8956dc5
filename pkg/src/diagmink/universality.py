"""Decision procedures for zonoid equivalence and diagonal universality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any

import numpy as np

from .bodies import (
    MERGE_TOL,
    ZERO_TOL,
    ConvexBody,
    DiagScaled,
    DimensionError,
    GeneralizedZonoid,
    LpBall,
    MinkSum,
    Scaled,
    UnsupportedBodyError,
    Zonotope,
    _index_set,
    as_generalized_zonoid,
    as_zonotope,
    canonical_genzonoid,
    hadamard,
    project,
    support,
    support_set_singleton,
    zonotopes_equal,
)
from .measures import DiscreteRandomVector, _pairs_antipodally, expected_support, moment_f, zonoid_of
from .transforms import DirectionGrid

SAMPLED_RTOL = 1e-9


class PreconditionError(ValueError):
    """The input violates a hypothesis of the decision procedure, which therefore does not apply."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass
class Verdict:
    """Outcome of a decision procedure.

    ``certified`` is false when the answer rests on finitely many sampled
    directions and could be overturned by a finer grid.
    """

    holds: bool
    mode: str
    certified: bool = True
    witness: np.ndarray | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.holds


@dataclass
class UniversalityReport:
    verdict: bool
    failing_J: list[int] | None = None
    witness_direction: np.ndarray | None = None
    checks: list[tuple[list[int], bool]] = field(default_factory=list)
    singleton_failure: int | None = None
    sufficient_only: bool = False
    note: str = ""

    def __bool__(self):
        return self.verdict

    def to_json(self) -> dict:
        """JSON form; index sets are reported 1-based."""
        return {
            "verdict": self.verdict,
            "failing_J": None if self.failing_J is None else [j + 1 for j in self.failing_J],
            "witness": None if self.witness_direction is None else [float(x) for x in self.witness_direction],
            "checks": [{"J": [j + 1 for j in J], "as": ok} for J, ok in self.checks],
            "singleton_failure": None if self.singleton_failure is None else self.singleton_failure + 1,
            "sufficient_only": self.sufficient_only,
            "note": self.note,
        }


def default_grid(n: int) -> DirectionGrid:
    return DirectionGrid.fibonacci(n, 64 * n * n)


def _witness(f, g, n: int, extra=()) -> tuple[np.ndarray, float]:
    """Direction maximizing ``|f - g|`` over axes, ``extra`` and a grid."""
    cands = [np.eye(n)]
    for e in extra:
        e = np.atleast_2d(np.asarray(e, dtype=float))
        if e.size:
            norms = np.linalg.norm(e, axis=1)
            e = e[norms > 0]
            cands.append(e / norms[norms > 0, None])
    cands.append(default_grid(n).half)
    U = np.vstack(cands)
    U = U[np.linalg.norm(U, axis=1) > 0]
    diff = np.abs(f(U) - g(U))
    k = int(np.argmax(diff))
    return U[k], float(diff[k])


def _sampled_equal(f, g, n: int, grid: DirectionGrid | None, rtol: float):
    grid = grid or default_grid(n)
    a, b = f(grid.points), g(grid.points)
    scale = max(float(np.abs(a).max()), float(np.abs(b).max()), 1e-300)
    dev = np.abs(a - b)
    k = int(np.argmax(dev))
    return bool(dev[k] <= rtol * scale), grid.points[k], float(dev[k]), grid.size


# -- zonoid equivalence -----------------------------------------------------------


def zonoid_equivalent(
    xi: DiscreteRandomVector,
    eta: DiscreteRandomVector,
    mode: str = "exact",
    tol: float = MERGE_TOL,
    grid: DirectionGrid | None = None,
) -> Verdict:
    """Whether ``E|<u, xi>| = E|<u, eta>|`` for every ``u``."""
    if xi.dim != eta.dim:
        raise DimensionError("laws live in different dimensions")
    za, zb = zonoid_of(xi), zonoid_of(eta)
    f = lambda U: support(za, U)  # noqa: E731
    g = lambda U: support(zb, U)  # noqa: E731
    if mode == "exact":
        if zonotopes_equal(za, zb, tol):
            return Verdict(True, "exact", detail={"tol": tol})
        u, dev = _witness(f, g, xi.dim, extra=(za.generators, zb.generators))
        return Verdict(False, "exact", witness=u, detail={"tol": tol, "deviation": dev})
    if mode == "sampled":
        ok, u, dev, size = _sampled_equal(f, g, xi.dim, grid, SAMPLED_RTOL)
        return Verdict(
            ok, "sampled", certified=not ok, witness=None if ok else u,
            detail={"rtol": SAMPLED_RTOL, "deviation": dev, "grid_size": size},
        )
    raise ValueError(f"unknown mode {mode!r}")


# -- asymmetry condition -------------------------------------------------------------


def sign_vectors(m: int, sigma: int | None = None) -> np.ndarray:
    """All ``s`` in ``{-1, 1}^m``, optionally those with ``prod(s) = sigma``."""
    S = np.array(list(product((1.0, -1.0), repeat=m)))
    if sigma is not None:
        S = S[np.prod(S, axis=1) == sigma]
    return S


def _signed_copies_genzonoid(g: GeneralizedZonoid, S: np.ndarray) -> GeneralizedZonoid:
    d = np.vstack([g.directions * s for s in S]) if len(g.weights) else np.zeros((0, g.dim))
    w = np.tile(g.weights, len(S))
    return GeneralizedZonoid(d, w, check=False)


def genzonoids_equal(A: GeneralizedZonoid, B: GeneralizedZonoid, tol: float = MERGE_TOL) -> bool:
    """Equality of support functions via the even parts of the representing measures."""
    if A.dim != B.dim:
        raise DimensionError("bodies live in different dimensions")
    diff = GeneralizedZonoid(
        np.vstack([A.directions, B.directions]).reshape(-1, A.dim),
        np.concatenate([A.weights, -B.weights]),
        check=False,
    )
    scale = max(1.0, float(np.abs(A.weights).sum()), float(np.abs(B.weights).sum()))
    merged = canonical_genzonoid(diff, tol)
    return bool(np.all(np.abs(merged.weights) <= tol * scale))


def as_condition(L: ConvexBody, J, mode: str = "auto", grid: DirectionGrid | None = None) -> Verdict:
    """Asymmetry condition for the projection ``L_J`` (``J`` 0-based).

    Holds iff the Minkowski sum of the sign-reflected copies ``s L_J`` with
    ``prod(s) = 1`` differs from the sum over ``prod(s) = -1``.
    """
    J = _index_set(J, L.dim)
    m = len(J)
    if m % 2:
        return Verdict(False, "exact", detail={"reason": "odd cardinality"})
    LJ = project(L, J)
    plus, minus = sign_vectors(m, 1), sign_vectors(m, -1)
    if mode in ("auto", "exact"):
        z = as_zonotope(LJ)
        if z is not None:
            zp = Zonotope(np.vstack([z.generators * s for s in plus]).reshape(-1, m), dim=m)
            zm = Zonotope(np.vstack([z.generators * s for s in minus]).reshape(-1, m), dim=m)
            if zonotopes_equal(zp, zm):
                return Verdict(False, "exact")
            u, dev = _witness(lambda U: support(zp, U), lambda U: support(zm, U), m, extra=(z.generators,))
            return Verdict(True, "exact", witness=u, detail={"deviation": dev})
        g = as_generalized_zonoid(LJ)
        if g is not None:
            gp, gm = _signed_copies_genzonoid(g, plus), _signed_copies_genzonoid(g, minus)
            if genzonoids_equal(gp, gm):
                return Verdict(False, "exact")
            u, dev = _witness(lambda U: support(gp, U), lambda U: support(gm, U), m, extra=(g.directions,))
            return Verdict(True, "exact", witness=u, detail={"deviation": dev})
        if mode == "exact":
            raise UnsupportedBodyError("exact mode needs a zonotope or generalized zonoid")
    elif mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")

    def side(S):
        return lambda U: sum(support(LJ, U * s) for s in S)

    equal, u, dev, size = _sampled_equal(side(plus), side(minus), m, grid, SAMPLED_RTOL)
    return Verdict(
        not equal, "sampled", certified=not equal, witness=None if equal else u,
        detail={"rtol": SAMPLED_RTOL, "deviation": dev, "grid_size": size,
                **({"reason": "no witness found"} if equal else {})},
    )


# -- unconditionality -----------------------------------------------------------------


def _structurally_unconditional(K: ConvexBody) -> bool:
    if isinstance(K, LpBall):
        return True
    if isinstance(K, (DiagScaled, Scaled)):
        return _structurally_unconditional(K.inner)
    if isinstance(K, MinkSum):
        return all(_structurally_unconditional(p) for p in K.parts)
    return False


def is_unconditional(K: ConvexBody, mode: str = "auto", grid: DirectionGrid | None = None) -> Verdict:
    """Symmetry of ``K`` in every coordinate hyperplane.

    Reflections in single hyperplanes generate all sign changes, so ``n``
    comparisons suffice. On failure the witness is the offending sign vector.
    """
    n = K.dim
    # s and -s act identically on a symmetric body; report witnesses with s_1 = +1
    flips = [np.where(np.arange(n) == i, -1.0, 1.0) for i in range(n)]
    flips = [s if s[0] > 0 else -s for s in flips]
    if mode in ("auto", "exact"):
        if _structurally_unconditional(K):
            return Verdict(True, "exact")
        z = as_zonotope(K)
        if z is not None:
            for s in flips:
                if not zonotopes_equal(z, Zonotope(z.generators * s, dim=n)):
                    return Verdict(False, "exact", witness=s)
            return Verdict(True, "exact")
        g = as_generalized_zonoid(K)
        if g is not None:
            for s in flips:
                if not genzonoids_equal(g, GeneralizedZonoid(g.directions * s, g.weights, check=False)):
                    return Verdict(False, "exact", witness=s)
            return Verdict(True, "exact")
        if mode == "exact":
            raise UnsupportedBodyError("exact mode needs a zonotope or generalized zonoid")
    elif mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    for s in flips:
        ok, _, dev, size = _sampled_equal(lambda U: support(K, U), lambda U: support(K, U * s), n, grid, SAMPLED_RTOL)
        if not ok:
            return Verdict(False, "sampled", witness=s, detail={"deviation": dev, "grid_size": size})
    return Verdict(True, "sampled", certified=False, detail={"reason": "no witness found"})


# -- universality -------------------------------------------------------------------


def _require_genzonoid(K: ConvexBody) -> GeneralizedZonoid:
    g = as_generalized_zonoid(K)
    if g is None:
        raise UnsupportedBodyError(f"{type(K).__name__} is not given as a generalized zonoid")
    return canonical_genzonoid(g)


def _singleton_failures(g: GeneralizedZonoid) -> list[int]:
    bad = []
    for i in range(g.dim):
        e = np.zeros(g.dim)
        e[i] = 1.0
        if not support_set_singleton(g, i) or support(g, e) <= ZERO_TOL:
            bad.append(i)
    return bad


def unconditionally_d_universal(K: ConvexBody) -> UniversalityReport:
    """Sufficient condition for unconditional D-universality of a generalized zonoid.

    The condition is that every support set ``F(K, e_i)`` is a point, i.e.
    no representing mass sits on a coordinate hyperplane. A failed check does
    not show that ``K`` is not unconditionally D-universal.
    """
    g = _require_genzonoid(K)
    bad = _singleton_failures(g)
    if bad:
        return UniversalityReport(False, singleton_failure=bad[0], sufficient_only=True,
                                  note="sufficient condition fails")
    return UniversalityReport(True, sufficient_only=True, note="sufficient condition holds")


def even_subsets(n: int):
    for k in range(2, n + 1, 2):
        yield from (list(J) for J in combinations(range(n), k))


def d_universal(K: ConvexBody) -> UniversalityReport:
    """D-universality of a generalized zonoid with point support sets on the axes.

    Decided by the asymmetry condition on every projection ``K_J`` with
    ``|J|`` even. In the plane a body whose support set on some axis is not a
    point is split into its axis-parallel part and the rest, and the rest
    decides the answer.
    """
    g = _require_genzonoid(K)
    bad = _singleton_failures(g)
    if bad:
        if g.dim != 2:
            raise PreconditionError(
                f"support set F(K, e_{bad[0] + 1}) is not a single point", index=bad[0]
            )
        off_axis = np.all(np.abs(g.directions) > ZERO_TOL, axis=1)
        if not off_axis.any():
            return UniversalityReport(
                False, singleton_failure=bad[0],
                note="diagonal transform of the square; unconditional",
            )
        rest = GeneralizedZonoid(g.directions[off_axis], g.weights[off_axis], check=False)
        report = d_universal(rest)
        report.note = "decided on the summand without axis-parallel mass"
        return report
    checks: list[tuple[list[int], bool]] = []
    for J in even_subsets(g.dim):
        v = as_condition(g, J)
        checks.append((J, v.holds))
        if not v.holds:
            return UniversalityReport(False, failing_J=J, checks=checks)
    return UniversalityReport(True, checks=checks)


# -- moment oracle ---------------------------------------------------------------------


def simplex_lattice(m: int, depth: int, lower: float = 0.05) -> np.ndarray:
    """Barycentric lattice points of depth ``depth`` with all coordinates ``>= lower``."""
    pts = []
    for c in combinations(range(depth + m - 1), m - 1):
        parts = np.diff(np.concatenate([[-1], c, [depth + m - 1]])) - 1
        a = parts / depth
        if np.all(a >= lower):
            pts.append(a)
    return np.array(pts).reshape(-1, m)


def _is_symmetric(xi: DiscreteRandomVector) -> bool:
    return xi.symmetric or _pairs_antipodally(xi.points, xi.probs, MERGE_TOL)


def moment_equivalence_oracle(
    xi: DiscreteRandomVector,
    eta: DiscreteRandomVector,
    grid_per_simplex: int = 4,
    tol: float = 1e-9,
) -> Verdict:
    """Zonoid equivalence of symmetric laws through signed power moments.

    Compares ``E(f_{alpha,J}(x) 1{x in A_E})`` for all ``J`` inside nonempty
    ``E`` and ``alpha`` on an interior lattice of the simplex over ``E``.
    """
    if xi.dim != eta.dim:
        raise DimensionError("laws live in different dimensions")
    if not (_is_symmetric(xi) and _is_symmetric(eta)):
        raise ValueError("the moment oracle needs symmetric laws")
    n = xi.dim
    checked = 0
    for k in range(1, n + 1):
        for E in combinations(range(n), k):
            lattice = simplex_lattice(k, max(grid_per_simplex, k))
            for a in lattice:
                alpha = np.zeros(n)
                alpha[list(E)] = a
                for r in range(k + 1):
                    for J in combinations(E, r):
                        x, y = moment_f(xi, alpha, J, E), moment_f(eta, alpha, J, E)
                        checked += 1
                        if abs(x - y) > tol * max(1.0, abs(x), abs(y)):
                            return Verdict(False, "exact", detail={
                                "E": [e + 1 for e in E], "J": [j + 1 for j in J],
                                "alpha": alpha.tolist(), "values": [x, y], "tol": tol,
                                "checked": checked,
                            })
    return Verdict(True, "exact", detail={"tol": tol, "checked": checked})


# -- segment summands ---------------------------------------------------------------------


def segment_summand_identity(K0: ConvexBody, w, xi: DiscreteRandomVector, u) -> tuple[float, float]:
    """Both sides of ``E h(u(K0 + w B_inf), xi) = E h(uK0, xi) + sum_i w_i |u_i| E|xi_i|``."""
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(w < 0):
        raise ValueError("w must be nonnegative")
    if w.shape != (K0.dim,) or xi.dim != K0.dim:
        raise DimensionError("body, w and law must share one dimension")
    K = MinkSum((K0, hadamard(w, LpBall(math.inf, K0.dim))))
    lhs = expected_support(xi, K, u)
    abs_means = xi.probs @ np.abs(xi.points)
    rhs = expected_support(xi, K0, u) + float(np.sum(w * np.abs(u) * abs_means))
    return lhs, rhs
