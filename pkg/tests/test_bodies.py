import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import generator_sets, seeds, unit_vectors, vectors
from diagmink.bodies import (
    DiagScaled,
    DimensionError,
    GeneralizedZonoid,
    LpBall,
    MinkSum,
    Polygon2D,
    Scaled,
    UnsupportedBodyError,
    Zonotope,
    as_zonotope,
    canonical_zonotope,
    diag_body,
    dual_exponent,
    hadamard,
    project,
    support,
    support_set_singleton,
    unit_segment,
    zonotopes_equal,
)
from oracles import face_is_point, lp_maximizer, zonotope_support_bruteforce, zonotope_vertices

SQUARE = Polygon2D([[1, 1], [-1, 1], [-1, -1], [1, -1]])


def random_body(rng, n):
    """One body of every variant in dimension ``n`` (polygons only for n = 2)."""
    G = rng.standard_normal((3, n))
    V = rng.standard_normal((3, n))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    bodies = [
        Zonotope(G),
        GeneralizedZonoid(V, rng.uniform(0.1, 2.0, 3)),
        LpBall(float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf])), n),
        DiagScaled(rng.standard_normal(n), LpBall(2.0, n)),
        MinkSum([Zonotope(G), LpBall(math.inf, n)]),
        Scaled(rng.uniform(0, 3), unit_segment(n)),
    ]
    if n == 2:
        bodies.append(Polygon2D.regular(6, 1.5, 0.3))
    return bodies


# -- support ------------------------------------------------------------------------------


class TestSupport:
    def test_euclidean_ball(self):
        assert support(LpBall(2, 2), [3, 4]) == pytest.approx(5.0, abs=1e-15)

    def test_segment_orthogonal_direction(self):
        assert support(unit_segment(2), [1, -1]) == 0.0

    def test_diag_scaled_segment_is_abs_inner_product(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            u, v = rng.standard_normal(3), rng.standard_normal(3)
            assert support(DiagScaled(v, unit_segment(3)), u) == pytest.approx(abs(u @ v), rel=1e-14, abs=1e-15)

    def test_scaled_box(self):
        assert support(DiagScaled([2, 3], LpBall(math.inf, 2)), [1, 1]) == pytest.approx(5.0)

    def test_square_polygon(self):
        assert support(SQUARE, [1, 0]) == 1.0

    def test_conjugate_exponent_is_exact_at_the_ends(self):
        assert dual_exponent(1.0) == math.inf
        assert dual_exponent(math.inf) == 1.0
        assert dual_exponent(2.0) == 2.0
        assert LpBall(1, 3).p == math.inf

    @pytest.mark.parametrize("p", [1.25, 1.5, 2.0, 3.0, 7.0])
    def test_lp_ball_matches_explicit_maximizer(self, p):
        rng = np.random.default_rng(2)
        q = p / (p - 1)
        for _ in range(20):
            u = rng.standard_normal(4)
            value, xnorm = lp_maximizer(u, p)
            assert xnorm == pytest.approx(1.0, rel=1e-12)
            assert support(LpBall(q, 4), u) == pytest.approx(value, rel=1e-12)

    def test_zonotope_matches_vertex_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            G = rng.standard_normal((5, 3))
            u = rng.standard_normal(3)
            assert support(Zonotope(G), u) == pytest.approx(zonotope_support_bruteforce(G, u), rel=1e-12)

    def test_vectorized_rows(self):
        K = LpBall(3, 2)
        U = np.array([[1.0, 2.0], [-3.0, 0.5]])
        out = support(K, U)
        assert out.shape == (2,)
        assert out[1] == support(K, U[1])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            support(LpBall(2, 3), [1, 2])

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            LpBall(0.5, 2)

    def test_large_p_norm_does_not_overflow(self):
        assert support(LpBall(1.0001, 2), [1e200, 1e200]) == pytest.approx(1e200 * 2 ** (1 / 10001), rel=1e-9)


# -- bodies ---------------------------------------------------------------------------------


class TestConstruction:
    def test_genzonoid_requires_unit_directions(self):
        with pytest.raises(ValueError):
            GeneralizedZonoid([[1.0, 1.0]], [1.0])

    def test_signed_genzonoid_warns_when_not_subadditive(self):
        with pytest.warns(RuntimeWarning):
            GeneralizedZonoid([[1.0, 0.0]], [-1.0])

    def test_signed_genzonoid_that_is_convex_does_not_warn(self):
        # |u1| + |u2| - 0.1 |u1| is still a norm
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            GeneralizedZonoid([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [1.0, 1.0, -0.1])

    def test_polygon_rejects_clockwise(self):
        with pytest.raises(ValueError):
            Polygon2D([[1, 1], [1, -1], [-1, -1], [-1, 1]])

    def test_polygon_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            Polygon2D([[2, 0], [0, 1], [-1, 0], [0, -1]])

    def test_polygon_rejects_odd_count(self):
        with pytest.raises(ValueError):
            Polygon2D([[1, 0], [0, 1], [-1, 0]])

    def test_polygon_area(self):
        assert SQUARE.area() == 4.0

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(DimensionError):
            MinkSum([LpBall(2, 2), LpBall(2, 3)])

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            Scaled(-1.0, LpBall(2, 2))


# -- hadamard / diag_body --------------------------------------------------------------------


class TestHadamard:
    def test_identity_scaling(self):
        rng = np.random.default_rng(4)
        U = rng.standard_normal((40, 3))
        for K in random_body(rng, 3):
            np.testing.assert_allclose(support(hadamard(np.ones(3), K), U), support(K, U), rtol=1e-14)

    def test_segment_image(self):
        v, u = np.array([0.3, -2.0]), np.array([1.5, 0.7])
        assert support(hadamard(v, unit_segment(2)), u) == pytest.approx(abs(u @ v))

    def test_coordinate_kill_on_zonotope(self):
        Z = hadamard([0, 1], Zonotope([[1, 1]]))
        assert isinstance(Z, Zonotope)
        np.testing.assert_array_equal(Z.generators, [[0.0, 1.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard([1, 2, 3], LpBall(2, 2))

    def test_diag_body_of_segment_is_as4dim_zonotope(self):
        coef = {(1, 1, 1, 1): 1, (-1, -1, 1, 1): 2, (-1, 1, -1, 1): 20, (-1, 1, 1, -1): 24,
                (-1, 1, 1, 1): 18, (1, -1, 1, 1): 17, (1, 1, -1, 1): 4, (1, 1, 1, -1): 8}
        K = diag_body([(a, np.array(s, float)) for s, a in coef.items()], unit_segment(4))
        Z = Zonotope([a * np.array(s, float) for s, a in coef.items()])
        assert zonotopes_equal(as_zonotope(K), Z)

    def test_diag_body_two_terms_with_ball(self):
        rng = np.random.default_rng(5)
        v1, v2 = rng.standard_normal(3), rng.standard_normal(3)
        K = diag_body([(0.5, v1), (2.0, v2)], LpBall(2, 3))
        for u in rng.standard_normal((20, 3)):
            expect = 0.5 * np.linalg.norm(v1 * u) + 2.0 * np.linalg.norm(v2 * u)
            assert support(K, u) == pytest.approx(expect, rel=1e-14)

    def test_diag_body_single_term(self):
        K = diag_body([(1.0, np.ones(2))], LpBall(3, 2))
        assert support(K, [0.4, -1.2]) == pytest.approx(support(LpBall(3, 2), [0.4, -1.2]))

    def test_diag_body_rejects_negative(self):
        with pytest.raises(ValueError):
            diag_body([(-1.0, np.ones(2))], LpBall(2, 2))


# -- projection -----------------------------------------------------------------------------


class TestProject:
    def test_ball(self):
        P = project(LpBall(2, 3), [0, 1])
        assert isinstance(P, LpBall) and P.dim == 2 and P.q == 2

    def test_zonotope(self):
        P = project(Zonotope([[1, 2, 3]]), [1, 2])
        np.testing.assert_array_equal(P.generators, [[2.0, 3.0]])

    def test_polygon_to_segment(self):
        P = project(SQUARE, [0])
        assert support(P, [1.0]) == 1.0

    def test_empty_index_set(self):
        with pytest.raises(ValueError):
            project(LpBall(2, 3), [])

    def test_embedding_contract_random(self):
        rng = np.random.default_rng(6)
        count = 0
        while count < 100:
            n = int(rng.integers(2, 5))
            for K in random_body(rng, n):
                k = int(rng.integers(1, n + 1))
                J = sorted(rng.choice(n, size=k, replace=False).tolist())
                u = rng.standard_normal(k)
                padded = np.zeros(n)
                padded[J] = u
                assert support(project(K, J), u) == pytest.approx(support(K, padded), rel=1e-12, abs=1e-12)
                count += 1


# -- support sets -----------------------------------------------------------------------------


class TestSupportSetSingleton:
    def test_cube(self):
        assert not support_set_singleton(LpBall(math.inf, 2), 0)

    def test_other_balls(self):
        assert support_set_singleton(LpBall(2, 3), 1)
        assert support_set_singleton(LpBall(1, 3), 1)

    def test_zonotope_all_coordinates_nonzero(self):
        assert support_set_singleton(Zonotope([[1, 1], [1, -2]]), 1)

    def test_flat_zonotope(self):
        Z = Zonotope([[1, 0]])
        assert not support_set_singleton(Z, 1)
        assert not face_is_point(zonotope_vertices(Z.generators), np.array([0.0, 1.0]))

    def test_agrees_with_vertex_enumeration(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            G = rng.integers(-2, 3, size=(int(rng.integers(1, 5)), 3)).astype(float)
            if not np.any(G):
                continue
            i = int(rng.integers(3))
            e = np.eye(3)[i]
            assert support_set_singleton(Zonotope(G), i) == face_is_point(zonotope_vertices(G), e)

    def test_unsupported_variant(self):
        with pytest.raises(UnsupportedBodyError):
            support_set_singleton(_opaque_body(), 0)


def _opaque_body():
    from diagmink.bodies import ConvexBody

    class Opaque(ConvexBody):
        dim = 2

    return Opaque()


# -- canonical forms ---------------------------------------------------------------------------


class TestCanonicalZonotope:
    def test_parallel_merge_with_flip(self):
        C = canonical_zonotope(Zonotope([[1, 1], [-2, -2]]))
        np.testing.assert_allclose(C.generators, [[3.0, 3.0]])

    def test_zero_drop(self):
        C = canonical_zonotope(Zonotope([[0, 0], [1, 0]]))
        np.testing.assert_array_equal(C.generators, [[1.0, 0.0]])

    def test_shuffle_split_flip(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            G = rng.standard_normal((4, 3))
            parts = []
            for g in G:
                t = rng.uniform(0.1, 0.9)
                parts += [t * g, -(1 - t) * g]
            H = np.array(parts)[rng.permutation(len(parts))]
            A, B = canonical_zonotope(Zonotope(G)), canonical_zonotope(Zonotope(H))
            np.testing.assert_allclose(A.generators, B.generators, atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        C = canonical_zonotope(Zonotope(rng.standard_normal((6, 3))))
        np.testing.assert_array_equal(canonical_zonotope(C).generators, C.generators)

    def test_different_bodies_differ(self):
        assert not zonotopes_equal(Zonotope([[1, 0], [0, 1]]), Zonotope([[1, 1]]))

    def test_polygon_reduces_to_zonotope(self):
        assert zonotopes_equal(as_zonotope(SQUARE), Zonotope([[1, 0], [0, 1]]))


# -- properties ----------------------------------------------------------------------------------


@given(generator_sets(), st.floats(0, 10), seeds)
def test_positive_homogeneity(G, c, seed):
    rng = np.random.default_rng(seed)
    n = G.shape[1]
    u = rng.standard_normal(n)
    for K in random_body(rng, n) + [Zonotope(G)]:
        assert support(K, c * u) == pytest.approx(c * support(K, u), rel=1e-12, abs=1e-12)


@given(generator_sets(), seeds)
def test_even(G, seed):
    rng = np.random.default_rng(seed)
    n = G.shape[1]
    u = rng.standard_normal(n)
    for K in random_body(rng, n) + [Zonotope(G)]:
        assert support(K, -u) == pytest.approx(support(K, u), rel=1e-12, abs=1e-12)


@given(st.integers(1, 4), seeds)
def test_hadamard_self_adjoint(n, seed):
    rng = np.random.default_rng(seed)
    u, x = rng.standard_normal(n), rng.standard_normal(n)
    for K in random_body(rng, n):
        a = support(hadamard(u, K), x)
        b = support(hadamard(x, K), u)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(generator_sets(n=3), generator_sets(n=3), vectors(3))
def test_minkowski_additivity(G, H, u):
    A, B = Zonotope(G), LpBall(1.5, 3)
    assert support(MinkSum([A, B, Zonotope(H)]), u) == support(A, u) + support(B, u) + support(Zonotope(H), u)


@given(generator_sets(), seeds)
def test_canonical_equality_invariances(G, seed):
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(len(G), 1))
    H = np.vstack([0.3 * G, 0.7 * G * signs])[rng.permutation(2 * len(G))]
    assert zonotopes_equal(Zonotope(G), Zonotope(H))


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), unit_vectors(n))))
def test_genzonoid_from_vectors_matches_zonotope(arg):
    n, v = arg
    x = np.vstack([2.0 * v, np.eye(n)[0]])
    u = np.linspace(-1, 1, n)
    assert support(GeneralizedZonoid.from_vectors(x), u) == pytest.approx(support(Zonotope(x), u), rel=1e-12, abs=1e-14)
