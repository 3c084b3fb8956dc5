import json
import math
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from constructions import (
    random_planar_zonotope_generators,
    random_symmetric_law,
    split_twin,
    symmetric_split_twin,
)
from diagmink.bodies import (
    DiagScaled,
    GeneralizedZonoid,
    LpBall,
    MinkSum,
    Scaled,
    UnsupportedBodyError,
    Zonotope,
    support,
    unit_segment,
)
from diagmink.measures import DiscreteRandomVector, expected_support
from diagmink.universality import (
    PreconditionError,
    as_condition,
    d_universal,
    is_unconditional,
    moment_equivalence_oracle,
    segment_summand_identity,
    simplex_lattice,
    unconditionally_d_universal,
    zonoid_equivalent,
)

AS4DIM = {
    (1, 1, 1, 1): 1, (-1, -1, 1, 1): 2, (-1, 1, -1, 1): 20, (-1, 1, 1, -1): 24,
    (-1, 1, 1, 1): 18, (1, -1, 1, 1): 17, (1, 1, -1, 1): 4, (1, 1, 1, -1): 8,
}


def as4dim():
    return Zonotope([a * np.array(s, dtype=float) for s, a in AS4DIM.items()])


# -- zonoid equivalence ---------------------------------------------------------------------------


class TestZonoidEquivalent:
    def test_generator_split(self):
        xi = DiscreteRandomVector.dirac([1.0, 1.0])
        eta = DiscreteRandomVector([[2.0, 2.0], [0.0, 0.0]], [0.5, 0.5])
        assert zonoid_equivalent(xi, eta).holds

    def test_cross_vs_axes(self):
        r = math.sqrt(2.0)
        xi = DiscreteRandomVector.uniform([[1, 1], [-1, -1], [1, -1], [-1, 1]])
        eta = DiscreteRandomVector.uniform([[r, 0], [-r, 0], [0, r], [0, -r]])
        v = zonoid_equivalent(xi, eta)
        assert not v.holds
        u = v.witness
        a, b = expected_support(xi, unit_segment(2), u), expected_support(eta, unit_segment(2), u)
        assert abs(a - b) > 0.1
        # at u = (1, 0) the two sides are 1 and sqrt(2)/2
        e1 = np.array([1.0, 0.0])
        assert expected_support(xi, unit_segment(2), e1) == pytest.approx(1.0)
        assert expected_support(eta, unit_segment(2), e1) == pytest.approx(r / 2)

    def test_reflexive(self):
        rng = np.random.default_rng(0)
        xi = random_symmetric_law(rng, 3)
        assert zonoid_equivalent(xi, xi).holds

    def test_sampled_mode_is_uncertified_when_equal(self):
        xi = DiscreteRandomVector.dirac([1.0, 1.0])
        eta = DiscreteRandomVector([[2.0, 2.0], [0.0, 0.0]], [0.5, 0.5])
        v = zonoid_equivalent(xi, eta, mode="sampled")
        assert v.holds and not v.certified

    def test_sampled_mode_finds_witness(self):
        xi = DiscreteRandomVector.dirac([1.0, 1.0])
        eta = DiscreteRandomVector.dirac([1.0, 1.1])
        v = zonoid_equivalent(xi, eta, mode="sampled")
        assert not v.holds and v.certified and v.witness is not None

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            zonoid_equivalent(DiscreteRandomVector.dirac([1.0]), DiscreteRandomVector.dirac([1.0, 1.0]))


@given(seeds)
def test_equivalence_relation(seed):
    rng = np.random.default_rng(seed)
    xi = random_symmetric_law(rng, 3)
    eta = split_twin(rng, xi)
    zeta = split_twin(rng, eta)
    other = random_symmetric_law(rng, 3)
    assert zonoid_equivalent(xi, eta).holds and zonoid_equivalent(eta, xi).holds
    assert zonoid_equivalent(eta, zeta).holds and zonoid_equivalent(xi, zeta).holds
    assert zonoid_equivalent(xi, other).holds == zonoid_equivalent(other, xi).holds


@given(seeds)
def test_diagonal_invariance(seed):
    rng = np.random.default_rng(seed)
    xi = random_symmetric_law(rng, 3)
    eta = split_twin(rng, xi)
    u = rng.standard_normal(3)
    assert zonoid_equivalent(xi.scaled(u), eta.scaled(u)).holds


# -- asymmetry condition ------------------------------------------------------------------------------


class TestAsCondition:
    def test_planar_non_unconditional_zonotope(self):
        assert as_condition(Zonotope([[1, 0], [1, 1]]), [0, 1]).holds

    @pytest.mark.parametrize("J", [[0, 1], [0, 2], [0, 1, 2, 3], [1]])
    def test_euclidean_ball(self, J):
        v = as_condition(LpBall(2, 4), J)
        assert not v.holds

    def test_as4dim(self):
        K = as4dim()
        for J in combinations(range(4), 2):
            v = as_condition(K, J)
            assert v.holds and v.mode == "exact"
        v = as_condition(K, [0, 1, 2, 3])
        assert not v.holds and v.mode == "exact"

    def test_as4dim_sign_class_totals(self):
        # each sign class of the full index set carries total coefficient 47
        plus = sum(a for s, a in AS4DIM.items() if np.prod(s) == 1)
        minus = sum(a for s, a in AS4DIM.items() if np.prod(s) == -1)
        assert plus == minus == 47

    def test_odd_cardinality_never_holds(self):
        for J in ([0], [0, 1, 2]):
            assert not as_condition(as4dim(), J).holds

    def test_empty_J(self):
        with pytest.raises(ValueError):
            as_condition(as4dim(), [])

    def test_generalized_zonoid_route(self):
        K = GeneralizedZonoid([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]], [1.0, 0.5, 0.2])
        assert as_condition(K, [0, 1]).holds

    def test_sampled_mode_cannot_certify_equality(self):
        v = as_condition(LpBall(3, 2), [0, 1], mode="sampled")
        assert not v.holds and not v.certified
        assert v.detail["reason"] == "no witness found"

    def test_sampled_agrees_with_exact_when_it_holds(self):
        v = as_condition(Zonotope([[1, 0], [1, 1]]), [0, 1], mode="sampled")
        assert v.holds and v.certified


@given(seeds, st.floats(0.1, 10.0))
def test_as_invariant_under_scaling_and_permutation(seed, c):
    rng = np.random.default_rng(seed)
    G = rng.integers(-3, 4, size=(4, 4)).astype(float)
    K = Zonotope(G)
    J = [0, 1, 2, 3]
    base = as_condition(K, J).holds
    assert as_condition(Zonotope(c * G), J).holds == base
    for perm in list(permutations(range(4)))[:6]:
        assert as_condition(Zonotope(G[:, perm]), J).holds == base


# -- unconditionality -------------------------------------------------------------------------------------


class TestIsUnconditional:
    @pytest.mark.parametrize("q", [1.0, 1.5, 2.0, math.inf])
    def test_balls(self, q):
        assert is_unconditional(LpBall(q, 3)).holds

    def test_segment(self):
        v = is_unconditional(Zonotope([[1, 1]]))
        assert not v.holds
        np.testing.assert_array_equal(v.witness, [1.0, -1.0])

    def test_diagonal_transforms_preserve(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            s = rng.standard_normal(3)
            assert is_unconditional(DiagScaled(s, LpBall(1.5, 3))).holds
            assert is_unconditional(Zonotope(np.diag(s))).holds
            G = rng.standard_normal((2, 3))
            Z = Zonotope(np.vstack([G * e for e in ([1, 1, 1], [-1, 1, 1], [1, -1, 1], [1, 1, -1])]))
            assert is_unconditional(Z).holds

    def test_sampled_mode_on_non_zonoid(self):
        K = MinkSum([LpBall(3, 2), Zonotope([[1, 2]])])
        assert not is_unconditional(K).holds


# -- universality reports -------------------------------------------------------------------------------


class TestUnconditionallyDUniversal:
    def test_cube_fails(self):
        rep = unconditionally_d_universal(LpBall(math.inf, 3))
        assert not rep.verdict and rep.sufficient_only
        assert rep.note == "sufficient condition fails"

    def test_segment_holds(self):
        rep = unconditionally_d_universal(unit_segment(3))
        assert rep.verdict and rep.note == "sufficient condition holds"

    def test_zonotope_holds(self):
        assert unconditionally_d_universal(Zonotope([[1, 1], [2, -1]])).verdict

    def test_non_genzonoid_rejected(self):
        with pytest.raises(UnsupportedBodyError):
            unconditionally_d_universal(LpBall(3, 2))


class TestDUniversal:
    def test_as4dim(self):
        rep = d_universal(as4dim())
        assert not rep.verdict
        assert rep.failing_J == [0, 1, 2, 3]
        assert rep.to_json()["failing_J"] == [1, 2, 3, 4]
        assert all(ok for J, ok in rep.checks if len(J) == 2)

    def test_planar_zonotope_with_axis_generator(self):
        assert d_universal(Zonotope([[1, 0], [1, 1]])).verdict

    def test_unconditional_zonotope(self):
        rep = d_universal(Zonotope([[1, 1], [1, -1]]))
        assert not rep.verdict and rep.failing_J == [0, 1]

    def test_box_in_the_plane(self):
        rep = d_universal(LpBall(math.inf, 2))
        assert not rep.verdict and rep.singleton_failure is not None

    def test_precondition_in_three_dimensions(self):
        with pytest.raises(PreconditionError) as exc:
            d_universal(Zonotope([[1, 1, 0], [1, -1, 1]]))
        assert exc.value.index == 2

    def test_report_json(self):
        rep = d_universal(Zonotope([[1, 2], [1, -1], [0.5, 3]]))
        doc = json.loads(json.dumps(rep.to_json()))
        assert set(doc) >= {"verdict", "failing_J", "witness", "checks"}

    def test_three_dimensional_segment(self):
        # every two-coordinate projection is a segment along (1, 1), which is not unconditional
        rep = d_universal(unit_segment(3))
        assert rep.verdict
        assert [J for J, _ in rep.checks] == [[0, 1], [0, 2], [1, 2]]


def test_planar_dichotomy_random_zonotopes():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        K = Zonotope(random_planar_zonotope_generators(rng))
        assert d_universal(K).verdict == (not is_unconditional(K).holds)


# -- moment oracle -----------------------------------------------------------------------------------------


class TestMomentOracle:
    def test_lattice_is_interior(self):
        pts = simplex_lattice(3, 4)
        assert len(pts) == 3
        assert np.all(pts >= 0.05)
        np.testing.assert_allclose(pts.sum(axis=1), 1.0)

    def test_split_pair(self):
        rng = np.random.default_rng(3)
        half = DiscreteRandomVector([[1.0, 2.0], [0.0, 1.0]], [0.5, 0.5])
        xi = half.symmetrized()
        assert moment_equivalence_oracle(xi, symmetric_split_twin(rng, half)).holds

    def test_cross_vs_axes(self):
        r = math.sqrt(2.0)
        xi = DiscreteRandomVector.uniform([[1, 1], [-1, -1], [1, -1], [-1, 1]], symmetric=True)
        eta = DiscreteRandomVector.uniform([[r, 0], [-r, 0], [0, r], [0, -r]], symmetric=True)
        v = moment_equivalence_oracle(xi, eta)
        assert not v.holds

    def test_requires_symmetric_laws(self):
        with pytest.raises(ValueError):
            moment_equivalence_oracle(DiscreteRandomVector.dirac([1.0, 1.0]), DiscreteRandomVector.dirac([1.0, 1.0]))

    def test_agrees_with_exact_equivalence(self):
        rng = np.random.default_rng(4)
        for i in range(50):
            half = DiscreteRandomVector(
                rng.integers(-2, 3, size=(2, 3)).astype(float) + np.array([[0.5, 0, 0], [0, 0, 0.5]]),
                [0.5, 0.5],
            )
            xi = half.symmetrized()
            if i % 2 == 0:
                eta = symmetric_split_twin(rng, half)
            else:
                eta = random_symmetric_law(rng, 3)
            assert moment_equivalence_oracle(xi, eta).holds == zonoid_equivalent(xi, eta).holds


# -- segment summand identity --------------------------------------------------------------------------------


class TestSegmentSummand:
    def test_zero_weight(self):
        xi = DiscreteRandomVector([[1.0, -2.0], [0.5, 1.0]], [0.3, 0.7])
        K0 = LpBall(3, 2)
        u = np.array([0.4, 1.5])
        lhs, rhs = segment_summand_identity(K0, [0.0, 0.0], xi, u)
        assert lhs == pytest.approx(expected_support(xi, K0, u)) and rhs == pytest.approx(lhs)

    def test_hand_evaluation(self):
        lhs, rhs = segment_summand_identity(unit_segment(2), [1.0, 0.0], DiscreteRandomVector.dirac([1.0, 1.0]), [1.0, 0.0])
        assert lhs == 2.0 and rhs == 2.0

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            segment_summand_identity(unit_segment(2), [-1.0, 0.0], DiscreteRandomVector.dirac([1.0, 1.0]), [1.0, 0.0])

    def test_random_instances(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            K0 = Scaled(rng.uniform(0, 2), Zonotope(rng.standard_normal((3, n))))
            xi = DiscreteRandomVector(rng.standard_normal((3, n)), [0.2, 0.3, 0.5])
            lhs, rhs = segment_summand_identity(K0, rng.uniform(0, 2, n), xi, rng.standard_normal(n))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
