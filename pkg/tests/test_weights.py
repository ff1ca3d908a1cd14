import itertools

import numpy as np
import pytest
import sympy

from holobf.common import DomainError, ResourceError
from holobf.exterior import FormExpression, GaussianTag, dt, t, z, zbar
from holobf.graphs import VERTEX_LIBRARY, ChiralGraph, ChiralVertex, Edge, wheel
from holobf.weights import (
    FORMS, LegFactor, TestInput, anomaly_bound, anomaly_bound_limit,
    anomaly_weight, anomaly_weight_sum, bulk_weight, epsilon_sweep,
    holomorphic_reduction_check, prepare_weight, t_box_bound, weight_bound, zeta_bound_check,
)

FIXED = dict(min_level=3, max_level=3, strict=False)

# Inputs completing the top form of the 3-wheel: one dt and two dzbar
PHI3 = TestInput((
    LegFactor.of(f="t", form="dt"),
    LegFactor.of(a="z", form="dzbar"),
    LegFactor.of(a="z", form="dzbar"),
))
# The anomaly needs one generator less
PHI3_ANOMALY = TestInput((
    LegFactor.of(f="t", form="dt"),
    LegFactor.of(a="z", form="dzbar"),
    LegFactor.of(a="z"),
))
PHI4 = TestInput((
    LegFactor.of(f="t", form="dt"),
    LegFactor.of(a="z", form="dzbar"),
    LegFactor.of(a="z", form="dzbar"),
    LegFactor.of(a="z", form="dzbar"),
))

# Derivative orders 0..2 on alpha- and beta-legs
VERTICES = [
    "cubic", "dcubic", "quad",
    ChiralVertex(2, 1, (0, 2, 0), "d2cubic"),
    ChiralVertex(2, 1, (1, 0, 2), "d2beta"),
]


def alternating(g, *factors):
    """Cycles the factors over the external alpha-legs of g."""
    legs = g.external_alpha_legs()
    return TestInput(tuple(itertools.islice(itertools.cycle(factors), len(legs))))


@pytest.fixture(scope="module")
def wheel3():
    return prepare_weight(wheel(3), PHI3)

@pytest.fixture(scope="module")
def wheel4():
    return prepare_weight(wheel(4), PHI4)


class TestInputs:

    def test_parse(self):
        factor = LegFactor.of(a="z**2 + zbar", f="1 + t**2", form="dzbar^dt", sigma=2)
        assert factor.a == z(0)**2 + zbar(0)
        assert factor.degrees == (2,)
        mixed = LegFactor("z", {"1": "t", "dt": 1})
        assert mixed.degrees == (0, 1)

    def test_placement(self):
        F = LegFactor.of(a="z", f="t", form="dt").at(2)
        tag = GaussianTag(-(z(2)*zbar(2) + t(2)**2) / 4)
        assert F == FormExpression([(tag, (dt(2),), z(2)*t(2))])
        # d/dz of z exp(-z zbar/4) is (1 - z zbar/4) exp(-z zbar/4)
        G = LegFactor.of(a="z", f="t", form="dt").at(2, deriv=1)
        assert G == FormExpression([(tag, (dt(2),), (1 - z(2)*zbar(2)/4)*t(2))])

    @pytest.mark.parametrize("kwargs", [
        dict(form="dz"), dict(a="exp(z)"), dict(a="w"), dict(f="z"), dict(sigma=0),
    ])
    def test_invalid_factors(self, kwargs):
        with pytest.raises(DomainError):
            LegFactor.of(**kwargs)

    def test_assignment(self):
        g = wheel(3)
        assert len(PHI3.assign(g)) == 3
        with pytest.raises(DomainError):
            TestInput((LegFactor.of(), LegFactor.of())).assign(g)
        with pytest.raises(DomainError):
            TestInput(())


class TestVanishing:

    def test_one_vertex_wheel(self):
        for form in FORMS:
            r = bulk_weight(wheel(1), 1e-2, 1, TestInput.uniform(LegFactor.of(form=form)))
            assert r.value == 0 and r.reason == "self-loop"

    @pytest.mark.parametrize("vertex", VERTICES)
    def test_one_vertex_wheel_with_derivatives(self, vertex):
        g = wheel(1, vertex)
        for form in FORMS:
            r = bulk_weight(g, 1e-2, 1, TestInput.uniform(LegFactor.of(a="z**2", f="t", form=form)))
            assert r.value == 0 and r.reason == "self-loop"

    @pytest.mark.parametrize("vertex", VERTICES)
    def test_two_vertex_wheel(self, vertex):
        g = wheel(2, vertex)
        for a, b in itertools.product(FORMS, repeat=2):
            phi = alternating(g, LegFactor.of(a="z", f="t", form=a), LegFactor.of(a="zbar", form=b))
            r = bulk_weight(g, 1e-2, 1, phi)
            assert r.value == 0 and r.degree_zero_flag

    @pytest.mark.parametrize("vertex", VERTICES)
    def test_two_vertex_anomaly(self, vertex):
        g = wheel(2, vertex)
        for a, b in itertools.product(FORMS, repeat=2):
            phi = alternating(g, LegFactor.of(a="z**2", form=a), LegFactor.of(f="t", form=b))
            for edge in range(2):
                r = anomaly_weight(g, edge, 1e-2, 1, phi)
                assert r.value == 0 and r.degree_zero_flag
        assert anomaly_weight_sum(g, 1e-2, 1, TestInput.uniform(LegFactor.of(form="dt"))).value == 0

    def test_degree_deficient_input(self):
        r = bulk_weight(wheel(3), 1e-2, 1, TestInput.uniform(LegFactor.of()))
        assert r.value == 0 and r.degree_zero_flag and r.reason == "form degree"

    def test_only_one_loop_graphs(self):
        cubic = VERTEX_LIBRARY["cubic"]
        tree = ChiralGraph((cubic, cubic), [Edge(0, 1, 0)])
        with pytest.raises(DomainError):
            bulk_weight(tree, 1e-2, 1, TestInput.uniform(LegFactor.of()))

    def test_scale_order(self, wheel3):
        with pytest.raises(DomainError):
            wheel3.evaluate(1, 1e-2)

    def test_derivative_cap(self):
        vertex = ChiralVertex(2, 1, (0, 5, 0), "steep")
        with pytest.raises(ResourceError):
            prepare_weight(wheel(2, vertex), TestInput.uniform(LegFactor.of()))

    def test_distinguished_edge(self):
        with pytest.raises(DomainError):
            anomaly_weight(wheel(3), 3, 1e-2, 1, PHI3_ANOMALY)
        with pytest.raises(DomainError):
            anomaly_weight(wheel(3), Edge(0, 2, 0), 1e-2, 1, PHI3_ANOMALY)


class TestThreeWheel:

    def test_integrand_survives(self, wheel3):
        assert wheel3.reason == "" and wheel3.pieces
        assert wheel3.dim == 3

    def test_deterministic(self, wheel3):
        a = wheel3.evaluate(1e-2, 1, **FIXED)
        b = wheel3.evaluate(1e-2, 1, **FIXED)
        assert a.value == b.value

    def test_multilinear(self):
        def weight(a):
            phi = TestInput((
                LegFactor.of(f="t", form="dt"),
                LegFactor.of(a=a, form="dzbar"),
                LegFactor.of(a="z", form="dzbar"),
            ))
            return bulk_weight(wheel(3), 1e-2, 1, phi, **FIXED).value
        combined = weight("z + 2*z**2*zbar")
        assert combined == pytest.approx(weight("z") + 2*weight("z**2*zbar"), rel=1e-9, abs=1e-12)

    def test_epsilon_sweep(self, wheel3):
        report = epsilon_sweep(
            lambda e: wheel3.evaluate(e, 1, tol=1e-4, max_level=6, strict=False),
            [1e-1, 1e-2, 1e-3, 1e-4], tol=1e-4,
        )
        assert report.monotone
        assert report.differences[-1] <= report.differences[0]
        assert np.isfinite(report.extrapolated)

    def test_scale_covariance(self):
        # q -> sqrt(2) q, T -> 2T takes the inputs at width sigma to 2^k times
        # those at width sigma/2, k = (polynomial degree + form degree)/2 = 3
        def weight(epsilon, L, sigma):
            phi = TestInput((
                LegFactor.of(f="t", form="dt", sigma=sigma),
                LegFactor.of(a="z", form="dzbar", sigma=sigma),
                LegFactor.of(a="z", form="dzbar", sigma=sigma),
            ))
            return bulk_weight(wheel(3), epsilon, L, phi, **FIXED).value
        half = sympy.Rational(1, 2)
        expected = 2**3 * weight(1e-2, 1, half)
        assert expected != 0
        assert weight(2e-2, 2, 1) == pytest.approx(expected, rel=1e-8)
        assert weight(4e-2, 4, 2) == pytest.approx(2**3 * weight(2e-2, 2, 1), rel=1e-8)

    def test_anomaly_decays_with_L(self):
        integrand = prepare_weight(wheel(3), PHI3_ANOMALY, distinguished=0)
        assert integrand.dim == 2
        Ls = np.array([1, 1/2, 1/4, 1/8])
        values = np.array([abs(integrand.evaluate(1e-4, L, tol=1e-5, strict=False).value) for L in Ls])
        assert np.all(values > 0)
        assert np.all(np.diff(values) < 0)
        # Power law c L^s through the four scales, vanishing as L -> 0
        s, log_c = np.polyfit(np.log(Ls), np.log(values), 1)
        assert s > 0
        assert np.exp(log_c) * (1/64)**s < values[-1]

    def test_anomaly_limit_in_epsilon(self):
        integrand = prepare_weight(wheel(3), PHI3_ANOMALY, distinguished=0)
        report = epsilon_sweep(
            lambda e: integrand.evaluate(e, 1/8, tol=1e-5, strict=False),
            [1e-2, 1e-3, 1e-4, 1e-5], tol=1e-5,
        )
        assert report.monotone
        assert np.isfinite(report.extrapolated)

    def test_anomaly_sum_over_edges(self):
        quadrature = dict(tol=1e-4, strict=False)
        total = anomaly_weight_sum(wheel(3), 1e-3, 1, PHI3_ANOMALY, **quadrature)
        parts = [anomaly_weight(wheel(3), e, 1e-3, 1, PHI3_ANOMALY, **quadrature) for e in range(3)]
        assert total.value == pytest.approx(sum(p.value for p in parts), rel=1e-12)
        assert total.quadrature_error_estimate == pytest.approx(sum(p.quadrature_error_estimate for p in parts))
        assert not total.degree_zero_flag


class TestFourWheel:

    def test_integrand_survives(self, wheel4):
        assert wheel4.reason == "" and wheel4.pieces
        assert wheel4.dim == 4

    def test_epsilon_sweep(self, wheel4):
        report = epsilon_sweep(
            lambda e: wheel4.evaluate(e, 1, tol=1e-4, max_level=5, strict=False),
            [1e-1, 1e-2, 1e-3, 1e-4], tol=1e-4,
        )
        assert report.monotone
        assert report.differences[-1] < report.differences[0]
        assert np.isfinite(report.extrapolated)


class TestBounds:

    def test_t_box_bound(self):
        lhs, rhs = t_box_bound(2, 1e-3, 1)
        assert 0 < lhs <= rhs

    def test_t_box_bound_one_edge_is_exact(self):
        lhs, rhs = t_box_bound(0, 0.1, 1)
        assert lhs == pytest.approx(2*(0.1**-0.5 - 1), rel=1e-6)
        assert rhs == pytest.approx(lhs, rel=1e-6)

    def test_t_box_increment(self):
        eps = 1e-3
        lhs0, rhs0 = t_box_bound(2, eps, 1)
        lhs1, rhs1 = t_box_bound(2, eps/4, 1)
        assert 0 < lhs1 - lhs0 <= rhs1 - rhs0

    def test_t_box_homogeneity(self):
        lhs, _ = t_box_bound(2, 1e-2, 1)
        scaled, _ = t_box_bound(2, 2e-2, 2)
        assert scaled == pytest.approx(2**1.5 * lhs, rel=1e-5)

    def test_weights_within_scale_bound(self, wheel3, wheel4):
        for integrand in (wheel3, wheel4):
            value, bound = weight_bound(integrand, 1e-2, 1, tol=1e-4, max_level=5, strict=False)
            assert 0 < value <= bound
        with pytest.raises(DomainError):
            weight_bound(prepare_weight(wheel(3), PHI3_ANOMALY, distinguished=0), 1e-2, 1)

    def test_anomaly_bound(self):
        lhs, rhs = anomaly_bound(2, 1e-3, 1)
        assert 0 < lhs <= rhs <= anomaly_bound_limit(2, 1)
        assert anomaly_bound_limit(2, 1) == pytest.approx(16)
        assert anomaly_bound_limit(1, 1) == np.inf
        with pytest.raises(DomainError):
            anomaly_bound(0, 1e-3, 1)

    def test_invalid_boxes(self):
        with pytest.raises(DomainError):
            t_box_bound(2, 1, 1e-3)
        with pytest.raises(DomainError):
            t_box_bound(-1, 1e-3, 1)

    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_holomorphic_reduction(self, n):
        assert holomorphic_reduction_check(n)

    def test_zeta_bound(self):
        rng = np.random.default_rng(0)
        assert zeta_bound_check(rng.uniform(1e-6, 10, size=(1000, 4)))
        assert zeta_bound_check([1, 1])
        with pytest.raises(DomainError):
            zeta_bound_check([1, -1, 2])
        with pytest.raises(DomainError):
            zeta_bound_check([1])


class TestSweeps:

    def test_richardson_limit(self):
        report = epsilon_sweep(lambda e: 1 + e**0.5, [1e-1, 1e-2, 1e-3, 1e-4])
        assert report.extrapolated == pytest.approx(1, abs=1e-10)
        assert report.monotone and not report.converged

    def test_converged(self):
        report = epsilon_sweep(lambda e: 2.0, [1e-1, 1e-2], workers=2)
        assert report.converged
        assert report.rows(1.0, "g")[0] == {
            "epsilon": 1e-1, "L": 1.0, "graph_id": "g", "value": 2.0, "error_estimate": 0.0}

    def test_invalid_sequences(self):
        with pytest.raises(DomainError):
            epsilon_sweep(lambda e: e, [1e-2, 1e-1])
        with pytest.raises(DomainError):
            epsilon_sweep(lambda e: e, [1e-2])
