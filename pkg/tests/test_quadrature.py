import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fracpow import quadrature as q


def test_c_beta_values():
    assert q.c_beta(0.5) == pytest.approx(math.pi / 2, rel=1e-15)
    assert q.c_beta(0.25) == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)
    assert q.c_beta(0.3) == pytest.approx(q.c_beta(0.7), rel=1e-14)


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_c_beta_is_the_integral(beta):
    val, _ = integrate.quad(lambda t: t ** (2 * beta - 1) / (1 + t * t), 0, np.inf, limit=200)
    assert q.c_beta(beta) == pytest.approx(val, rel=1e-8)


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.1, 1.5])
def test_beta_endpoints_rejected(beta):
    with pytest.raises(ValueError):
        q.c_beta(beta)


def test_schemes_reject_degenerate_beta():
    with pytest.raises(ValueError):
        q.exponential_scheme(1e-4, 0.5)
    with pytest.raises(ValueError):
        q.rectangle_scheme(1 - 1e-4, 8)


def test_mesh_ratio_bound():
    assert q.mesh_ratio_bound(1) == 1
    assert q.mesh_ratio_bound(2) == 3
    assert q.mesh_ratio_bound(0.5) == 1
    with pytest.raises(ValueError):
        q.mesh_ratio_bound(0)


def test_graded_nodes_examples():
    np.testing.assert_allclose(q.graded_nodes(4, 1).nodes, [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_allclose(q.graded_nodes(4, 2).nodes, [0, 1 / 16, 1 / 4, 9 / 16, 1])
    assert q.graded_nodes(16, 2).ratios().max() <= 3


@given(N=st.integers(2, 300), theta=st.floats(0.2, 8.0))
def test_graded_ratio_bound(N, theta):
    p = q.graded_nodes(N, theta)
    assert p.nodes[0] == 0 and p.nodes[-1] == 1
    assert np.all(np.diff(p.nodes) > 0)
    assert p.ratios().max() <= q.mesh_ratio_bound(theta) * (1 + 1e-12)


def test_weighted_gauss_examples():
    r = q.weighted_gauss_rule(0, 1, 0, 1)
    np.testing.assert_allclose(r.nodes, [0.5])
    np.testing.assert_allclose(r.weights, [1.0])
    r = q.weighted_gauss_rule(0, 1, 0, 2)
    d = 1 / (2 * math.sqrt(3))
    np.testing.assert_allclose(np.sort(r.nodes), [0.5 - d, 0.5 + d], rtol=1e-14)
    np.testing.assert_allclose(r.weights, [0.5, 0.5], rtol=1e-14)
    r = q.weighted_gauss_rule(0, 1, -0.5, 1)
    np.testing.assert_allclose(r.weights, [2.0], rtol=1e-14)
    np.testing.assert_allclose(r.nodes, [1 / 3], rtol=1e-14)


def test_weighted_gauss_rejects_bad_input():
    with pytest.raises(ValueError):
        q.weighted_gauss_rule(0, 1, 0, 0)
    with pytest.raises(ValueError):
        q.weighted_gauss_rule(0, 1, -1.0, 2)
    with pytest.raises(ValueError):
        q.weighted_gauss_rule(1, 1, 0, 2)


@given(a=st.floats(0.0, 5.0), width=st.floats(1e-4, 10.0), gamma=st.floats(-0.95, 0.95))
def test_weighted_moment_matches_numeric(a, width, gamma):
    b = a + width
    ref, _ = integrate.quad(lambda t: t**gamma, a, b, epsabs=0, epsrel=1e-12, limit=200)
    assert q.weighted_moment(a, b, gamma) == pytest.approx(ref, rel=1e-9)


@settings(max_examples=60)
@given(
    a=st.one_of(st.just(0.0), st.floats(1e-6, 4.0)),
    ratio=st.floats(1.01, 1e4),
    gamma=st.floats(-0.95, 0.95),
    r=st.integers(1, 4),
)
def test_weighted_gauss_exactness_property(a, ratio, gamma, r):
    b = a * ratio if a > 0 else ratio / 1e4
    rule = q.weighted_gauss_rule(a, b, gamma, r)
    assert np.all(rule.weights > 0)
    assert np.all((rule.nodes > a) & (rule.nodes < b))
    for p in range(2 * r):
        exact = q.weighted_moment(a, b, gamma, p)
        approx = float(np.sum(rule.weights * rule.nodes**p))
        assert approx == pytest.approx(exact, rel=1e-10)


def test_rectangle_examples():
    s = q.rectangle_scheme(0.5, 2)
    np.testing.assert_allclose(s.t1_nodes, [0.25, 0.75])
    np.testing.assert_allclose(s.t1_weights, [0.5, 0.5])
    assert s.nsys == 4
    np.testing.assert_allclose(q.rectangle_scheme(0.25, 4).t1_weights, 0.5, rtol=1e-13)
    np.testing.assert_allclose(q.rectangle_scheme(0.75, 4).t2_weights, 0.5, rtol=1e-13)
    assert q.rectangle_scheme(0.25, 4).params["cases"] == "i-iv"
    assert q.rectangle_scheme(0.75, 4).params["cases"] == "ii-iii"


def test_dyadic_counts():
    assert q.dyadic_levels(0.5, 2, 2, extra_bits=0) == (4, 4)
    assert q.dyadic_gauss_scheme(0.5, 2, 2, extra_bits=0).nsys == 32
    assert q.dyadic_levels(0.75, 2, 2, extra_bits=0) == (3, 8)
    m, m2 = q.dyadic_levels(0.75, 2, 2, "combined", extra_bits=0)
    assert m == m2 == 8


def test_dyadic_subinterval_length():
    s = q.dyadic_gauss_scheme(0.5, 4, r=1, extra_bits=0)
    # gamma = 0 for beta = 1/2: one-point nodes are cell midpoints, weights the lengths
    level3 = (s.t1_nodes > 2**-3) & (s.t1_nodes < 2**-2)
    np.testing.assert_allclose(s.t1_weights[level3], 2**-3 / 4)


def test_dyadic_needs_n_at_least_two():
    with pytest.raises(ValueError):
        q.dyadic_gauss_scheme(0.5, 1)


@pytest.mark.parametrize("beta,k,M,N", [(0.5, 1, 5, 5), (0.75, 0.5, 14, 40), (0.25, 0.25, 158, 53)])
def test_exponential_counts(beta, k, M, N):
    assert q.exponential_counts(beta, k) == (M, N)
    assert q.exponential_scheme(beta, k).nsys == M + N + 1


def test_exponential_symmetric_variant():
    s = q.exponential_scheme(0.5, 1 / 3, equalize=False)
    assert s.params["M"] == s.params["N"] == 9
    assert s.nsys == 19


def test_exponential_matches_direct_sum():
    beta, k = 0.3, 0.4
    s = q.exponential_scheme(beta, k)
    y = s.exp_nodes
    for lam in (0.5, 10.0, 1e6):
        direct = 2 * k * math.sin(math.pi * beta) / math.pi * np.sum(
            np.exp(2 * beta * y) / (1 + np.exp(2 * y) * lam))
        assert q.eval_scheme(s, lam) == pytest.approx(direct, rel=1e-13)


SCHEMES = [
    q.rectangle_scheme(0.5, 31),
    q.rectangle_scheme(0.25, 63),
    q.rectangle_scheme(0.75, 63),
    q.dyadic_gauss_scheme(0.5, 2),
    q.dyadic_gauss_scheme(0.25, 4),
    q.exponential_scheme(0.5, 1 / 3),
    q.exponential_scheme(0.75, 1 / 2),
]


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.summary())
def test_scheme_nodes_in_unit_interval(scheme):
    for t, w in ((scheme.t1_nodes, scheme.t1_weights), (scheme.t2_nodes, scheme.t2_weights)):
        assert np.all((t > 0) & (t <= 1))
        assert np.all(w > 0)
    assert scheme.nsys == scheme.t1_nodes.size + scheme.t2_nodes.size


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.summary())
@given(lam=st.floats(1e-6, 1e30))
def test_positive(scheme, lam):
    assert q.eval_scheme(scheme, lam) > 0


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.summary())
def test_value_at_one(scheme):
    bound = q.theoretical_bound(scheme, 1.0)
    if q.bound_normalization(scheme) == "integral":
        bound /= q.c_beta(scheme.beta)
    assert abs(q.eval_scheme(scheme, 1.0) - 1.0) <= bound


def test_eval_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        q.eval_scheme(SCHEMES[0], 0.0)
    with pytest.raises(ValueError):
        q.scalar_error(SCHEMES[0], -1.0)


def test_normalizations():
    s = SCHEMES[0]
    lam = np.array([10.0, 1e3, 1e6])
    np.testing.assert_allclose(q.scalar_error(s, lam, "integral"),
                               q.c_beta(s.beta) * q.scalar_error(s, lam, "power"))
    with pytest.raises(ValueError):
        q.scalar_error(s, lam, "other")


def test_eval_vectorized_matches_scalar():
    s = SCHEMES[3]
    lam = np.geomspace(1, 1e9, 7)
    np.testing.assert_allclose(q.eval_scheme(s, lam), [q.eval_scheme(s, x) for x in lam], rtol=1e-15)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.summary())
def test_sup_error_report(scheme):
    rep = q.sup_error(scheme, 10.0)
    assert rep.sup_error >= 0
    assert rep.argmax_lambda >= 10.0
    assert rep.lambdas_scanned == rep.grid.size
    assert rep.sup_error >= rep.grid_errors.max()
    assert q.sup_error(scheme, 100.0).sup_error <= rep.sup_error * (1 + 1e-12)


def test_sup_error_examples():
    assert q.sup_error(q.exponential_scheme(0.5, 1)).sup_error == pytest.approx(2.71e-3, rel=0.05)
    assert q.sup_error(q.rectangle_scheme(0.75, 1023)).sup_error == pytest.approx(8.38e-7, rel=0.05)
    assert q.sup_error(q.rectangle_scheme(0.5, 31)).sup_error == pytest.approx(2.86e-3, rel=0.05)
    assert q.sup_error(q.dyadic_gauss_scheme(0.5, 2)).sup_error == pytest.approx(1.37e-3, rel=0.05)
    assert q.sup_error(q.exponential_scheme(0.25, 1)).sup_error == pytest.approx(4.77e-3, rel=0.05)


def test_exponential_at_ten():
    s = q.exponential_scheme(0.5, 1 / 3)
    assert q.scalar_error(s, 10.0) <= q.sup_error(s).sup_error


def test_rectangle_bound_examples():
    assert q.theoretical_bound(q.rectangle_scheme(0.5, 31), 10) == pytest.approx(
        (2 + math.pi) / 31 + (2 + math.pi) / 310, rel=1e-14)
    assert q.theoretical_bound(q.rectangle_scheme(0.5, 31), 10) == pytest.approx(0.1825, abs=1e-4)
    b = q.theoretical_bound(q.rectangle_scheme(0.25, 100), 10)
    first = (2 + 3 * math.pi) / (100 * 0.5)
    assert first == pytest.approx(0.2285, abs=5e-5)
    assert b == pytest.approx(first + (2 + math.pi) / (10 * 100), rel=1e-14)


def test_exponential_bound_scale():
    b = q.theoretical_bound(q.exponential_scheme(0.5, 0.5), 10)
    assert 0.1 * math.exp(-math.pi**2) < b < 10 * math.exp(-math.pi**2)


def test_bound_decreasing_in_lambda0():
    for s in SCHEMES:
        assert q.theoretical_bound(s, 100) <= q.theoretical_bound(s, 10)


def test_operator_bound_uses_power_normalization():
    s = q.rectangle_scheme(0.5, 31)
    assert q.operator_bound(s, 0.1) == pytest.approx(q.theoretical_bound(s, 10) / q.c_beta(0.5))
    e = q.exponential_scheme(0.5, 0.5)
    assert q.operator_bound(e, 0.1) == q.theoretical_bound(e, 10)
    assert q.bound_is_rigorous(s) and q.bound_is_rigorous(e)
    assert not q.bound_is_rigorous(q.dyadic_gauss_scheme(0.5, 2))


def test_make_scheme_aliases():
    assert q.make_scheme("rect", 0.5, N=4).kind == q.RECTANGLE
    assert q.make_scheme("gauss", 0.5, N=2).kind == q.GAUSS
    assert q.make_scheme("exp", 0.5, k=1).kind == q.EXPONENTIAL
    with pytest.raises(ValueError):
        q.make_scheme("simpson", 0.5, N=4)
