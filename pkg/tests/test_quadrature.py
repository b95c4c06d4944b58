import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import Polynomial
from scipy.special import gamma as gamma_fn

from principal_points.errors import QuadratureError
from principal_points.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureConfig,
    gk15,
    integrate,
    integrate_intervals,
    map_infinite,
)

EPS = np.finfo(float).eps


def test_gauss_subrule_matches_legendre_7_point_rule():
    x, w = np.polynomial.legendre.leggauss(7)
    used = GAUSS_WEIGHTS != 0
    np.testing.assert_allclose(NODES[used], x, atol=1e-15)
    np.testing.assert_allclose(GAUSS_WEIGHTS[used], w, atol=1e-15)


def test_kronrod_rule_is_exact_to_degree_22():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    for k in range(0, 23):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert KRONROD_WEIGHTS @ NODES**k == pytest.approx(exact, abs=1e-14)


def test_single_panel_returns_kronrod_and_gauss_estimates():
    k, g = gk15(np.exp, 0.0, 1.0)
    assert k == pytest.approx(math.e - 1, abs=1e-15)
    assert g == pytest.approx(math.e - 1, abs=1e-13)


@pytest.mark.parametrize("integrand, lo, hi, expected, tol", [
    (lambda x: x, 0.0, 1.0, 0.5, 1e-14),
    (lambda x: np.exp(-x), 0.0, math.inf, 1.0, 1e-13),
    (lambda x: x * x * np.exp(-x * x / 2) / math.sqrt(2 * math.pi), -math.inf, math.inf, 1.0, 1e-12),
    (lambda x: np.exp(x), -math.inf, 0.0, 1.0, 1e-13),
    (lambda x: 1.0 / (1.0 + x * x), -math.inf, math.inf, math.pi, 1e-12),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2.0 / 3.0, 1e-13),
])
def test_known_integrals(integrand, lo, hi, expected, tol):
    est = integrate(integrand, lo, hi)
    assert est.value == pytest.approx(expected, abs=tol)
    assert est.error_estimate >= 0


def test_scalar_only_integrands_are_accepted():
    est = integrate(lambda x: math.exp(-x), 0.0, 2.0)
    assert est.value == pytest.approx(1 - math.exp(-2), abs=1e-15)


def test_error_estimate_respects_tolerance_on_success():
    cfg = QuadratureConfig()
    for f, lo, hi in [(np.cos, 0, 10), (lambda x: np.exp(-x * x), -math.inf, math.inf),
                      (lambda x: x**3 * np.exp(-x), 0, math.inf)]:
        est = integrate(f, lo, hi, cfg)
        assert est.error_estimate <= max(cfg.abs_tol, cfg.rel_tol * abs(est.value))


@pytest.mark.parametrize("f, lo, hi, exact", [
    (lambda x: np.exp(-x), 0.0, math.inf, 1.0),
    (lambda x: x**4 * np.exp(-x), 0.0, math.inf, 24.0),
    (lambda x: np.exp(-x * x / 2) / math.sqrt(2 * math.pi), -math.inf, math.inf, 1.0),
    (lambda x: 0.5 * np.exp(-np.abs(x)), -math.inf, math.inf, 1.0),
    (lambda x: x**0.5 * np.exp(-x), 0.0, math.inf, gamma_fn(1.5)),
    (lambda x: 6 * x * (1 - x), 0.0, 1.0, 1.0),
    (lambda x: np.log(x), 0.0, 1.0, -1.0),
])
def test_error_estimate_is_honest(f, lo, hi, exact):
    est = integrate(f, lo, hi, breakpoints=(0.0,))
    assert abs(est.value - exact) <= 10 * est.error_estimate + 4 * EPS * abs(exact)


def test_breakpoint_removes_false_convergence_at_a_kink():
    # |x - 0.3| has a kink the 15-point rule cannot see on a coarse panel
    exact = (0.3**2 + 1.7**2) / 2
    est = integrate(lambda x: np.abs(x - 0.3), 0.0, 2.0, breakpoints=(0.3,))
    assert est.value == pytest.approx(exact, abs=1e-15)


def test_nonconvergence_reports_best_value():
    cfg = QuadratureConfig(max_subdivisions=5)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / x), 1e-6, 1.0, cfg)
    assert info.value.value is not None
    assert info.value.error_estimate > 0


@pytest.mark.parametrize("kwargs", [dict(abs_tol=0), dict(rel_tol=-1), dict(max_subdivisions=0)])
def test_config_rejects_non_positive_fields(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_integrate_rejects_reversed_bounds():
    with pytest.raises(ValueError):
        integrate(np.cos, 1.0, 0.0)


def test_map_infinite_right_tail():
    (piece,) = map_infinite(0.0, math.inf)
    assert piece.x_of_t(0.5) == pytest.approx(1.0)
    assert piece.weight(0.5) == pytest.approx(4.0)
    (piece,) = map_infinite(2.0, math.inf)
    assert piece.x_of_t(0.0) == 2.0
    assert piece.weight(0.0) == 1.0


def test_map_infinite_left_tail_mirrors_right_tail():
    (piece,) = map_infinite(-math.inf, 1.0)
    assert piece.x_of_t(0.5) == pytest.approx(0.0)
    assert piece.weight(0.5) == pytest.approx(4.0)


def test_map_infinite_splits_the_real_line_at_zero():
    pieces = map_infinite(-math.inf, math.inf)
    assert [(p.lower, p.upper) for p in pieces] == [(-math.inf, 0.0), (0.0, math.inf)]


def test_map_infinite_requires_an_infinite_end():
    with pytest.raises(ValueError):
        map_infinite(0.0, 1.0)


def test_batched_intervals_match_individual_calls():
    lo = np.array([-np.inf, -1.0, 0.0, 0.5, 2.0, 3.0])
    hi = np.array([-1.0, 0.0, 0.5, 2.0, np.inf, 3.0])

    def f(x, _owner):
        g = np.exp(-x * x / 2)
        return np.vstack([g, x * g])

    vals, errs, _ = integrate_intervals(f, lo, hi, ncomp=2)
    assert vals.shape == errs.shape == (2, lo.size)
    assert vals[:, -1] == pytest.approx([0.0, 0.0])
    for j in range(lo.size - 1):
        assert vals[0, j] == pytest.approx(integrate(lambda x: np.exp(-x * x / 2), lo[j], hi[j]).value,
                                           abs=1e-14)


def test_integrand_sees_owner_indices():
    seen = set()

    def f(x, owner):
        seen.update(np.unique(owner).tolist())
        return np.ones_like(x) * (owner + 1)

    vals, _, _ = integrate_intervals(f, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
    assert seen == {0, 1, 2}
    np.testing.assert_allclose(vals[0], [1.0, 2.0, 3.0])


@given(coeffs=st.lists(st.floats(-10, 10), min_size=1, max_size=11),
       a=st.floats(-5, 5), width=st.floats(0.01, 10))
def test_polynomials_up_to_degree_10_are_exact_without_subdivision(coeffs, a, width):
    p = Polynomial(coeffs)
    b = a + width
    # exact rational reference; a float antiderivative cancels badly here
    anti = lambda x: sum(Fraction(c) * Fraction(x) ** (i + 1) / (i + 1) for i, c in enumerate(coeffs))
    exact = float(anti(b) - anti(a))
    est = integrate(p, a, b)
    # rounding in evaluating p itself scales with the sum of |term|
    bound = Polynomial(np.abs(coeffs))
    scale = integrate(lambda x: bound(np.abs(x)), a, b).value
    assert est.subdivisions == 0
    assert abs(est.value - exact) <= 10 * EPS * max(abs(exact), scale) + 1e-300


@given(a=st.floats(-3, 3), gaps=st.tuples(st.floats(0.01, 3), st.floats(0.01, 3)))
def test_additivity(a, gaps):
    b, c = a + gaps[0], a + gaps[0] + gaps[1]

    def f(x):
        return np.exp(-x * x) * np.cos(3 * x)

    whole = integrate(f, a, c)
    left, right = integrate(f, a, b), integrate(f, b, c)
    slack = whole.error_estimate + left.error_estimate + right.error_estimate
    assert abs(whole.value - left.value - right.value) <= slack + 4 * EPS


def test_cancelling_integrand_stops_at_rounding_noise():
    # terms up to ~30 cancel to an integral of -0.07; |K15 - G7| is pure noise
    coeffs = [3.875, 1.75, 0.0, 0.0, -1.25, -9.25, -3.5, 0.25, -2.25, 0.75, 2.25]
    a, b = -0.625, 1.28125
    anti = lambda x: sum(Fraction(c) * Fraction(x) ** (i + 1) / (i + 1) for i, c in enumerate(coeffs))
    est = integrate(Polynomial(coeffs), a, b)
    assert est.value == pytest.approx(float(anti(b) - anti(a)), abs=1e-14)
