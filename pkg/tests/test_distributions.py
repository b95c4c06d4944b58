import math

import numpy as np
import pytest

from principal_points.distributions import (
    CATALOG,
    TABULATED,
    AffineMap,
    SupportInterval,
    affine_model,
    affine_pushforward,
    catalog_make,
    custom_model,
    family_defaults,
    interval_moments,
    mean,
    partial_expectation,
    partial_second_moment_about,
    probability_mass,
    second_moments_about,
    variance,
)
from principal_points.errors import ParameterError, UnknownDistributionError

SUPPORTS = {
    "normal": (-math.inf, math.inf),
    "double-exponential": (-math.inf, math.inf),
    "logistic": (-math.inf, math.inf),
    "student-t": (-math.inf, math.inf),
    "exponential": (0.0, math.inf),
    "beta2": (0.0, math.inf),
    "gamma": (0.0, math.inf),
    "beta1": (0.0, 1.0),
    "uniform": (0.0, 1.0),
}
SYMMETRIC = {"normal", "double-exponential", "logistic", "student-t"}

# (mean, variance) with default parameters
MOMENTS = {
    "normal": (0.0, 1.0),
    "exponential": (1.0, 1.0),
    "double-exponential": (0.0, 2.0),
    "beta1": (0.5, 0.05),
    "beta2": (0.5, 0.75),
    "gamma": (math.sqrt(2.0), 1.0),
    "logistic": (0.0, 1.0),
    "student-t": (0.0, 3.0),
    "uniform": (0.5, 1.0 / 12.0),
}


@pytest.fixture(params=CATALOG)
def model(request):
    return catalog_make(request.param)


def test_catalog_lists_nine_families_and_paper_subset_excludes_uniform():
    assert len(CATALOG) == 9
    assert set(TABULATED) == set(CATALOG) - {"uniform"}


def test_support_and_symmetry_flags(model):
    assert (model.support.lower, model.support.upper) == SUPPORTS[model.name]
    assert model.symmetric_about_zero == (model.name in SYMMETRIC)


def test_normalization(model):
    total = probability_mass(model, model.support.lower, model.support.upper)
    assert abs(total - 1.0) <= 1e-12


def test_mean_and_variance(model):
    mu, var = MOMENTS[model.name]
    assert mean(model) == pytest.approx(mu, abs=1e-13)
    assert variance(model) == pytest.approx(var, rel=1e-12)


def test_pdf_is_non_negative_and_zero_outside_support(model):
    x = np.linspace(-30, 30, 2001)
    f = model.pdf(x)
    assert np.all(f >= 0)
    outside = ~((x >= model.support.lower) & (x <= model.support.upper))
    assert np.all(f[outside] == 0)


def test_symmetry_flag_is_sound(model):
    if not model.symmetric_about_zero:
        pytest.skip("not flagged symmetric")
    x = np.linspace(0.0, 25.0, 1001)
    fp, fm = model.pdf(x), model.pdf(-x)
    assert np.all(np.abs(fp - fm) <= 1e-14 * np.maximum(1.0, fp))


def _random_cells(model, rng, count):
    s = model.support
    lo_end = s.lower if math.isfinite(s.lower) else -12.0
    hi_end = s.upper if math.isfinite(s.upper) else 40.0
    pts = np.sort(rng.uniform(lo_end, hi_end, size=(count, 2)), axis=1)
    # include cells reaching the true support ends
    pts[:5, 0] = s.lower
    pts[5:10, 1] = s.upper
    return pts[:, 0], pts[:, 1]


def test_closed_forms_agree_with_quadrature(model, rng):
    if not model.has_closed_forms:
        pytest.skip("quadrature only")
    plain = model.without_closed_forms()
    lo, hi = _random_cells(model, rng, 100)
    fast = interval_moments(model, lo, hi, (0, 1, 2))
    slow = interval_moments(plain, lo, hi, (0, 1, 2))
    for p in range(2):
        np.testing.assert_allclose(fast[p], slow[p], rtol=0, atol=1e-12)
    finite = np.isfinite(slow[2])
    np.testing.assert_allclose(fast[2][finite], slow[2][finite], rtol=1e-12, atol=1e-12)
    centers = rng.uniform(-3, 3, lo.size)
    np.testing.assert_allclose(second_moments_about(model, centers, lo, hi),
                               second_moments_about(plain, centers, lo, hi), rtol=1e-12, atol=1e-12)


def test_closed_forms_attached_where_elementary():
    for name in ["normal", "exponential", "double-exponential", "beta1", "gamma",
                 "logistic", "student-t", "uniform"]:
        assert catalog_make(name).has_closed_forms, name
    assert not catalog_make("beta2").has_closed_forms
    assert not catalog_make("student-t", {"k": 5}).has_closed_forms
    assert not catalog_make("beta1", {"r": 2.5, "s": 2}).has_closed_forms
    assert not catalog_make("gamma", {"b": 2.5}).has_closed_forms


def test_exponential_values():
    m = catalog_make("exponential")
    assert m.pdf(0.0) == 1.0
    assert m.pdf(1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert probability_mass(m, 0.0, math.inf) == pytest.approx(1.0, abs=1e-15)
    assert probability_mass(m, 0.0, math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert partial_expectation(m, 0.0, math.inf) == pytest.approx(1.0, abs=1e-15)
    assert partial_second_moment_about(m, 1.0, 0.0, math.inf) == pytest.approx(1.0, abs=1e-14)


def test_normal_half_line_values():
    m = catalog_make("normal")
    assert probability_mass(m, 0.0, math.inf) == pytest.approx(0.5, abs=1e-16)
    assert partial_expectation(m, 0.0, math.inf) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-16)


def test_double_exponential_first_moment_vanishes():
    m = catalog_make("double-exponential")
    assert partial_expectation(m, -math.inf, math.inf) == pytest.approx(0.0, abs=1e-16)


def test_student_t_variance_and_degenerate_interval():
    m = catalog_make("student-t")
    assert partial_second_moment_about(m, 0.0, -math.inf, math.inf) == pytest.approx(3.0, rel=1e-12)
    assert partial_second_moment_about(m, 0.7, 1.5, 1.5) == 0.0


def test_far_tail_cells_keep_relative_accuracy():
    # upper partial moments avoid 1 - (1 - tiny) cancellation
    m = catalog_make("normal")
    p = probability_mass(m, 8.0, math.inf)
    assert p == pytest.approx(6.22096057427178e-16, rel=1e-12)
    e = catalog_make("exponential")
    assert probability_mass(e, 30.0, math.inf) == pytest.approx(math.exp(-30.0), rel=1e-13)


def test_scalar_inputs_give_python_floats():
    m = catalog_make("normal")
    assert isinstance(probability_mass(m, 0.0, 1.0), float)
    out = probability_mass(m, np.array([0.0, 1.0]), np.array([1.0, 2.0]))
    assert out.shape == (2,)


@pytest.mark.parametrize("name, params, constraint", [
    ("beta2", {"r": 1, "s": 1.5}, "s > 2"),
    ("beta2", {"r": 0, "s": 3}, "r > 0"),
    ("beta1", {"s": -1}, "s > 0"),
    ("gamma", {"a": 0}, "a > 0"),
    ("logistic", {"a": -2}, "a > 0"),
    ("student-t", {"k": 2}, "k >= 3"),
    ("student-t", {"k": 3.5}, "integer"),
])
def test_parameter_constraints_are_named(name, params, constraint):
    with pytest.raises(ParameterError, match=constraint.replace(">", ">")):
        catalog_make(name, params)


def test_unknown_parameter_and_family():
    with pytest.raises(ParameterError):
        catalog_make("normal", {"r": 1})
    with pytest.raises(ParameterError):
        catalog_make("gamma", {"a": math.nan})
    with pytest.raises(UnknownDistributionError, match="cauchy"):
        catalog_make("cauchy")
    with pytest.raises(UnknownDistributionError):
        family_defaults("cauchy")


def test_defaults():
    assert catalog_make("beta1").parameters == {"r": 2.0, "s": 2.0}
    assert catalog_make("beta2").parameters == {"r": 1.0, "s": 3.0}
    assert catalog_make("gamma").parameters == pytest.approx({"a": 1 / math.sqrt(2), "b": 2.0})
    assert catalog_make("logistic").parameters == pytest.approx({"a": math.sqrt(3) / math.pi})
    assert catalog_make("student-t").parameters == {"k": 3.0}


def test_non_default_parameters_normalize():
    for name, params in [("beta1", {"r": 3, "s": 5}), ("beta1", {"r": 0.5, "s": 0.5}),
                         ("beta2", {"r": 2, "s": 4.5}), ("gamma", {"a": 2, "b": 3}),
                         ("gamma", {"a": 1, "b": 0.7}), ("student-t", {"k": 7}),
                         ("logistic", {"a": 2})]:
        m = catalog_make(name, params)
        assert probability_mass(m, m.support.lower, m.support.upper) == pytest.approx(1.0, abs=1e-12)


def test_support_interval_validation():
    with pytest.raises(ValueError):
        SupportInterval(1.0, 0.0)
    with pytest.raises(ValueError):
        SupportInterval(math.nan, 1.0)
    with pytest.raises(ValueError):
        SupportInterval(math.inf, math.inf)
    s = SupportInterval(-math.inf, 2.0)
    assert not s.bounded
    assert str(s) == "(-inf, 2]"
    np.testing.assert_array_equal(s.interior([-1e300, 2.0, 1.0]), [True, False, True])


def test_affine_map_requires_positive_scale():
    with pytest.raises(ValueError):
        AffineMap(0.0, 0.0)
    with pytest.raises(ValueError):
        AffineMap(math.inf, 1.0)


def test_affine_pushforward_examples():
    pts, v = affine_pushforward(np.array([0.0]), 1.0, AffineMap(3, 2))
    assert list(pts) == [3.0] and v == 4.0
    phi = math.sqrt(2 / math.pi)
    pts, v = affine_pushforward(np.array([-phi, phi]), 0.36338, AffineMap(0, 1))
    np.testing.assert_array_equal(pts, [-phi, phi])
    pts, v = affine_pushforward(np.array([-0.79788, 0.79788]), 0.36338, AffineMap(3, 2))
    np.testing.assert_allclose(pts, [1.40424, 4.59576], atol=1e-12)
    assert v == pytest.approx(4 * 0.36338)


def test_affine_pushforward_rejects_unsorted_points():
    with pytest.raises(ValueError):
        affine_pushforward(np.array([1.0, 0.0]), 1.0, AffineMap())


def test_affine_model_density_and_moments():
    base = catalog_make("normal")
    m = affine_model(base, AffineMap(3.0, 2.0))
    assert m.pdf(3.0) == pytest.approx(base.pdf(0.0) / 2.0)
    assert probability_mass(m, -math.inf, math.inf) == pytest.approx(1.0, abs=1e-15)
    assert mean(m) == pytest.approx(3.0, abs=1e-14)
    assert variance(m) == pytest.approx(4.0, rel=1e-13)
    assert not m.symmetric_about_zero
    assert affine_model(base, AffineMap(0.0, 2.0)).symmetric_about_zero


def test_affine_model_can_declare_recentred_symmetry():
    m = affine_model(catalog_make("uniform"), AffineMap(-0.5, 1.0), symmetric_about_zero=True)
    assert m.symmetric_about_zero
    with pytest.raises(ParameterError):
        affine_model(catalog_make("exponential"), AffineMap(-1.0, 1.0), symmetric_about_zero=True)


def test_custom_model_routes_through_quadrature():
    m = custom_model(lambda x: np.where(x < 1, x, 2 - x), 0.0, 2.0, breakpoints=(1.0,))
    assert not m.has_closed_forms
    assert probability_mass(m, 0.0, 1.0) == pytest.approx(0.5, abs=1e-14)
    assert partial_expectation(m, 0.0, 2.0) == pytest.approx(1.0, abs=1e-14)


def test_custom_model_mass_check_and_normalize():
    with pytest.raises(ParameterError, match="integrates"):
        custom_model(lambda x: 2 * np.exp(-x), 0.0, math.inf)
    m = custom_model(lambda x: 2 * np.exp(-x), 0.0, math.inf, normalize=True)
    assert m.pdf(0.0) == pytest.approx(1.0)


def test_custom_model_accepts_scalar_only_pdf():
    m = custom_model(lambda x: math.exp(-x), 0.0, math.inf)
    assert probability_mass(m, 0.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-14)


def test_custom_symmetry_is_spot_checked():
    with pytest.raises(ParameterError, match="symmetric"):
        custom_model(lambda x: np.where(x > 0, 1.5, 0.5), -0.5, 0.5,
                     symmetric_about_zero=True, breakpoints=(0.0,))
    with pytest.raises(ParameterError):
        custom_model(lambda x: np.exp(-x), 0.0, math.inf, symmetric_about_zero=True)
    m = custom_model(lambda x: 0.5 * np.exp(-np.abs(x)), -math.inf, math.inf,
                     symmetric_about_zero=True, breakpoints=(0.0,))
    assert m.symmetric_about_zero
