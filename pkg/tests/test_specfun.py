import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from qginibre import specfun
from qginibre.errors import DomainError, NumericalError

# log G^{n,0}_{0,n}(x | m..m), mpmath.meijerg at 30 digits
FROZEN_LOG_G = [
    (3, 0.5, 0.1, -0.67043570117312430733),
    (3, 0.5, 2.0, -2.4540684283489992852),
    (3, 0.5, 30.0, -7.5002364031597394986),
    (2, 1.5, 0.01, -5.6534484425626005787),
    (2, 1.5, 7.0, -2.3084852002015255346),
    (4, 0.0, 1.0, -2.0750630346152313974),
    (3, 125.0, 3.0e6, 1427.9069118641790292),
]

# 1F2n(1; (m+2)/2 x n, (m+3)/2 x n; y), mpmath.hyper at 30 digits
FROZEN_HYP = [
    (1, 0.0, 0.5, 1.368298872008590679),
    (2, 1.0, 3.0, 1.3513848369000816762),
    (3, 2.5, 10.0, 1.0424472656736882631),
]


@pytest.mark.parametrize("n,m,x,expected", FROZEN_LOG_G)
def test_log_meijer_g_frozen(n, m, x, expected):
    assert specfun.log_meijer_g(n, m, x) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n,m,y,expected", FROZEN_HYP)
def test_hyp_frozen(n, m, y, expected):
    assert specfun.hyp_1_f_2n(n, m, y) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("m", [0.0, 1.0, 2.5, 40.0])
def test_contour_path_at_n1_matches_closed_form(m):
    x = np.geomspace(1e-3, 80.0, 60)
    got = specfun.log_meijer_g_contour(1, m, x)
    np.testing.assert_allclose(got, m * np.log(x) - x, rtol=0, atol=1e-11)


def test_n2_bessel_oracle():
    x = np.geomspace(1e-3, 100.0, 200)
    np.testing.assert_allclose(specfun.meijer_g(2, 0.0, x), 2 * special.k0(2 * np.sqrt(x)), rtol=1e-12)


def test_n2_shifted_bessel_oracle():
    # G^{2,0}_{0,2}(x | m, m) = 2 x^m K_0(2 sqrt x)
    x = np.geomspace(1e-2, 50.0, 50)
    np.testing.assert_allclose(specfun.meijer_g(2, 1.5, x), 2 * x**1.5 * special.k0(2 * np.sqrt(x)), rtol=1e-12)


@given(
    n=st.integers(2, 4),
    m=st.floats(0.0, 20.0),
    x=st.floats(1e-4, 1e4),
)
def test_matches_mpmath(n, m, x):
    ref = float(mpmath.log(mpmath.meijerg([[], []], [[m] * n, []], x)))
    assert specfun.log_meijer_g(n, m, x) == pytest.approx(ref, rel=1e-10, abs=1e-10)


@given(n=st.integers(1, 4), m=st.floats(0.0, 10.0), x=st.floats(1e-3, 1e3))
def test_shift_property(n, m, x):
    a = specfun.log_meijer_g(n, m + 1.0, x)
    b = specfun.log_meijer_g(n, m, x)
    # x^{-m} G(x | m..m) is independent of m
    assert a - (m + 1) * np.log(x) == pytest.approx(b - m * np.log(x), abs=1e-9)


def test_vectorized_equals_scalar():
    x = np.array([0.05, 1.0, 12.0])
    vec = specfun.log_meijer_g(3, 1.0, x)
    assert isinstance(specfun.log_meijer_g(3, 1.0, 1.0), float)
    # the array shares one truncation and step, so agreement is to rounding only
    np.testing.assert_allclose(vec, [specfun.log_meijer_g(3, 1.0, v) for v in x], rtol=1e-13)


def test_fixed_abscissa_agrees_with_saddle():
    cfg = specfun.MellinBarnesConfig(contour_abscissa=1.0)
    x = np.geomspace(0.1, 20, 15)
    np.testing.assert_allclose(specfun.log_meijer_g(2, 0.0, x, cfg), specfun.log_meijer_g(2, 0.0, x), atol=1e-9)


def test_asymptotic_form_improves_with_r():
    rel = []
    for r in (5.0, 20.0, 80.0):
        exact = specfun.log_meijer_g(3, 0.0, r**2)
        rel.append(abs(specfun.log_meijer_g_asymptotic(3, 0.0, r) - exact))
    assert rel[0] > rel[1] > rel[2]
    assert rel[2] < 1e-2


@pytest.mark.parametrize("x", [0.0, -1.0, np.inf, np.nan])
def test_rejects_bad_argument(x):
    with pytest.raises(DomainError):
        specfun.log_meijer_g(2, 0.0, x)


def test_rejects_bad_order():
    with pytest.raises(DomainError):
        specfun.log_meijer_g(0, 0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.log_meijer_g(2, -0.5, 1.0)


def test_unreachable_tolerance_raises_with_estimate():
    cfg = specfun.MellinBarnesConfig(rel_tol=1e-17, max_halvings=1)
    with pytest.raises(NumericalError) as err:
        specfun.log_meijer_g(3, 0.0, 2.0, cfg)
    assert err.value.estimate is not None


def test_gamma_poles_are_domain_errors():
    with pytest.raises(DomainError):
        specfun.log_gamma_complex(-2.0)
    assert specfun.gamma_complex(5.0).real == pytest.approx(24.0)


@given(n=st.integers(1, 3), m=st.floats(0.0, 5.0), y=st.floats(0.0, 50.0))
def test_hyp_matches_mpmath(n, m, y):
    b = [(m + 2) / 2] * n + [(m + 3) / 2] * n
    ref = float(mpmath.hyper([1], b, y))
    assert specfun.hyp_1_f_2n(n, m, y) == pytest.approx(ref, rel=1e-12)
