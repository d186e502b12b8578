import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qginibre.correlations import (
    CorrelationPointSet,
    PrekernelEvaluator,
    correlation_Rk,
    density_R1,
    jpdf,
    log_weight,
    marginal_Rk_from_jpdf_factor,
    pfaffian,
    pfaffian_expansion,
    prekernel_polynomial,
    weight,
)
from qginibre.ensemble import EnsembleParams, log_partition_function
from qginibre.errors import DomainError, IntegrityError, NumericalError, UsageError

upper = st.builds(
    complex,
    st.floats(-3.0, 3.0),
    st.floats(0.05, 3.0),
)


def antisym(rng, dim):
    B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return B - B.T


# ---- Pfaffian -------------------------------------------------------------


def test_pfaffian_small_closed_forms():
    A = np.array([[0, 2.0], [-2.0, 0]])
    assert pfaffian(A) == pytest.approx(2.0)
    rng = np.random.default_rng(1)
    A = antisym(rng, 4)
    ref = A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2]
    assert pfaffian(A) == pytest.approx(ref, rel=1e-13)
    assert pfaffian(np.zeros((0, 0))) == 1.0


@given(dim=st.sampled_from([2, 4, 6, 8]), seed=st.integers(0, 2**32 - 1))
def test_pfaffian_matches_expansion(dim, seed):
    A = antisym(np.random.default_rng(seed), dim)
    assert pfaffian(A) == pytest.approx(pfaffian_expansion(A), rel=1e-10)


@given(dim=st.sampled_from([2, 4, 6, 8, 10, 12]), seed=st.integers(0, 2**32 - 1))
def test_pfaffian_squared_is_det(dim, seed):
    A = antisym(np.random.default_rng(seed), dim)
    assert pfaffian(A) ** 2 == pytest.approx(np.linalg.det(A), rel=1e-9)


@given(dim=st.sampled_from([2, 4, 6]), seed=st.integers(0, 2**32 - 1))
def test_pfaffian_congruence(dim, seed):
    rng = np.random.default_rng(seed)
    A = antisym(rng, dim)
    B = rng.standard_normal((dim, dim))
    assert pfaffian(B @ A @ B.T) == pytest.approx(np.linalg.det(B) * pfaffian(A), rel=1e-9)


def test_pfaffian_singular_and_pivoting():
    A = np.zeros((4, 4))
    A[0, 2], A[2, 0] = 1.0, -1.0
    A[1, 3], A[3, 1] = 1.0, -1.0
    assert pfaffian(A) == pytest.approx(pfaffian_expansion(A))  # needs a row swap
    assert pfaffian(np.zeros((4, 4))) == 0


@pytest.mark.parametrize("A", [np.ones((2, 2)), np.zeros((3, 3)), np.zeros((2, 3))])
def test_pfaffian_rejects(A):
    with pytest.raises(UsageError):
        pfaffian(A)


# ---- weight and prekernel ---------------------------------------------------


def test_weight_n1():
    p = EnsembleParams(1, 2.0, 1)
    z = 0.6 + 0.8j
    assert weight(p, z) == pytest.approx(np.exp(-1.0))


def test_weight_origin():
    assert weight(EnsembleParams(1, 0.0, 1), 0.0) == 1.0
    assert weight(EnsembleParams(2, 1.0, 1), 0.0) == 0.0
    with pytest.raises(DomainError):
        log_weight(EnsembleParams(2, 0.0, 1), 0.0)


@given(n=st.integers(1, 3), m=st.sampled_from([0.0, 1.0, 2.5]), N=st.integers(1, 10), u=upper, v=upper)
def test_prekernel_paths_agree(n, m, N, u, v):
    p = EnsembleParams(n, m, N)
    s = p.spectral_radius ** 0.5
    u, v = u * s, v * s
    ref = prekernel_polynomial(p, u, v)
    assert PrekernelEvaluator(p)(u, v) == pytest.approx(ref, rel=1e-9, abs=1e-12 * abs(ref) + 1e-300)


@given(n=st.integers(1, 3), N=st.integers(1, 40), u=upper, v=upper)
def test_prekernel_exactly_antisymmetric(n, N, u, v):
    ev = PrekernelEvaluator(EnsembleParams(n, 0.5, N))
    assert ev(u, v) == -ev(v, u)
    assert ev(u, u) == 0


def test_prekernel_scaled_stays_finite_at_large_N():
    p = EnsembleParams(3, 125.0, 100)
    ev = PrekernelEvaluator(p)
    z = 0.7 * p.spectral_radius * np.exp(0.4j)
    mant, scale = ev.scaled(z, np.conj(z))
    assert np.isfinite(mant) and scale < -709  # plain product would underflow
    assert 0 < density_R1(p, z, ev) < np.inf


def test_prekernel_overflow_raises():
    p = EnsembleParams(1, 0.0, 100)
    ev = PrekernelEvaluator(p)
    z = 60 * np.exp(0.4j)
    assert ev.scaled(z, np.conj(z))[1] > 709
    with pytest.raises(NumericalError):
        ev(z, np.conj(z))
    assert density_R1(p, z, ev) == 0.0  # far outside the support, underflows to zero


# ---- correlation functions ------------------------------------------------------


@given(z=upper)
def test_R1_N1_closed_form(z):
    # n = 1, m = 0, N = 1: R_1 = (4/pi) y^2 exp(-|z|^2)
    p = EnsembleParams(1, 0.0, 1)
    assert density_R1(p, z) == pytest.approx(4 / np.pi * z.imag**2 * np.exp(-abs(z) ** 2), rel=1e-12)


def test_R1_N2_against_jpdf_marginal():
    # integrate the second eigenvalue out of the n = 1 joint density (Gauss-Hermite in x and y)
    p = EnsembleParams(1, 0.0, 2)
    t, w = np.polynomial.hermite.hermgauss(50)
    X, Y = np.meshgrid(t, t, indexing="ij")
    z2 = (X + 1j * Y).ravel()
    w2 = np.outer(w, w).ravel() * np.exp(np.abs(z2) ** 2)
    for z1 in (0.3 + 0.7j, -1.2 + 0.2j, 0.1 + 2.0j):
        marg = sum(wi * jpdf(p, [z1, zz]) for wi, zz in zip(w2, z2))
        assert marginal_Rk_from_jpdf_factor(p, 1) * marg == pytest.approx(density_R1(p, z1), rel=1e-9)


@pytest.mark.parametrize("n,m", [(1, 0.0), (2, 0.0), (2, 1.0), (3, 0.5)])
def test_RN_equals_normalized_jpdf(n, m):
    # k = N needs no integration: R_N = 2^N N! jpdf / Z
    p = EnsembleParams(n, m, 3)
    zs = [0.4 + 0.9j, -1.1 + 0.3j, 0.7 + 1.6j]
    ref = 2**3 * 6 * jpdf(p, zs) / np.exp(log_partition_function(p))
    assert correlation_Rk(p, zs) == pytest.approx(ref, rel=1e-10)


@given(a=upper, b=upper, c=upper)
def test_R3_permutation_symmetric(a, b, c):
    p = EnsembleParams(2, 1.0, 6)
    ev = PrekernelEvaluator(p)
    ref = correlation_Rk(p, [a, b, c], ev, log=True)
    # clustered points near the origin make the Pfaffian cancel; 1e-6 relative is what survives
    assert correlation_Rk(p, [c, a, b], ev, log=True) == pytest.approx(ref, abs=1e-6)
    assert correlation_Rk(p, [np.conj(b), a, c], ev, log=True) == pytest.approx(ref, abs=1e-6)


def test_coincident_points_give_zero():
    p = EnsembleParams(2, 1.0, 6)
    assert correlation_Rk(p, [1j, 1j, 0.5j]) == 0.0
    assert correlation_Rk(p, [1 + 1j, 1 - 1j]) == 0.0


@given(z=upper)
def test_pfaffian_k1_equals_density(z):
    p = EnsembleParams(3, 1.0, 8)
    ev = PrekernelEvaluator(p)
    assert correlation_Rk(p, [z * 4], ev) == pytest.approx(density_R1(p, z * 4, ev), rel=1e-10)


def test_R2_factorizes_far_apart():
    p = EnsembleParams(1, 0.0, 30)
    ev = PrekernelEvaluator(p)
    a, b = 3.0 + 2.0j, -4.0 + 3.0j
    assert correlation_Rk(p, [a, b], ev) == pytest.approx(density_R1(p, a, ev) * density_R1(p, b, ev), rel=1e-6)


def test_R2_repulsion_at_coincidence():
    p = EnsembleParams(1, 0.0, 10)
    ev = PrekernelEvaluator(p)
    a = 1.0 + 1.5j
    assert correlation_Rk(p, [a, a + 1e-3], ev) < 1e-4 * density_R1(p, a, ev) ** 2


def test_real_axis_and_point_set():
    p = EnsembleParams(1, 0.0, 4)
    assert CorrelationPointSet((1.0, 0.5j)).on_real_axis
    assert correlation_Rk(p, [1.0, 0.5 + 0.5j]) == 0.0
    assert density_R1(p, 2.0) == 0.0
    with pytest.raises(UsageError):
        CorrelationPointSet(())
    with pytest.raises(DomainError):
        CorrelationPointSet((complex(np.nan, 1),))


def test_jpdf_wrong_size():
    with pytest.raises(UsageError):
        jpdf(EnsembleParams(1, 0.0, 2), [1j])


def test_integrity_error_is_numerical():
    assert issubclass(IntegrityError, NumericalError)
