"""Ensemble parameters, radial moments and the skew-orthogonal polynomial basis.

The weight of the product ensemble is rotation invariant, so the moments

    int d^2z w(z) z^k conj(z)^l = s_k delta_{kl},   s_k = (pi Gamma(m+k+1))^n,

reduce every skew product of polynomials to finite moment algebra. All
Gamma-heavy quantities are kept as logarithms; Gamma(m+2k+2)^n leaves the
double range around k ~ 85/n.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from qginibre.errors import DomainError, UsageError

LOG_PI = float(np.log(np.pi))


@dataclass(frozen=True)
class EnsembleParams:
    """Product of ``n`` independent induced quaternion Ginibre matrices of
    quaternion dimension ``N`` (each factor is 2N x 2N complex) with induced
    exponent ``m``."""

    n: int
    m: float
    N: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        if not (self.m >= 0 and np.isfinite(self.m)):
            raise DomainError(f"m must be a finite non-negative number, got {self.m}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "m", float(self.m))

    @property
    def spectral_radius(self):
        """Large-N outer edge (m + 2N)^(n/2)."""
        return (self.m + 2 * self.N) ** (self.n / 2)


def log_moment_s(params, k):
    """log s_k with s_k = 2 pi int_0^inf w(r) r^(2k+1) dr = (pi Gamma(m+k+1))^n."""
    k = np.asarray(k)
    if np.any(k < 0):
        raise DomainError("moment index must be non-negative")
    out = params.n * (LOG_PI + gammaln(params.m + k + 1.0))
    return float(out) if out.ndim == 0 else out


def log_h(params, k):
    """log h_k, h_k = (pi Gamma(m+2k+2))^n / 2."""
    k = np.asarray(k)
    if np.any(k < 0):
        raise DomainError("index must be non-negative")
    out = params.n * (LOG_PI + gammaln(params.m + 2.0 * k + 2.0)) - np.log(2.0)
    return float(out) if out.ndim == 0 else out


def log_partition_function(params):
    """log Z_N for the jpdf with constant 1/4: Z_N = N! 4^(N-1) prod_k h_k."""
    ks = np.arange(params.N)
    return float(gammaln(params.N + 1.0) + (params.N - 1) * np.log(4.0) + np.sum(log_h(params, ks)))


@dataclass(frozen=True)
class SkewPolyBasis:
    """Monic skew-orthogonal polynomials p_0 .. p_{2K+1}.

    ``even_coeffs[k][l]`` is the log of the coefficient of z^(2l) in p_{2k};
    odd polynomials are p_{2k+1}(z) = z^(2k+1).
    """

    params: EnsembleParams
    max_index: int
    even_coeffs: tuple = field(repr=False)
    log_h: np.ndarray = field(repr=False)

    @property
    def max_degree(self):
        return 2 * self.max_index + 1

    def coefficients(self, degree):
        """Linear-scale coefficient vector (ascending powers of z) of p_degree."""
        self._check(degree)
        out = np.zeros(degree + 1)
        if degree % 2:
            out[degree] = 1.0
        else:
            out[0::2] = np.exp(self.even_coeffs[degree // 2])
        return out

    def _check(self, degree):
        if int(degree) != degree or not 0 <= degree <= self.max_degree:
            raise UsageError(f"degree {degree} outside basis range 0..{self.max_degree}")


def build_basis(params, K):
    """Skew-orthogonal basis up to p_{2K+1}.

    Coefficients follow from c_{2j-2} / c_{2j} = (m + 2j)^n with c_{2k} = 1,
    i.e. log c_{2l} of p_{2k} is sum_{j=l+1}^{k} n log(m + 2j).
    """
    if int(K) != K or K < 0:
        raise DomainError(f"K must be a non-negative integer, got {K}")
    K = int(K)
    # step[j] = n log(m + 2j) for j = 1..K; suffix sums give the coefficients
    step = params.n * np.log(params.m + 2.0 * np.arange(1, K + 1))
    cum = np.concatenate(([0.0], np.cumsum(step)))
    even = tuple(cum[k] - cum[: k + 1] for k in range(K + 1))
    return SkewPolyBasis(params, K, even, log_h(params, np.arange(K + 1)))


def eval_poly(basis, degree, z):
    """p_degree(z) by Horner's rule in z^2 (array friendly in ``z``)."""
    basis._check(degree)
    z = np.asarray(z, dtype=complex)
    if degree % 2:
        out = z**degree
    else:
        coeffs = np.exp(basis.even_coeffs[degree // 2])
        z2 = z * z
        out = np.zeros_like(z)
        for c in coeffs[::-1]:
            out = out * z2 + c
    return complex(out) if out.ndim == 0 else out


def skew_product_monomials(params, a, b):
    """<z^a | z^b>_S = (s_{b+1} [a = b+1] - s_{a+1} [b = a+1]) / 2."""
    if a < 0 or b < 0:
        raise DomainError("monomial degrees must be non-negative")
    if a == b + 1:
        return 0.5 * np.exp(log_moment_s(params, b + 1))
    if b == a + 1:
        return -0.5 * np.exp(log_moment_s(params, a + 1))
    return 0.0


def log_skew_product_monomials(params, a, b):
    """(sign, log|value|) companion of :func:`skew_product_monomials`."""
    if a == b + 1:
        return 1.0, log_moment_s(params, b + 1) - np.log(2.0)
    if b == a + 1:
        return -1.0, log_moment_s(params, a + 1) - np.log(2.0)
    return 0.0, -np.inf


def skew_product_polys(params, p, q, scale=None, return_magnitude=False):
    """Bilinear antisymmetric extension to coefficient lists (ascending powers).

    Only adjacent-degree pairs contribute. ``scale`` optionally divides every
    moment by exp(scale), which keeps large-degree products finite; the
    function then returns the scaled value. With ``return_magnitude`` the sum
    of absolute contributions is returned as well, the natural yardstick for
    deciding whether a cancelled result is zero.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    top = max(len(p), len(q)) + 1
    shift = 0.0 if scale is None else scale
    s = np.exp(log_moment_s(params, np.arange(top)) - shift)
    total = 0.0
    mag = 0.0
    # a = b + 1 terms: p_a q_b s_{b+1} / 2;  b = a + 1 terms: -p_a q_b s_{a+1} / 2
    for b in range(len(q)):
        if b + 1 < len(p):
            total += p[b + 1] * q[b] * s[b + 1]
            mag += abs(p[b + 1] * q[b] * s[b + 1])
    for a in range(len(p)):
        if a + 1 < len(q):
            total -= p[a] * q[a + 1] * s[a + 1]
            mag += abs(p[a] * q[a + 1] * s[a + 1])
    if return_magnitude:
        return 0.5 * total, 0.5 * mag
    return 0.5 * total


def coefficient_ratio_from_moments(params, j):
    """c_{2j-2} / c_{2j} from the moment-integral recursion: s_{2j} / s_{2j-1}."""
    if j < 1:
        raise DomainError("recursion index starts at 1")
    return float(np.exp(log_moment_s(params, 2 * j) - log_moment_s(params, 2 * j - 1)))
