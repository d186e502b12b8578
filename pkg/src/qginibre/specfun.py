"""Scalar special functions: complex log-gamma, erfc, the Meijer G-function
G^{n,0}_{0,n}(x | m, ..., m), its large-argument form, and 1F2n.

The Meijer G-function is evaluated from its Mellin-Barnes representation

    G(x) = 1/(2 pi i) * int Gamma(s + m)^n x^(-s) ds,

integrated along the vertical line Re(s + m) = a. By default a is put at the
real saddle point of the integrand, n * digamma(a) = log(x), where the
integrand has no oscillation near the real axis and its modulus along the line
is maximal at Im s = 0. The integral is then a positive, bell-shaped quantity
and the result keeps full relative accuracy even when G itself is far below
the smallest double (the radial densities at N ~ 100 need log G ~ -1000).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from qginibre.errors import DomainError, NumericalError

__all__ = [
    "MellinBarnesConfig",
    "log_gamma_complex",
    "gamma_complex",
    "erfc",
    "log_meijer_g",
    "log_meijer_g_contour",
    "meijer_g",
    "log_meijer_g_asymptotic",
    "meijer_g_asymptotic",
    "log_hyp_1_f_2n",
    "hyp_1_f_2n",
]


@dataclass(frozen=True)
class MellinBarnesConfig:
    """Quadrature settings for :func:`meijer_g`.

    ``contour_abscissa`` is Re s of the integration line; ``None`` selects the
    saddle point for each argument. ``step`` and ``truncation`` are the initial
    node spacing and cutoff, both measured in units of the Gaussian width of
    the integrand around Im s = 0. The step is halved, and the cutoff doubled,
    until ``rel_tol`` is met.
    """

    contour_abscissa: Optional[float] = None
    truncation: float = 8.0
    step: float = 0.5
    rel_tol: float = 1e-10
    max_halvings: int = 12
    max_doublings: int = 12

    def __post_init__(self):
        if not self.step > 0 or not self.truncation > 0:
            raise DomainError("step and truncation must be positive")
        if not 0 < self.rel_tol < 1:
            raise DomainError("rel_tol must lie in (0, 1)")

    def check_abscissa(self, m):
        if self.contour_abscissa is not None and not self.contour_abscissa > -m:
            raise DomainError(
                f"contour_abscissa={self.contour_abscissa} must lie right of the pole at s={-m}"
            )


DEFAULT_MB = MellinBarnesConfig()


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(np.ravel(value)[0])
    return value


def log_gamma_complex(s):
    """Principal branch of log Gamma(s) for complex ``s`` (array friendly)."""
    s = np.asarray(s, dtype=complex)
    pole = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(pole):
        raise DomainError("log_gamma_complex: pole at a non-positive integer")
    out = special.loggamma(s)
    return complex(out) if out.ndim == 0 else out


def gamma_complex(s):
    out = np.exp(log_gamma_complex(s))
    return complex(out) if np.ndim(out) == 0 else out


def erfc(x):
    """Complementary error function, accepting +/-inf."""
    out = special.erfc(np.asarray(x, dtype=float))
    return _scalar_or_array(out, x)


def _inverse_digamma(y):
    # Newton on digamma(a) = y; starting point from Minka's fixed-point note.
    y = np.asarray(y, dtype=float)
    a = np.where(y >= -2.22, np.exp(np.minimum(y, 700.0)) + 0.5, -1.0 / (y - special.digamma(1.0)))
    for _ in range(60):
        step = (special.digamma(a) - y) / special.polygamma(1, a)
        a_new = a - step
        a_new = np.where(a_new <= 0, a / 2, a_new)
        if np.all(np.abs(a_new - a) <= 1e-15 * np.abs(a)):
            a = a_new
            break
        a = a_new
    return a


def _integrand_re(n, a, sigma, logx, tau, lg_a):
    t = sigma[:, None] * tau[None, :]
    lf = n * (special.loggamma(a[:, None] + 1j * t) - lg_a[:, None]) - 1j * t * logx[:, None]
    return np.exp(lf).real


def _validate(n, m, x):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)) or np.any(~np.isfinite(xa)):
        raise DomainError("meijer_g requires finite x > 0")
    return int(n), xa


def log_meijer_g_contour(n, m, x, cfg=DEFAULT_MB):
    """log G from the Mellin-Barnes integral, for any n (no closed-form shortcut)."""
    n, xa = _validate(n, m, x)
    cfg.check_abscissa(m)
    logx = np.log(xa)
    if cfg.contour_abscissa is None:
        a = _inverse_digamma(logx / n)
    else:
        a = np.full_like(xa, cfg.contour_abscissa + m)
    sigma = 1.0 / np.sqrt(n * special.polygamma(1, a))
    lg_a = special.gammaln(a)
    base = n * lg_a - (a - m) * logx

    # Cutoff: |Gamma(a + it)| decreases monotonically in t for a > 0.
    tail_log = np.log(cfg.rel_tol) - 8.0
    T = cfg.truncation
    for _ in range(cfg.max_doublings):
        edge = n * (special.loggamma(a + 1j * sigma * T).real - lg_a)
        if np.all(edge < tail_log):
            break
        T *= 2
    else:
        raise NumericalError("meijer_g: integrand tail does not decay", estimate=float(np.max(np.exp(edge))))

    def trapezoid(h):
        tau = np.arange(1, int(np.ceil(T / h)) + 1) * h
        body = _integrand_re(n, a, sigma, logx, tau, lg_a).sum(axis=1)
        return sigma * h / np.pi * (0.5 + body)

    h = cfg.step
    prev = trapezoid(h)
    diff = np.inf
    for _ in range(cfg.max_halvings):
        h /= 2
        cur = trapezoid(h)
        diff = np.abs(cur - prev) / np.abs(cur)
        if np.all(diff <= cfg.rel_tol):
            break
        prev = cur
    else:
        raise NumericalError(
            f"meijer_g: quadrature did not converge (rel diff {np.max(diff):.3e})",
            estimate=float(np.max(diff)),
        )
    if np.any(cur <= 0):
        raise NumericalError("meijer_g: non-positive quadrature value", estimate=float(np.min(cur)))
    return _scalar_or_array(base + np.log(cur), x)


def log_meijer_g(n, m, x, cfg=DEFAULT_MB):
    """log G^{n,0}_{0,n}(- ; m, ..., m ; x) for x > 0.

    Vectorized over ``x``. For n == 1 the closed form m*log(x) - x is used.
    Raises :class:`NumericalError` (carrying the last difference estimate)
    if successive refinements do not agree to ``cfg.rel_tol``.
    """
    n, xa = _validate(n, m, x)
    if n == 1:
        return _scalar_or_array(m * np.log(xa) - xa, x)
    return log_meijer_g_contour(n, m, x, cfg)


def meijer_g(n, m, x, cfg=DEFAULT_MB):
    """G^{n,0}_{0,n}(- ; m, ..., m ; x); underflows to 0 where log G < -745."""
    out = np.exp(log_meijer_g(n, m, x, cfg))
    return _scalar_or_array(out, x)


def log_meijer_g_asymptotic(n, m, r):
    """Logarithm of the large-argument form of G^{n,0}_{0,n}(- ; m...m ; r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("meijer_g_asymptotic requires r > 0")
    logr = np.log(r)
    out = (
        0.5 * (n - 1) * np.log(2 * np.pi)
        - 0.5 * np.log(n)
        + ((1.0 - n) / n + 2.0 * m) * logr
        - n * np.exp(2.0 * logr / n)
    )
    return _scalar_or_array(out, r)


def meijer_g_asymptotic(n, m, r):
    """((2 pi)^((n-1)/2) / sqrt(n)) r^((1-n)/n) r^(2m) exp(-n r^(2/n)).

    Approximates ``meijer_g(n, m, r**2)`` for r >> 1; exact for n == 1.
    """
    out = np.exp(log_meijer_g_asymptotic(n, m, r))
    return _scalar_or_array(out, r)


def _log_hyp_scalar(n, m, y, max_terms):
    if y == 0:
        return 0.0
    b1 = (m + 2) / 2.0
    b2 = (m + 3) / 2.0
    # Term ratio y / ((b1 + k)(b2 + k))^n falls below one near k ~ y^(1/(2n)).
    K = int(np.exp(np.log(y) / (2 * n))) + 64
    while True:
        K = min(K, max_terms)
        k = np.arange(K - 1, dtype=float)
        log_ratio = np.log(y) - n * (np.log(b1 + k) + np.log(b2 + k))
        log_terms = np.concatenate(([0.0], np.cumsum(log_ratio)))
        total = special.logsumexp(log_terms)
        if log_ratio[-1] < 0 and log_terms[-1] - total < np.log(1e-15) - 2:
            return float(total)
        if K == max_terms:
            raise NumericalError(f"1F{2 * n} series not converged after {max_terms} terms")
        K *= 2


def log_hyp_1_f_2n(n, m, y, max_terms=10_000):
    """log 1F2n(1; (m+2)/2 [n times], (m+3)/2 [n times]; y) for y >= 0."""
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya >= 0)):
        raise DomainError("hyp_1_f_2n requires y >= 0")
    out = np.vectorize(lambda v: _log_hyp_scalar(int(n), float(m), float(v), max_terms))(ya)
    return _scalar_or_array(out, y)


def hyp_1_f_2n(n, m, y, max_terms=10_000):
    out = np.exp(log_hyp_1_f_2n(n, m, y, max_terms))
    return _scalar_or_array(out, y)
