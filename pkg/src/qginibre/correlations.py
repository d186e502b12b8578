"""Weight, prekernel, Pfaffian and k-point correlation functions at finite N.

Correlation functions here count all 2N eigenvalues (each conjugate pair
contributes both members) and are normalized so that int R_1 d^2z = 2N:

    R_k(z_1..z_k) = prod_h [ w(z_h) (conj(z_h) - z_h) / 2 ] * Pf[ kappa(x_a, x_b) ],

with x = (z_1, conj z_1, z_2, conj z_2, ...). The factor 1/2 per point is what
makes the Pfaffian form agree with the phase-averaged radial density and with
brute-force marginals of the joint density.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from qginibre import specfun
from qginibre.ensemble import LOG_PI, build_basis, eval_poly, log_partition_function
from qginibre.errors import DomainError, IntegrityError, NumericalError, UsageError

__all__ = [
    "log_weight",
    "weight",
    "PrekernelEvaluator",
    "prekernel",
    "prekernel_polynomial",
    "density_R1",
    "log_density_R1",
    "pfaffian",
    "pfaffian_expansion",
    "CorrelationPointSet",
    "correlation_Rk",
    "jpdf",
    "log_jpdf",
]

IMAG_RESIDUE_TOL = 1e-8


def log_weight(params, z, cfg=specfun.DEFAULT_MB):
    """log w(z) with w(z) = pi^(n-1) G^{n,0}_{0,n}(- ; m..m ; |z|^2)."""
    r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    flat = np.atleast_1d(r2).astype(float)
    out = np.empty_like(flat)
    zero = flat == 0
    if np.any(zero):
        if params.n >= 2 and params.m == 0:
            raise DomainError("weight diverges at the origin for n >= 2, m = 0")
        out[zero] = 0.0 if params.m == 0 else -np.inf
    if np.any(~zero):
        out[~zero] = (params.n - 1) * LOG_PI + specfun.log_meijer_g(params.n, params.m, flat[~zero], cfg)
    return float(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def weight(params, z, cfg=specfun.DEFAULT_MB):
    out = np.exp(log_weight(params, z, cfg))
    return float(out) if np.ndim(out) == 0 else out


class PrekernelEvaluator:
    """kappa_N(u, v) from the explicit double sum

        kappa = 2/(pi Gamma(m+1))^n sum_{k<N} sum_{l<=k}
                [ u^(2k+1)/A_k * v^(2l)/B_l - (u <-> v) ],
        A_k = prod_{j=0}^k (m+2j+1)^n,  B_l = prod_{j=1}^l (m+2j)^n.

    With S_k(v) = sum_{l<=k} v^(2l)/B_l the double sum is a single pass over k.
    Each per-point sequence is scaled by its largest modulus, so results come
    back as (mantissa, log_scale) and stay finite at N in the hundreds.
    """

    def __init__(self, params):
        self.params = params
        n, m, N = params.n, params.m, params.N
        k = np.arange(N)
        self._odd_pow = 2.0 * k + 1.0
        self._even_pow = 2.0 * k
        self._log_A = n * np.cumsum(np.log(m + 2.0 * k + 1.0))
        self._log_B = np.concatenate(([0.0], n * np.cumsum(np.log(m + 2.0 * k[1:]))))
        self.log_const = np.log(2.0) - n * (LOG_PI + gammaln(m + 1.0))

    def _parts(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(np.abs(x))[:, None]
            rb = self._even_pow * lr
        rb[:, 0] = 0.0  # v^0 = 1, also at v = 0
        rb -= self._log_B
        th = np.angle(x)[:, None]
        ra = self._odd_pow * lr - self._log_A
        Ma = ra.max(axis=1)
        Ma = np.where(np.isfinite(Ma), Ma, 0.0)
        Mb = rb.max(axis=1)
        A = np.exp(ra - Ma[:, None] + 1j * self._odd_pow * th)
        S = np.cumsum(np.exp(rb - Mb[:, None] + 1j * self._even_pow * th), axis=1)
        return A, Ma, S, Mb

    def point_scale(self, x):
        """Per-point log scale s(x) with kappa(x_a, x_b) ~ exp(s_a + s_b)."""
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        _, Ma, _, Mb = self._parts(x)
        return 0.5 * (Ma + Mb + self.log_const)

    def scaled(self, u, v):
        """Return (mantissa, log_scale) with kappa(u, v) = mantissa * exp(log_scale)."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex))
        shape = u.shape
        u = u.ravel()
        v = v.ravel()
        Au, Mau, Su, Mbu = self._parts(u)
        Av, Mav, Sv, Mbv = self._parts(v)
        T1 = np.sum(Au * Sv, axis=1)
        T2 = np.sum(Av * Su, axis=1)
        M1 = Mau + Mbv
        M2 = Mav + Mbu
        M = np.maximum(M1, M2)
        mant = T1 * np.exp(M1 - M) - T2 * np.exp(M2 - M)
        return mant.reshape(shape), (M + self.log_const).reshape(shape)

    def __call__(self, u, v):
        mant, scale = self.scaled(u, v)
        if np.any(scale > 700):
            with np.errstate(divide="ignore"):
                big = np.log(np.abs(mant)) + scale
            if np.any(big > 709):
                raise NumericalError("prekernel value exceeds the double range; use .scaled()")
        out = mant * np.exp(scale)
        return complex(out) if out.ndim == 0 else out


def prekernel(ev, u, v):
    """kappa_N(u, v) through a :class:`PrekernelEvaluator`."""
    return ev(u, v)


def prekernel_polynomial(params, u, v):
    """kappa_N(u, v) = sum_k [p_{2k+1}(u) p_{2k}(v) - p_{2k+1}(v) p_{2k}(u)] / h_k.

    Direct evaluation from the polynomial basis; intended for moderate N
    (no rescaling) and used as a cross-check of :class:`PrekernelEvaluator`.
    """
    basis = build_basis(params, params.N - 1)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    total = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    for k in range(params.N):
        num = eval_poly(basis, 2 * k + 1, u) * eval_poly(basis, 2 * k, v) - eval_poly(
            basis, 2 * k + 1, v
        ) * eval_poly(basis, 2 * k, u)
        total = total + num / np.exp(basis.log_h[k])
    return complex(total) if total.ndim == 0 else total


def log_density_R1(params, z, ev=None, cfg=specfun.DEFAULT_MB):
    """log R_1(z); -inf on the real axis."""
    z = np.asarray(z, dtype=complex)
    ev = ev or PrekernelEvaluator(params)
    mant, scale = ev.scaled(z, np.conj(z))
    core = (0.5 * (np.conj(z) - z) * mant).real
    lw = log_weight(params, z, cfg)
    with np.errstate(divide="ignore"):
        out = np.where(core > 0, np.log(np.maximum(core, 1e-300)) + scale + lw, -np.inf)
    return float(out) if out.ndim == 0 else out


def density_R1(params, z, ev=None, cfg=specfun.DEFAULT_MB):
    """One-point function R_1(z) = w(z) (conj z - z) kappa_N(z, conj z) / 2."""
    out = np.exp(log_density_R1(params, z, ev, cfg))
    return float(out) if np.ndim(out) == 0 else out


def _check_antisymmetric(A, tol=1e-10):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError("pfaffian needs a square matrix")
    if A.shape[0] % 2:
        raise UsageError("pfaffian needs an even dimension")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale and np.max(np.abs(A + A.T)) > tol * scale:
        raise UsageError("matrix is not antisymmetric")
    return 0.5 * (A - A.T)


def pfaffian(A):
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Skew-symmetric Gaussian elimination (Parlett-Reid) with partial pivoting:
    A = P L T L^T P^T with T tridiagonal, Pf(A) = det(P) * prod T_{2i,2i+1}.
    """
    A = _check_antisymmetric(A).astype(complex)
    dim = A.shape[0]
    pf = 1.0 + 0.0j
    for k in range(0, dim - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0:
            return 0.0 + 0.0j
        pf *= A[k, k + 1]
        if k + 2 < dim:
            tau = A[k, k + 2 :] / A[k, k + 1]
            col = A[k + 2 :, k + 1].copy()
            A[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def pfaffian_expansion(A):
    """Pfaffian by expansion along the first row; O(dim!!), for checks only."""
    A = _check_antisymmetric(A)
    dim = A.shape[0]
    if dim == 0:
        return 1.0
    total = 0.0
    rest = list(range(1, dim))
    for pos, j in enumerate(rest):
        if A[0, j] == 0:
            continue
        keep = [i for i in rest if i != j]
        total += (-1) ** pos * A[0, j] * pfaffian_expansion(A[np.ix_(keep, keep)])
    return total


@dataclass(frozen=True)
class CorrelationPointSet:
    points: tuple

    def __post_init__(self):
        pts = tuple(complex(p) for p in np.atleast_1d(self.points))
        if not pts:
            raise UsageError("need at least one point")
        if not all(np.isfinite(p.real) and np.isfinite(p.imag) for p in pts):
            raise DomainError("correlation points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def k(self):
        return len(self.points)

    @property
    def on_real_axis(self):
        """True if some point is real, where R_k vanishes identically."""
        return any(p.imag == 0 for p in self.points)


def _log_Rk(params, pts, ev, cfg):
    z = np.asarray(pts.points, dtype=complex)
    x = np.empty(2 * len(z), dtype=complex)
    x[0::2] = z
    x[1::2] = np.conj(z)
    mant, scale = ev.scaled(x[:, None], x[None, :])
    s = ev.point_scale(x)
    A = mant * np.exp(scale - s[:, None] - s[None, :])
    if np.max(np.abs(A + A.T)) > 1e-12 * max(np.max(np.abs(A)), 1e-300):
        raise IntegrityError("assembled prekernel matrix is not antisymmetric")
    pf = pfaffian(A)
    # coincident points: the Pfaffian is zero up to rounding of its entries
    if abs(pf) <= 1e-12 * max(np.max(np.abs(A)), 1e-300) ** len(z):
        return -np.inf
    val = pf * np.prod(0.5 * (np.conj(z) - z))
    if abs(val) == 0:
        return -np.inf
    if abs(val.imag) > IMAG_RESIDUE_TOL * abs(val):
        raise IntegrityError(f"R_k has imaginary residue {abs(val.imag) / abs(val):.2e}")
    if val.real < 0:
        if abs(val.real) <= 1e-12 * np.max(np.abs(A)) ** len(z):
            return -np.inf
        raise IntegrityError("R_k came out negative")
    return float(np.log(val.real) + np.sum(s) + np.sum(log_weight(params, z, cfg)))


def correlation_Rk(params, pts, ev=None, cfg=specfun.DEFAULT_MB, log=False):
    """k-point correlation function via the Pfaffian of the prekernel matrix."""
    if not isinstance(pts, CorrelationPointSet):
        pts = CorrelationPointSet(tuple(pts))
    ev = ev or PrekernelEvaluator(params)
    out = _log_Rk(params, pts, ev, cfg)
    return out if log else float(np.exp(out))


def log_jpdf(params, zs, cfg=specfun.DEFAULT_MB):
    """log of the unnormalized joint density with constant 1/4."""
    z = np.asarray(zs, dtype=complex).ravel()
    if z.size != params.N:
        raise UsageError(f"jpdf needs exactly N={params.N} points, got {z.size}")
    with np.errstate(divide="ignore"):
        out = np.log(0.25) + np.sum(log_weight(params, z, cfg)) + np.sum(2 * np.log(np.abs(z - np.conj(z))))
        for a in range(1, z.size):
            d = z[:a]
            out += np.sum(2 * np.log(np.abs(d - z[a])) + 2 * np.log(np.abs(d - np.conj(z[a]))))
    return float(out)


def jpdf(params, zs, cfg=specfun.DEFAULT_MB):
    """(1/4) prod_c w(z_c) |z_c - conj z_c|^2 prod_{a>b} |z_b - z_a|^2 |z_b - conj z_a|^2.

    Unnormalized; divide by exp(log_partition_function(params)) for a
    probability density. Underflows quickly with N.
    """
    return float(np.exp(log_jpdf(params, zs, cfg)))


def marginal_Rk_from_jpdf_factor(params, k):
    """Constant c with R_k = c * int prod_{h>k} d^2z_h jpdf, for all 2N eigenvalues."""
    if not 1 <= k <= params.N:
        raise UsageError("k must lie in 1..N")
    log_c = k * np.log(2.0) + gammaln(params.N + 1.0) - gammaln(params.N - k + 1.0)
    return float(np.exp(log_c - log_partition_function(params)))
