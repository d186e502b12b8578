"""Monte Carlo ground truth for the product ensemble at m = 0.

Each factor is a quaternion Ginibre matrix stored as the pair (u, v) of
N x N complex arrays and expanded to the 2N x 2N block form
[[u, -conj v], [v, conj u]]. Entries have E|u|^2 = E|v|^2 = 1, the variance
for which the eigenvalue weight of a single factor is exp(-|z|^2).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from qginibre import radial
from qginibre.ensemble import EnsembleParams
from qginibre.errors import DomainError, IntegrityError, NumericalError, UsageError

PAIRING_TOL = 1e-6
DET_TOL = 1e-8
ENTRY_VARIANCE = 1.0


@dataclass(frozen=True)
class QuaternionMatrix:
    u: np.ndarray
    v: np.ndarray

    @property
    def N(self):
        return self.u.shape[0]

    def expand(self):
        N = self.N
        M = np.empty((2 * N, 2 * N), dtype=complex)
        M[0::2, 0::2] = self.u
        M[0::2, 1::2] = -np.conj(self.v)
        M[1::2, 0::2] = self.v
        M[1::2, 1::2] = np.conj(self.u)
        return M


def _complex_gaussian(rng, shape):
    return rng.normal(scale=np.sqrt(ENTRY_VARIANCE / 2), size=shape + (2,)).view(complex)[..., 0]


def sample_factor(N, rng):
    """One quaternion Ginibre factor; real and imaginary parts have variance 1/2."""
    if N < 1:
        raise DomainError("N must be positive")
    return QuaternionMatrix(_complex_gaussian(rng, (N, N)), _complex_gaussian(rng, (N, N)))


def eigenvalues_dense(M):
    """All eigenvalues of a square complex matrix (LAPACK zgeev via numpy)."""
    M = np.asarray(M, dtype=complex)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise UsageError("eigenvalues_dense needs square matrices")
    if not np.all(np.isfinite(M)):
        raise UsageError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from None


@dataclass(frozen=True)
class EigenvalueSample:
    """Upper-half-plane representatives of one product spectrum."""

    params: EnsembleParams
    eigenvalues: np.ndarray = field(repr=False)
    pairing_residual: float
    det_residual: float
    seed: Optional[int] = None
    draw_index: int = 0
    flagged_real: bool = False


def _representatives(eigs, log_abs_det, params, seed, draw_index):
    N = params.N
    radius = max(np.max(np.abs(eigs)), np.finfo(float).tiny)
    order = np.argsort(-eigs.imag, kind="stable")
    upper, lower = eigs[order[:N]], eigs[order[N:]]
    cost = np.abs(upper[:, None] - np.conj(lower)[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairing = float(np.max(cost[rows, cols]) / radius)
    if pairing > PAIRING_TOL:
        raise IntegrityError(f"draw {draw_index}: conjugate pairing residual {pairing:.2e}")
    flagged = bool(np.any(np.abs(upper.imag) <= PAIRING_TOL * radius))
    reps = np.where(upper.imag >= 0, upper, np.conj(upper))
    reps = reps[np.lexsort((reps.imag, reps.real))]
    det_res = float(abs(np.expm1(2 * np.sum(np.log(np.abs(reps))) - log_abs_det)))
    if det_res > DET_TOL:
        raise IntegrityError(f"draw {draw_index}: determinant mismatch {det_res:.2e}")
    return EigenvalueSample(params, reps, pairing, det_res, seed, draw_index, flagged)


def _check_params(params):
    if params.m != 0:
        raise DomainError("the sampler only covers m = 0 (no induced construction)")


def product_eigenvalues(params, rng, seed=None, draw_index=0):
    """Draw X_1 ... X_n and return the conjugate-pair representatives of the product."""
    _check_params(params)
    P = np.eye(2 * params.N, dtype=complex)
    log_abs_det = 0.0
    for _ in range(params.n):
        X = sample_factor(params.N, rng).expand()
        log_abs_det += np.linalg.slogdet(X)[1]
        P = P @ X
    return _representatives(eigenvalues_dense(P), log_abs_det, params, seed, draw_index)


def _draw_chunk(params, seed, indices):
    children = np.random.SeedSequence(seed).spawn(indices[-1] + 1)
    return [product_eigenvalues(params, np.random.default_rng(children[i]), seed, i) for i in indices]


def sample_spectra(params, draws, seed, workers=1, chunk=500):
    """``draws`` independent product spectra; draw i uses the i-th child of
    SeedSequence(seed), so the output does not depend on ``workers``."""
    _check_params(params)
    if draws < 1:
        raise UsageError("draws must be positive")
    chunks = [list(range(s, min(s + chunk, draws))) for s in range(0, draws, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda idx: _draw_chunk(params, seed, idx), chunks))
    else:
        parts = [_draw_chunk(params, seed, idx) for idx in chunks]
    return [s for part in parts for s in part]


@dataclass
class RadialHistogram:
    edges: np.ndarray
    counts: np.ndarray
    draws: int
    N: int
    n: int
    scaling: str
    overflow: int = 0

    @property
    def total(self):
        return int(self.counts.sum() + self.overflow)

    def density(self):
        """Implied density per bin and its Poisson standard error.

        Raw scaling estimates rho_N (2N mass); scaled estimates rho_hat (unit mass).
        """
        ring = np.pi * (self.edges[1:] ** 2 - self.edges[:-1] ** 2)
        norm = self.draws * ring / 2 if self.scaling == "raw" else self.draws * self.N * ring
        return self.counts / norm, np.sqrt(self.counts) / norm


def radial_histogram(samples, scaling="raw", bins=40, r_max=None):
    """Histogram of |z| over all representatives; ``bins`` is a count or edge array."""
    if not samples:
        raise UsageError("no samples")
    p = samples[0].params
    if any(s.params != p for s in samples):
        raise UsageError("samples mix ensemble parameters")
    if scaling not in ("raw", "scaled"):
        raise UsageError("scaling must be 'raw' or 'scaled'")
    r = np.abs(np.concatenate([s.eigenvalues for s in samples]))
    if scaling == "scaled":
        r = r / (2.0 * p.N) ** (p.n / 2)
    if np.ndim(bins) == 0:
        top = r_max if r_max is not None else 1.05 * r.max()
        edges = np.linspace(0.0, top, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, _ = np.histogram(r, bins=edges)
    overflow = int(np.sum((r >= edges[-1]) | (r < edges[0])))
    return RadialHistogram(edges, counts, len(samples), p.N, p.n, scaling, overflow)


def expected_counts(hist, params, nodes=24):
    """Analytic count per bin: draws * N * (fraction of radial mass in the bin)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = hist.edges[:-1], hist.edges[1:]
    r = 0.5 * (hi - lo)[:, None] * x[None, :] + 0.5 * (hi + lo)[:, None]
    if hist.scaling == "scaled":
        rho = radial.radial_density_scaled(radial.ScaledParams.from_ensemble(params), np.maximum(r, 1e-300))
        mass_scale = params.N
    else:
        rho = radial.radial_density(params, r)
        mass_scale = 0.5
    mass = np.sum(w[None, :] * 2 * np.pi * r * rho, axis=1) * 0.5 * (hi - lo)
    return hist.draws * mass_scale * mass


@dataclass
class ComparisonReport:
    z_scores: list
    max_abs_z: float
    chi_square: float
    dof: int
    observed: list
    expected: list

    @property
    def band(self):
        half = 4 * np.sqrt(2 * self.dof)
        return self.dof - half, self.dof + half

    @property
    def passed(self):
        lo, hi = self.band
        return self.max_abs_z <= 4 and lo <= self.chi_square <= hi


def compare_to_density(hist, params, min_expected=5.0):
    """Per-bin z-scores and chi-square of the histogram against rho_N.

    The mass beyond the last edge forms an overflow bin. Adjacent bins are
    pooled until each holds at least ``min_expected`` expected counts.
    """
    _check_params(params)
    exp_bins = expected_counts(hist, params)
    total_expected = hist.draws * params.N
    obs = list(hist.counts) + [hist.overflow]
    exp = list(exp_bins) + [max(total_expected - exp_bins.sum(), 0.0)]
    pooled_obs, pooled_exp = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0 or acc_o > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_o
            pooled_exp[-1] += acc_e
        else:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
    o = np.array(pooled_obs)
    e = np.array(pooled_exp)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(e > 0, (o - e) / np.sqrt(e), np.where(o > 0, np.inf, 0.0))
    return ComparisonReport(
        z_scores=[float(v) for v in z],
        max_abs_z=float(np.max(np.abs(z))),
        chi_square=float(np.sum(z**2)),
        dof=max(len(z) - 1, 1),
        observed=[float(v) for v in o],
        expected=[float(v) for v in e],
    )
