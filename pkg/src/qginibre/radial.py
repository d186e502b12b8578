"""Radial density of states: exact finite N, scaled, erfc asymptotics,
macroscopic annulus law and the bulk / edge / origin microscopic limits."""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from qginibre import specfun
from qginibre.ensemble import EnsembleParams
from qginibre.errors import DomainError, UsageError

MODES = ("exact", "scaled", "asymptotic", "asymptotic_edge", "macroscopic", "bulk", "edge", "origin")
MODE_ALIASES = {"macro": "macroscopic"}
LOG_SPACED_MODES = ("exact", "origin")


@dataclass(frozen=True)
class ScaledParams:
    """Strongly induced scaling m = 2N * m_hat."""

    n: int
    m_hat: float
    N: int

    def __post_init__(self):
        if not self.m_hat >= 0:
            raise DomainError(f"m_hat must be non-negative, got {self.m_hat}")
        EnsembleParams(self.n, 0.0, self.N)  # validates n, N

    @property
    def m(self):
        return 2 * self.N * self.m_hat

    @property
    def ensemble(self):
        return EnsembleParams(self.n, self.m, self.N)

    @property
    def support(self):
        """Macroscopic annulus (inner, outer) in the scaled radius."""
        return self.m_hat ** (self.n / 2), (self.m_hat + 1) ** (self.n / 2)

    @classmethod
    def from_ensemble(cls, params):
        return cls(params.n, params.m / (2 * params.N), params.N)


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _positive(r, name="r"):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError(f"{name} must be positive")
    return r


def log_radial_density(params, r, cfg=specfun.DEFAULT_MB):
    """log rho_N(r); -inf at r = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be non-negative")
    flat = np.atleast_1d(r)
    out = np.full(flat.shape, -np.inf)
    pos = flat > 0
    if np.any(pos):
        rp = flat[pos]
        k = np.arange(params.N)
        lr = np.log(rp)[:, None]
        terms = (4 * k + 2) * lr - params.n * gammaln(params.m + 2 * k + 2.0)
        out[pos] = (
            np.log(2 / np.pi)
            + specfun.log_meijer_g(params.n, params.m, rp**2, cfg)
            + logsumexp(terms, axis=1)
        )
    return _out(out.reshape(r.shape) if r.ndim else out[0], r)


def radial_density(params, r, cfg=specfun.DEFAULT_MB):
    """rho_N(r) = (2/pi) G(r^2) sum_{k<N} r^(4k+2) / Gamma(m+2k+2)^n.

    Normalized so that int_0^inf 2 pi r rho_N dr = 2N; the sum is done in
    log space.
    """
    return _out(np.exp(log_radial_density(params, r, cfg)), r)


def radial_density_scaled(sp, r_hat, cfg=specfun.DEFAULT_MB):
    """(2N)^(n-1) rho_N(r_hat (2N)^(n/2)); unit mass."""
    r_hat = np.asarray(r_hat, dtype=float)
    two_n = 2.0 * sp.N
    log_val = (sp.n - 1) * np.log(two_n) + log_radial_density(sp.ensemble, r_hat * two_n ** (sp.n / 2), cfg)
    return _out(np.exp(log_val), r_hat)


def _erfc_difference(lo, hi):
    """erfc(lo) - erfc(hi) for lo <= hi, without cancellation when both are negative."""
    both_neg = (lo < 0) & (hi < 0)
    return np.where(
        both_neg,
        specfun.erfc(-hi) - specfun.erfc(-lo),
        specfun.erfc(lo) - specfun.erfc(hi),
    )


def radial_density_asymptotic(params, r, outer_only=False):
    """Saddle-point form of rho_N in terms of a pair of erfc's.

    ``outer_only`` drops the inner-edge term, the form that applies for m of
    order one with 1 << r <~ 2N.
    """
    r = _positive(r)
    n, m, N = params.n, params.m, params.N
    pref = r ** (2.0 / n - 2.0) / (n * np.pi)
    root = r ** (1.0 / n)
    a_out = np.sqrt(n / 2) * (root**2 - (m + 2 * N)) / root
    if outer_only:
        val = 0.5 * pref * specfun.erfc(a_out)
    else:
        a_in = np.sqrt(n / 2) * (root**2 - m) / root
        val = 0.5 * pref * _erfc_difference(a_out, a_in)
    return _out(val, r)


def radial_density_asymptotic_edge(sp, r_hat):
    """Edge-linearized erfc approximation to the scaled density.

    At m_hat = 0 there is no inner edge and that term is dropped.
    """
    r_hat = _positive(r_hat, "r_hat")
    n, N = sp.n, sp.N
    pref = r_hat ** (2.0 / n - 2.0) / (n * np.pi)
    c = np.sqrt(4.0 * N / n)
    inner, outer = sp.support
    b_out = c * (r_hat - outer) / (sp.m_hat + 1) ** ((n - 1) / 2)
    if sp.m_hat > 0:
        b_in = c * (r_hat - inner) / sp.m_hat ** ((n - 1) / 2)
        diff = _erfc_difference(b_out, np.maximum(b_in, b_out))
    else:
        diff = specfun.erfc(b_out)
    return _out(0.5 * pref * diff, r_hat)


def macroscopic_density(n, m_hat, r_hat):
    """N -> infinity limit: r_hat^(2/n-2) / (n pi) on the closed annulus
    m_hat^(n/2) <= r_hat <= (m_hat+1)^(n/2), zero elsewhere."""
    r_hat = np.asarray(r_hat, dtype=float)
    if np.any(r_hat < 0):
        raise DomainError("r_hat must be non-negative")
    if n >= 2 and np.any(r_hat == 0) and m_hat == 0:
        raise DomainError("macroscopic density diverges at r_hat = 0 for n >= 2")
    inner, outer = m_hat ** (n / 2), (m_hat + 1) ** (n / 2)
    inside = (r_hat >= inner) & (r_hat <= outer)
    with np.errstate(divide="ignore", over="ignore"):
        pref = np.where(r_hat > 0, r_hat, 1.0) ** (2.0 / n - 2.0) / (n * np.pi)
    return _out(np.where(inside, pref, 0.0), r_hat)


def edge_variable(sp, r_hat, edge="outer"):
    """Signed edge coordinate; negative toward the bulk, zero at the edge."""
    r_hat = np.asarray(r_hat, dtype=float)
    n = sp.n
    c = np.sqrt(2.0 * sp.N / n)
    if edge == "outer":
        val = c * (r_hat - (sp.m_hat + 1) ** (n / 2)) / (sp.m_hat + 1) ** ((n - 1) / 2)
    elif edge == "inner":
        if sp.m_hat == 0:
            raise DomainError("no inner edge when m_hat = 0")
        val = -c * (r_hat - sp.m_hat ** (n / 2)) / sp.m_hat ** ((n - 1) / 2)
    else:
        raise UsageError(f"edge must be 'inner' or 'outer', got {edge!r}")
    return _out(val, r_hat)


def edge_radius(sp, epsilon, edge="outer"):
    """Inverse of :func:`edge_variable`."""
    eps = np.asarray(epsilon, dtype=float)
    n = sp.n
    c = np.sqrt(2.0 * sp.N / n)
    if edge == "outer":
        val = (sp.m_hat + 1) ** (n / 2) + eps * (sp.m_hat + 1) ** ((n - 1) / 2) / c
    elif edge == "inner":
        if sp.m_hat == 0:
            raise DomainError("no inner edge when m_hat = 0")
        val = sp.m_hat ** (n / 2) - eps * sp.m_hat ** ((n - 1) / 2) / c
    else:
        raise UsageError(f"edge must be 'inner' or 'outer', got {edge!r}")
    return _out(val, eps)


def edge_density(epsilon):
    """Universal edge profile erfc(sqrt(2) eps) / (2 pi)."""
    eps = np.asarray(epsilon, dtype=float)
    return _out(specfun.erfc(np.sqrt(2.0) * eps) / (2 * np.pi), eps)


def scaled_density_edge_units(sp, epsilon, edge="outer", cfg=specfun.DEFAULT_MB):
    """Exact scaled density at r_hat(eps), in units where the macroscopic
    plateau next to the edge equals 1/pi.

    The universal profile erfc(sqrt(2) eps)/(2 pi) is a statement in these
    units; for n = 1, m_hat = 0 at the outer edge they coincide with rho_hat.
    """
    r_hat = edge_radius(sp, epsilon, edge)
    inner, outer = sp.support
    r_edge = outer if edge == "outer" else inner
    plateau = r_edge ** (2.0 / sp.n - 2.0) / (sp.n * np.pi)
    return radial_density_scaled(sp, r_hat, cfg) / (np.pi * plateau)


def unfold(n, r):
    """r -> r^(2/n), the change of variable that flattens the bulk."""
    r = _positive(r)
    return _out(r ** (2.0 / n), r)


def bulk_density(r_tilde):
    """Microscopic bulk radial density 1/(2 pi r_tilde), independent of n, m."""
    r_tilde = _positive(r_tilde, "r_tilde")
    return _out(1.0 / (2 * np.pi * r_tilde), r_tilde)


def unfolded_density(params, r_tilde, cfg=specfun.DEFAULT_MB):
    """Exact rho_N re-expressed as a planar radial density in r_tilde = r^(2/n).

    Particle number is preserved: 2 pi r_t rho_t dr_t = 2 pi r rho_N dr, so
    rho_t = (n/2) r^(2-4/n) rho_N(r). Compare with :func:`bulk_density`.
    """
    r_tilde = _positive(r_tilde, "r_tilde")
    n = params.n
    r = r_tilde ** (n / 2.0)
    return _out(0.5 * n * r ** (2.0 - 4.0 / n) * radial_density(params, r, cfg), r_tilde)


def log_origin_density(n, m, r, cfg=specfun.DEFAULT_MB):
    r = _positive(r)
    return _out(
        np.log(2 / np.pi)
        + 2 * np.log(r)
        - n * gammaln(m + 2.0)
        + specfun.log_meijer_g(n, m, r**2, cfg)
        + specfun.log_hyp_1_f_2n(n, m, r**4 / 4.0**n),
        r,
    )


def origin_density(n, m, r, cfg=specfun.DEFAULT_MB):
    """lim_{N->inf} rho_N(r) at fixed r:

        (2 r^2 / (pi Gamma(m+2)^n)) G(r^2) 1F2n(1; (m+2)/2 x n, (m+3)/2 x n; r^4/4^n).
    """
    return _out(np.exp(log_origin_density(n, m, r, cfg)), r)


def bulk_window(sp, fraction=0.6):
    """Central ``fraction`` of the macroscopic support, in r_hat."""
    inner, outer = sp.support
    pad = 0.5 * (1.0 - fraction) * (outer - inner)
    return inner + pad, outer - pad


def radial_mass(params, scaled=False, epsrel=1e-10, cfg=specfun.DEFAULT_MB):
    """int_0^inf 2 pi r rho dr by adaptive quadrature, split at both edges.

    Returns 2N-normalized mass, or unit-normalized mass when ``scaled``.
    The upper limit is pushed out until the integrand is below 1e-18 of the
    plateau.
    """
    n, m, N = params.n, params.m, params.N
    outer = (m + 2 * N) ** (n / 2)
    r_max = 1.5 * outer + 10.0
    while 2 * np.pi * r_max**2 * radial_density(params, r_max, cfg) > 1e-18 * 2 * N:
        r_max *= 1.5
    points = sorted({p for p in (m ** (n / 2), outer) if 0 < p < r_max})
    f = lambda r: 2 * np.pi * r * radial_density(params, r, cfg) if r > 0 else 0.0
    edges = [0.0, *points, r_max]
    total = sum(
        integrate.quad(f, lo, hi, epsabs=0, epsrel=epsrel, limit=400)[0] for lo, hi in zip(edges[:-1], edges[1:])
    )
    return total / (2 * N) if scaled else total


@dataclass(frozen=True)
class GridSpec:
    """``count`` points from ``min`` to ``max``; spacing 'lin', 'log' or None (mode default)."""

    min: float
    max: float
    count: int
    spacing: Optional[str] = None

    def __post_init__(self):
        if not (np.isfinite(self.min) and np.isfinite(self.max)) or not self.min < self.max:
            raise UsageError(f"grid needs min < max, got {self.min}:{self.max}")
        if int(self.count) != self.count or self.count < 2:
            raise UsageError("grid needs count >= 2")
        if self.spacing not in (None, "lin", "log"):
            raise UsageError(f"grid spacing must be 'lin' or 'log', got {self.spacing!r}")

    @classmethod
    def parse(cls, text):
        """Parse ``min:max:count[:log|:lin]``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise UsageError(f"grid must look like min:max:count[:log], got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}: {exc}") from None
        return cls(lo, hi, count, parts[3] if len(parts) == 4 else None)

    def points(self, default="lin"):
        spacing = self.spacing or default
        if spacing == "log":
            if self.min <= 0:
                raise UsageError("log spacing needs min > 0")
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class TableRequest:
    mode: str
    grid: GridSpec
    n: int = 1
    N: Optional[int] = None
    m: Optional[float] = None
    m_hat: Optional[float] = None

    def __post_init__(self):
        mode = MODE_ALIASES.get(self.mode, self.mode)
        if mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        object.__setattr__(self, "mode", mode)
        if self.m is not None and self.m_hat is not None:
            raise UsageError("give m or m_hat, not both")


@dataclass
class DensityTable:
    mode: str
    grid: list
    values: list
    params: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise UsageError("grid and values differ in length")
        if np.any(np.diff(self.grid) <= 0):
            raise UsageError("grid must be strictly increasing")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _need(value, name, mode):
    if value is None:
        raise UsageError(f"mode {mode!r} needs --{name}")
    return value


def density_table(req, cfg=specfun.DEFAULT_MB):
    """Evaluate the requested mode on the grid and wrap it in a :class:`DensityTable`."""
    mode = req.mode
    grid = req.grid.points("log" if mode in LOG_SPACED_MODES else "lin")
    params = {"n": req.n}

    def ensemble():
        N = _need(req.N, "N", mode)
        m = req.m if req.m is not None else 2 * N * _need(req.m_hat, "m", mode)
        params.update(N=N, m=m)
        return EnsembleParams(req.n, m, N)

    def scaled():
        N = _need(req.N, "N", mode)
        m_hat = req.m_hat if req.m_hat is not None else _need(req.m, "m-hat", mode) / (2 * N)
        params.update(N=N, m_hat=m_hat)
        return ScaledParams(req.n, m_hat, N)

    if mode == "exact":
        values = radial_density(ensemble(), grid, cfg)
    elif mode == "scaled":
        values = radial_density_scaled(scaled(), np.where(grid > 0, grid, 1e-300), cfg)
        values = np.where(grid > 0, values, 0.0)
    elif mode == "asymptotic":
        values = radial_density_asymptotic(ensemble(), grid)
    elif mode == "asymptotic_edge":
        values = radial_density_asymptotic_edge(scaled(), grid)
    elif mode == "macroscopic":
        m_hat = req.m_hat if req.m_hat is not None else 0.0
        if req.m is not None:
            m_hat = req.m / (2 * _need(req.N, "N", mode))
        params.update(m_hat=m_hat)
        values = macroscopic_density(req.n, m_hat, grid)
    elif mode == "bulk":
        values = bulk_density(grid)
    elif mode == "edge":
        values = edge_density(grid)
        params = {}
    else:  # origin
        m = req.m if req.m is not None else 0.0
        params.update(m=m)
        values = origin_density(req.n, m, grid, cfg)

    metadata = {
        "grid": {"min": req.grid.min, "max": req.grid.max, "count": req.grid.count,
                 "spacing": req.grid.spacing or ("log" if mode in LOG_SPACED_MODES else "lin")},
        "rel_tol": cfg.rel_tol,
    }
    return DensityTable(mode, [float(g) for g in grid], [float(v) for v in np.atleast_1d(values)], params, metadata)
