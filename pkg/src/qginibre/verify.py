"""Property checks behind the ``verify`` subcommand and the acceptance tests.

Each ``check_*`` function returns a list of :class:`CheckResult`; a criterion
passes when all of its results pass. Reports carry no timings or host data,
so repeated runs serialize to identical bytes.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.special import gammaln, logsumexp

from qginibre import radial, sampler, serialize, specfun
from qginibre.correlations import (
    PrekernelEvaluator,
    correlation_Rk,
    density_R1,
    jpdf,
    pfaffian,
    pfaffian_expansion,
    prekernel_polynomial,
)
from qginibre.ensemble import (
    EnsembleParams,
    build_basis,
    coefficient_ratio_from_moments,
    skew_product_polys,
)

VERIFY_SEED = 42


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: dict = field(default_factory=dict)


@dataclass
class VerifyReport:
    results: list

    @property
    def criteria(self):
        return sorted({r.criterion for r in self.results})

    def criterion_passed(self, c):
        return all(r.passed for r in self.results if r.criterion == c)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def to_dict(self):
        return {
            "passed": self.passed,
            "criteria": {str(c): self.criterion_passed(c) for c in self.criteria},
            "results": [asdict(r) for r in self.results],
        }

    @classmethod
    def from_dict(cls, data):
        return cls([CheckResult(**r) for r in data["results"]])


def _result(criterion, name, value, tol, upper=True, **detail):
    value = float(value)
    ok = value <= tol if upper else value >= tol
    return CheckResult(criterion, name, bool(ok and np.isfinite(value)), value, tol, detail)


def _rel(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b) / np.abs(b)))


# 1 ----------------------------------------------------------------------


def check_skew_orthogonality(K=6):
    worst_same, worst_h, worst_off, worst_ratio = 0.0, 0.0, 0.0, 0.0
    for n in (1, 2, 3):
        for m in (0.0, 1.0, 2.5):
            params = EnsembleParams(n, m, K + 1)
            basis = build_basis(params, K)
            c = [basis.coefficients(d) for d in range(2 * K + 2)]
            for a in range(2 * K + 2):
                for b in range(a, 2 * K + 2):
                    val, mag = skew_product_polys(params, c[a], c[b], return_magnitude=True)
                    if a % 2 == b % 2:
                        if mag > 0:
                            worst_same = max(worst_same, abs(val) / mag)
                        continue
                    odd, even = (a, b) if a % 2 else (b, a)
                    sign = 1.0 if a == odd else -1.0
                    if odd == even + 1:
                        h = np.exp(basis.log_h[even // 2])
                        worst_h = max(worst_h, abs(sign * val - h) / h)
                    elif mag > 0:
                        worst_off = max(worst_off, abs(val) / mag)
            for j in range(1, K + 1):
                closed = (m + 2 * j) ** n
                worst_ratio = max(worst_ratio, abs(coefficient_ratio_from_moments(params, j) / closed - 1))
    return [
        _result(1, "same-parity skew products vanish", worst_same, 1e-12),
        _result(1, "mixed-parity off-diagonal skew products vanish", worst_off, 1e-12),
        _result(1, "<p_2k+1|p_2k> = h_k", worst_h, 1e-10),
        _result(1, "coefficient recursion matches moment ratios", worst_ratio, 1e-10),
    ]


# 2 ----------------------------------------------------------------------


def _mellin_moment(n, m, k):
    """int_0^inf x^k G(x) dx by the trapezoid rule in t = log x.

    The integrand decays double-exponentially at both ends, so the rule
    converges geometrically in the step.
    """
    h = 0.05
    hi = n * np.log(40.0 * n + m + k + 10.0) + np.log(5.0)
    t = np.arange(-40.0, hi, h)
    logf = (k + 1) * t + specfun.log_meijer_g(n, m, np.exp(t))
    return float(np.exp(logsumexp(logf) + np.log(h)))


def check_weight_oracles():
    x = np.geomspace(1e-3, 25.0, 200)
    n1 = 0.0
    for m in (0.0, 1.0, 2.5):
        exact = x**m * np.exp(-x)
        n1 = max(n1, _rel(specfun.meijer_g(1, m, x), exact), _rel(np.exp(specfun.log_meijer_g_contour(1, m, x)), exact))
    n2 = _rel(specfun.meijer_g(2, 0.0, x), 2 * special.k0(2 * np.sqrt(x)))
    mom = 0.0
    for n in (1, 2, 3):
        for m in (0.0, 1.0, 2.5):
            for k in (0, 1, 2):
                exact = np.exp(n * gammaln(m + k + 1))
                mom = max(mom, abs(_mellin_moment(n, m, k) / exact - 1))
    return [
        _result(2, "n=1 weight equals x^m exp(-x)", n1, 1e-8),
        _result(2, "n=2, m=0 weight equals 2 K0(2 sqrt x)", n2, 1e-8),
        _result(2, "Mellin moments equal Gamma(m+k+1)^n", mom, 1e-6),
    ]


# 3 ----------------------------------------------------------------------


def check_kernel_equivalence(pairs=50):
    rng = np.random.default_rng(VERIFY_SEED)
    worst, asym = 0.0, 0.0
    for n in (1, 2, 3):
        for N in (1, 3, 10):
            params = EnsembleParams(n, 1.0, N)
            ev = PrekernelEvaluator(params)
            r = 0.5 * params.spectral_radius
            u = r * (rng.standard_normal(pairs) + 1j * rng.standard_normal(pairs))
            v = r * (rng.standard_normal(pairs) + 1j * rng.standard_normal(pairs))
            k2 = ev(u, v)
            k1 = prekernel_polynomial(params, u, v)
            scale = np.maximum(np.abs(k1), 1e-300)
            worst = max(worst, float(np.max(np.abs(k2 - k1) / scale)))
            asym = max(asym, float(np.max(np.abs(ev(u, v) + ev(v, u)))))
    return [
        _result(3, "explicit-sum and polynomial prekernels agree", worst, 1e-10),
        _result(3, "prekernel antisymmetry is exact", asym, 0.0),
    ]


# 4 ----------------------------------------------------------------------


def _integrate_R1(params, ev, theta_nodes=96):
    x, w = np.polynomial.legendre.leggauss(theta_nodes)
    theta = 0.5 * np.pi * (x + 1)
    wt = 0.5 * np.pi * w

    def ring(r):
        if r == 0:
            return 0.0
        # R_1(conj z) = R_1(z): the lower half-plane doubles the upper one
        return 2 * r * np.sum(wt * density_R1(params, r * np.exp(1j * theta), ev))

    outer = 1.5 * (params.m + 2 * params.N) ** (params.n / 2) + 12.0
    edges = [0.0, 0.5 * outer, outer]
    return sum(integrate.quad(ring, a, b, epsabs=0, epsrel=1e-10, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))


def _jpdf_N1_normalization(params):
    """int jpdf d^2z for N = 1 by 2D quadrature over the upper half plane."""
    f = lambda y, x: jpdf(params, [complex(x, y)])
    lim = 2.0 * (params.m + 2) ** (params.n / 2) + 10.0
    val, _ = integrate.dblquad(f, -lim, lim, 0.0, lim, epsabs=1e-13, epsrel=1e-10)
    return 2 * val


def check_correlation_consistency():
    rng = np.random.default_rng(VERIFY_SEED)
    out = []
    worst = 0.0
    for n in (1, 2, 3):
        for m in (0.0, 1.0):
            params = EnsembleParams(n, m, 5)
            ev = PrekernelEvaluator(params)
            for z in 0.7 * params.spectral_radius * (rng.random(5) + 1j * rng.random(5)):
                worst = max(worst, abs(correlation_Rk(params, [z], ev) / density_R1(params, z, ev) - 1))
    out.append(_result(4, "k=1 Pfaffian equals the one-point density", worst, 1e-10))

    mass = 0.0
    for N in (1, 2, 5):
        for n in (1, 2):
            for m in (0.0, 1.0):
                params = EnsembleParams(n, m, N)
                mass = max(mass, abs(_integrate_R1(params, PrekernelEvaluator(params)) / (2 * N) - 1))
    out.append(_result(4, "int R_1 d^2z = 2N", mass, 1e-6))

    pf = 0.0
    for dim in range(2, 13, 2):
        for _ in range(5):
            B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            A = B - B.T
            det = np.linalg.det(A)
            pf = max(pf, abs(pfaffian(A) ** 2 - det) / abs(det))
            if dim <= 8:
                pf = max(pf, abs(pfaffian(A) - pfaffian_expansion(A)) / abs(pfaffian_expansion(A)))
    out.append(_result(4, "pf(A)^2 = det(A), dimensions up to 12", pf, 1e-9))

    brute = 0.0
    for n in (1, 2):
        for m in (0.0, 1.0):
            params = EnsembleParams(n, m, 1)
            Z = _jpdf_N1_normalization(params)
            for z in (0.3 + 0.8j, -1.1 + 0.4j, 0.2 + 1.7j):
                brute = max(brute, abs(2 * jpdf(params, [z]) / Z / density_R1(params, z) - 1))
    out.append(_result(4, "N=1 jpdf quadrature reproduces R_1", brute, 1e-4))
    return out


# 5 ----------------------------------------------------------------------


def check_radial_density():
    norm = 0.0
    for n in (1, 2, 3):
        for N in (1, 2, 5):
            for m in (0.0, 1.0, 2.5):
                norm = max(norm, abs(radial.radial_mass(EnsembleParams(n, m, N)) / (2 * N) - 1))
    phase = 0.0
    x, w = np.polynomial.legendre.leggauss(96)
    theta = 0.5 * np.pi * (x + 1)
    for n in (1, 2, 3):
        for m in (0.0, 1.0):
            params = EnsembleParams(n, m, 5)
            ev = PrekernelEvaluator(params)
            for r in np.linspace(0.1, 1.3, 10) * params.spectral_radius:
                # (1/2pi) int_0^2pi = (1/pi) int_0^pi = (1/2) sum w f on the mapped nodes
                avg = 0.5 * np.sum(w * density_R1(params, r * np.exp(1j * theta), ev))
                phase = max(phase, abs(avg / radial.radial_density(params, r) - 1))
    unit = 0.0
    for n, N, m in ((3, 100, 125.0), (1, 200, 0.0), (2, 50, 62.5)):
        unit = max(unit, abs(radial.radial_mass(EnsembleParams(n, m, N), scaled=True) - 1))
    return [
        _result(5, "radial density integrates to 2N", norm, 1e-6),
        _result(5, "phase average of R_1 equals rho_N", phase, 1e-8),
        _result(5, "scaled density has unit mass", unit, 1e-5),
    ]


# 6 ----------------------------------------------------------------------


def _asymptotic_error(n, N, m):
    params = EnsembleParams(n, m, N)
    sp = radial.ScaledParams.from_ensemble(params)
    lo, hi = radial.bulk_window(sp)
    g = np.linspace(lo, hi, 400)
    exact = radial.radial_density_scaled(sp, g)
    two = 2.0 * N
    approx = two ** (n - 1) * radial.radial_density_asymptotic(params, g * two ** (n / 2))
    return float(np.max(np.abs(approx / exact - 1)))


def check_asymptotics():
    return [
        _result(6, "erfc form at n=3, N=100, m=125 (middle 60%)", _asymptotic_error(3, 100, 125.0), 0.05),
        _result(6, "erfc form at n=1, N=200, m=0 (middle 60%)", _asymptotic_error(1, 200, 0.0), 0.02),
    ]


# 7 ----------------------------------------------------------------------


def _origin_series(n, m, r, terms=400):
    """(2/pi) G(r^2) sum_k r^(4k+2) / Gamma(m+2k+2)^n, the N -> inf series."""
    k = np.arange(terms)[:, None]
    logs = (4 * k + 2) * np.log(r)[None, :] - n * gammaln(m + 2 * k + 2)
    return np.exp(np.log(2 / np.pi) + specfun.log_meijer_g(n, m, r**2) + logsumexp(logs, axis=0))


def check_microscopic_limits():
    eps = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    out = []
    for edge, m_hat in (("outer", 0.0), ("outer", 0.625), ("inner", 0.625)):
        for n in (1, 2, 3):
            rows = []
            for N in (25, 50, 100, 200):
                sp = radial.ScaledParams(n, m_hat, N)
                rows.append(np.abs(radial.scaled_density_edge_units(sp, eps, edge) - radial.edge_density(eps)))
            rows = np.array(rows)
            increases = int(np.sum(np.diff(rows, axis=0) >= 0))
            out.append(
                _result(
                    7,
                    f"{edge} edge, n={n}, m_hat={m_hat}: error decreases in N",
                    increases,
                    0,
                    final_errors=[float(v) for v in rows[-1]],
                )
            )
    flat = 0.0
    for n in (1, 2, 3):
        params = EnsembleParams(n, 0.0, 200)
        sp = radial.ScaledParams.from_ensemble(params)
        lo, hi = radial.bulk_window(sp)
        s = 400.0 ** (n / 2)
        rt = np.linspace((lo * s) ** (2 / n), (hi * s) ** (2 / n), 200)
        v = 2 * np.pi * rt * radial.unfolded_density(params, rt)
        flat = max(flat, float(v.max() / v.min() - 1))
    out.append(_result(7, "unfolded bulk density is flat at N=200", flat, 0.02))
    conv, series = 0.0, 0.0
    r = np.linspace(0.1, 2.0, 10)
    for n in (1, 2, 3):
        for m in (0.0, 1.0, 2.5):
            limit = radial.origin_density(n, m, r)
            conv = max(conv, _rel(radial.radial_density(EnsembleParams(n, m, 200), r), limit))
            series = max(series, _rel(limit, _origin_series(n, m, r)))
    out.append(_result(7, "rho_N at N=200 matches the origin limit", conv, 1e-8))
    out.append(_result(7, "1F2n form equals the direct series", series, 1e-10))
    return out


# 8 ----------------------------------------------------------------------


def check_monte_carlo(draws=10_000, workers=1):
    out = []
    for n in (1, 3):
        params = EnsembleParams(n, 0.0, 25)
        samples = sampler.sample_spectra(params, 50, VERIFY_SEED, workers=workers)
        top = max(np.max(np.abs(s.eigenvalues)) for s in samples) / (2.0 * params.N) ** (n / 2)
        out.append(_result(8, f"n={n}, N=25, 50 draws: max scaled |z| <= 1.2", top, 1.2))
    pairing, det = 0.0, 0.0
    for n in (1, 2, 3):
        params = EnsembleParams(n, 0.0, 5)
        samples = sampler.sample_spectra(params, draws, VERIFY_SEED, workers=workers)
        pairing = max(pairing, max(s.pairing_residual for s in samples))
        det = max(det, max(s.det_residual for s in samples))
        rep = sampler.compare_to_density(sampler.radial_histogram(samples, "raw", 40), params)
        lo, hi = rep.band
        out.append(
            CheckResult(
                8,
                f"n={n}, N=5, {draws} draws: radial chi-square within 4 sigma",
                rep.passed,
                rep.chi_square,
                hi,
                {"dof": rep.dof, "band": [lo, hi], "max_abs_z": rep.max_abs_z},
            )
        )
    out.append(_result(8, "conjugate pairing residual per draw", pairing, sampler.PAIRING_TOL))
    out.append(_result(8, "prod |z_k|^2 = |det P| per draw", det, sampler.DET_TOL))
    return out


# 9 ----------------------------------------------------------------------


def scatter_rows(samples):
    return [(s.draw_index, float(z.real), float(z.imag)) for s in samples for z in s.eigenvalues]


def check_determinism():
    params = EnsembleParams(3, 0.0, 25)
    texts = [
        serialize.csv_text(("draw", "re", "im"), scatter_rows(sampler.sample_spectra(params, 50, VERIFY_SEED, workers=w)))
        for w in (1, 1, 4)
    ]
    reports = [serialize.dumps_json(VerifyReport(check_skew_orthogonality()).to_dict()) for _ in range(2)]
    return [
        _result(9, "sample output identical across runs and worker counts", len(set(texts)) - 1, 0),
        _result(9, "verify report identical across runs", len(set(reports)) - 1, 0),
    ]


CHECKS = {
    1: check_skew_orthogonality,
    2: check_weight_oracles,
    3: check_kernel_equivalence,
    4: check_correlation_consistency,
    5: check_radial_density,
    6: check_asymptotics,
    7: check_microscopic_limits,
    8: check_monte_carlo,
    9: check_determinism,
}


def run_verify(criteria=None, draws=10_000, workers=1):
    """Run the selected criteria (default: all) and collect a :class:`VerifyReport`."""
    results = []
    for c in criteria or sorted(CHECKS):
        if c not in CHECKS:
            raise ValueError(f"unknown criterion {c}")
        if c == 8:
            results.extend(check_monte_carlo(draws, workers))
        else:
            results.extend(CHECKS[c]())
    return VerifyReport(results)
