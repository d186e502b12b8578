"""Command-line front end.

Every subcommand writes plot-ready data: CSV (with a ``.meta.json`` sidecar
when written to a file) or a single JSON document. Exit codes: 0 success,
2 invalid usage or domain, 3 numerical failure (including a failed
``verify``), 4 I/O error.
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from qginibre import radial, sampler, serialize, specfun, verify
from qginibre.correlations import CorrelationPointSet, PrekernelEvaluator, correlation_Rk, log_weight
from qginibre.ensemble import EnsembleParams, build_basis
from qginibre.errors import NumericalError, QGinibreError, UsageError

OUTPUT_DIR_ENV = "QGINIBRE_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


@dataclass
class RunConfig:
    subcommand: str
    n: int = 1
    N: Optional[int] = None
    m: Optional[float] = None
    m_hat: Optional[float] = None
    mode: Optional[str] = None
    grid: Optional[radial.GridSpec] = None
    K: Optional[int] = None
    pairs: list = field(default_factory=list)
    points: list = field(default_factory=list)
    draws: int = 50
    seed: Optional[int] = None
    scaled: bool = False
    bins: int = 40
    workers: int = 1
    criteria: Optional[list] = None
    out: Optional[str] = None
    format: str = "csv"
    rel_tol: float = specfun.DEFAULT_MB.rel_tol
    options: tuple = ()  # option names the subcommand accepts; these go into the metadata

    @property
    def mb_config(self):
        return specfun.MellinBarnesConfig(rel_tol=self.rel_tol)

    def ensemble(self, default_N=None):
        N = self.N if self.N is not None else default_N
        if N is None:
            raise UsageError(f"{self.subcommand} needs --N")
        if self.m_hat is not None:
            if self.m is not None:
                raise UsageError("give --m or --m-hat, not both")
            return EnsembleParams(self.n, 2 * N * self.m_hat, N)
        return EnsembleParams(self.n, self.m if self.m is not None else 0.0, N)

    def meta(self):
        keep = set(self.options) | {"subcommand"}
        d = {k: v for k, v in asdict(self).items() if k in keep and v is not None}
        if self.grid is not None and "grid" in keep:
            d["grid"] = asdict(self.grid)
        return d


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"--pair takes u,v; got {text!r}")
    return _complex(parts[0]), _complex(parts[1])


def _grid(text):
    try:
        return radial.GridSpec.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _criteria(text):
    try:
        return [int(c) for c in text.split(",") if c]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--criteria takes e.g. 1,2,5; got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qginibre",
        description="Eigenvalue statistics of products of induced quaternion Ginibre matrices.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, need_N=True, default_format="csv"):
        p.add_argument("--n", type=int, default=1, help="number of factors")
        if need_N:
            p.add_argument("--N", type=int, help="matrix size (quaternion entries)")
        p.add_argument("--m", type=float, help="induced exponent")
        p.add_argument("--m-hat", dest="m_hat", type=float, help="scaled exponent m / 2N")
        p.add_argument("--out", help="output file ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.add_argument("--rel-tol", dest="rel_tol", type=float, default=specfun.DEFAULT_MB.rel_tol,
                       help="relative tolerance of the Meijer G quadrature")

    p = sub.add_parser("weight", help="weight function over a radius grid")
    common(p, need_N=False)
    p.add_argument("--grid", type=_grid, default=radial.GridSpec(0.01, 5.0, 100, "lin"))

    p = sub.add_parser("radial", help="radial density table")
    common(p)
    p.add_argument("--mode", default="exact", help="exact|scaled|asymptotic|asymptotic_edge|macro|bulk|edge|origin")
    p.add_argument("--grid", type=_grid, help="min:max:count[:log]")

    p = sub.add_parser("polys", help="skew-orthogonal polynomial coefficients and norms")
    common(p, need_N=False)
    p.add_argument("--K", type=int, required=True, help="highest pair index")

    p = sub.add_parser("kernel", help="prekernel at point pairs")
    common(p)
    p.add_argument("--pair", dest="pairs", type=_pair, action="append", required=True, help="u,v (repeatable)")

    p = sub.add_parser("corr", help="k-point correlation function")
    common(p)
    p.add_argument("--point", dest="points", type=_complex, action="append", required=True,
                   help="complex point, e.g. 0.3+0.7j (repeat for k > 1)")

    p = sub.add_parser("sample", help="Monte Carlo eigenvalues, histogram and comparison report")
    common(p)
    p.add_argument("--draws", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scaled", action="store_true", help="divide eigenvalues by (2N)^(n/2)")
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify", help="run the property suite and emit a pass/fail report")
    p.add_argument("--criteria", type=_criteria, help="comma-separated subset, default all")
    p.add_argument("--draws", type=int, default=10_000, help="draws per Monte Carlo chi-square test")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def parse_config(argv):
    args = vars(build_parser().parse_args(argv))
    return RunConfig(**args, options=tuple(sorted(args)))


def _default_grid(cfg):
    mode = radial.MODE_ALIASES.get(cfg.mode, cfg.mode)
    if mode in ("exact", "asymptotic"):
        R = cfg.ensemble().spectral_radius
        return radial.GridSpec(0.005 * R, 1.3 * R, 400, "lin")
    if mode in ("scaled", "asymptotic_edge", "macroscopic"):
        m_hat = cfg.m_hat if cfg.m_hat is not None else (cfg.m or 0.0) / (2 * cfg.N) if cfg.N else 0.0
        return radial.GridSpec(0.005, 1.3 * (m_hat + 1) ** (cfg.n / 2), 400, "lin")
    if mode == "bulk":
        return radial.GridSpec(1.0, 20.0, 200, "lin")
    if mode == "edge":
        return radial.GridSpec(-4.0, 4.0, 161, "lin")
    return radial.GridSpec(0.01, 3.0, 300, "lin")


def _destination(cfg, default_name):
    if cfg.out == "-":
        return None
    if cfg.out is not None:
        return cfg.out
    env = os.environ.get(OUTPUT_DIR_ENV)
    return str(Path(env) / default_name) if env else None


def _emit(cfg, default_stem, header, rows, payload, stream):
    ext = "json" if cfg.format == "json" else "csv"
    path = _destination(cfg, f"{default_stem}.{ext}")
    serialize.write_output(path, cfg.format, header, rows, payload, cfg.meta(), stream)
    return path


def cmd_weight(cfg, stream):
    params = EnsembleParams(cfg.n, cfg.m or 0.0, 1)
    r = cfg.grid.points()
    lw = log_weight(params, r, cfg.mb_config)
    rows = [(float(a), float(np.exp(b)), float(b)) for a, b in zip(r, lw)]
    payload = {"r": r, "weight": np.exp(lw), "log_weight": lw}
    _emit(cfg, "weight", ("r", "weight", "log_weight"), rows, payload, stream)


def cmd_radial(cfg, stream):
    if cfg.N is not None and cfg.m is None and cfg.m_hat is None and cfg.mode not in ("edge", "bulk"):
        cfg.m = 0.0
    req = radial.TableRequest(cfg.mode, cfg.grid or _default_grid(cfg), cfg.n, cfg.N, cfg.m, cfg.m_hat)
    table = radial.density_table(req, cfg.mb_config)
    rows = list(zip(table.grid, table.values))
    _emit(cfg, f"radial_{table.mode}", ("r", "value"), rows, {"table": table.to_dict()}, stream)


def cmd_polys(cfg, stream):
    params = EnsembleParams(cfg.n, cfg.m or 0.0, max(cfg.K, 0) + 1)
    basis = build_basis(params, cfg.K)
    rows, coeffs = [], {}
    for k in range(cfg.K + 1):
        log_c = basis.even_coeffs[k]
        coeffs[str(2 * k)] = {"powers": list(range(0, 2 * k + 1, 2)), "log_coefficients": log_c}
        coeffs[str(2 * k + 1)] = {"powers": [2 * k + 1], "log_coefficients": [0.0]}
        for l, c in enumerate(log_c):
            rows.append(("coef", 2 * k, 2 * l, float(np.exp(c)), float(c)))
        rows.append(("coef", 2 * k + 1, 2 * k + 1, 1.0, 0.0))
    for k, lh in enumerate(basis.log_h):
        rows.append(("h", k, "", float(np.exp(lh)), float(lh)))
    payload = {"polynomials": coeffs, "log_h": basis.log_h}
    _emit(cfg, "polys", ("kind", "index", "power", "value", "log_value"), rows, payload, stream)


def cmd_kernel(cfg, stream):
    params = cfg.ensemble()
    ev = PrekernelEvaluator(params)
    u = np.array([p[0] for p in cfg.pairs])
    v = np.array([p[1] for p in cfg.pairs])
    mant, scale = ev.scaled(u, v)
    with np.errstate(over="ignore"):
        val = mant * np.exp(scale)
    rows = [
        (a.real, a.imag, b.real, b.imag, float(c.real), float(c.imag), float(mm.real), float(mm.imag), float(s))
        for a, b, c, mm, s in zip(u, v, val, mant, scale)
    ]
    header = ("u_re", "u_im", "v_re", "v_im", "re", "im", "mantissa_re", "mantissa_im", "log_scale")
    payload = {"rows": [dict(zip(header, r)) for r in rows]}
    _emit(cfg, "kernel", header, rows, payload, stream)


def cmd_corr(cfg, stream):
    params = cfg.ensemble()
    pts = CorrelationPointSet(tuple(cfg.points))
    log_val = correlation_Rk(params, pts, cfg=cfg.mb_config, log=True)
    rows = [(pts.k, float(np.exp(log_val)), float(log_val))]
    payload = {"k": pts.k, "points": [{"re": p.real, "im": p.imag} for p in pts.points],
               "value": float(np.exp(log_val)), "log_value": float(log_val)}
    _emit(cfg, "corr", ("k", "value", "log_value"), rows, payload, stream)


def cmd_sample(cfg, stream):
    params = cfg.ensemble()
    samples = sampler.sample_spectra(params, cfg.draws, cfg.seed, workers=cfg.workers)
    scale = (2.0 * params.N) ** (params.n / 2) if cfg.scaled else 1.0
    rows = [(s.draw_index, float(z.real) / scale, float(z.imag) / scale) for s in samples for z in s.eigenvalues]
    hist = sampler.radial_histogram(samples, "scaled" if cfg.scaled else "raw", cfg.bins)
    report = sampler.compare_to_density(hist, params)
    hist_d = {"edges": hist.edges, "counts": hist.counts, "overflow": hist.overflow, "scaling": hist.scaling}
    report_d = {**asdict(report), "band": list(report.band), "passed": report.passed}
    identities = {
        "max_pairing_residual": max(s.pairing_residual for s in samples),
        "max_det_residual": max(s.det_residual for s in samples),
        "draws_with_real_eigenvalues": sum(s.flagged_real for s in samples),
    }
    payload = {"eigenvalues": [dict(zip(("draw", "re", "im"), r)) for r in rows],
               "histogram": hist_d, "comparison": report_d, "identities": identities}
    path = _emit(cfg, "sample", ("draw", "re", "im"), rows, payload, stream)
    if cfg.format == "csv" and path is not None:
        stem = Path(path).with_suffix("")
        Path(f"{stem}.hist.csv").write_text(
            serialize.csv_text(("r_lo", "r_hi", "count"), zip(hist.edges[:-1], hist.edges[1:], hist.counts.tolist()))
        )
        Path(f"{stem}.report.json").write_text(serialize.dumps_json({**report_d, **identities}))


def cmd_verify(cfg, stream):
    report = verify.run_verify(cfg.criteria, draws=cfg.draws, workers=cfg.workers)
    path = _destination(cfg, "verify.json")
    serialize.write_output(path, "json", None, None, report.to_dict(), {"criteria": cfg.criteria or "all"}, stream)
    for r in report.results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.criterion} {r.name}: {r.value:.3g} (tol {r.tolerance:g})",
              file=sys.stderr)
    if not report.passed:
        raise NumericalError("verification failed")


COMMANDS = {
    "weight": cmd_weight,
    "radial": cmd_radial,
    "polys": cmd_polys,
    "kernel": cmd_kernel,
    "corr": cmd_corr,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


def run(argv=None, stream=None):
    """Parse ``argv`` and run the subcommand; returns the exit status."""
    stream = stream or sys.stdout
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        COMMANDS[cfg.subcommand](cfg, stream)
    except QGinibreError as exc:
        print(f"qginibre {cfg.subcommand}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qginibre {cfg.subcommand}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
