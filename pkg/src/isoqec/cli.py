"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure (or insufficient
samples), 3 failed validation check.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__, experiments, numerics, theory
from .codes import CodeParams
from .distributions import check_normalization, normal_density

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


@dataclass
class RunConfig:
    command: str
    sigma: list[float] = field(default_factory=list)
    n: int = 2
    m: int = 1
    samples: int = 100_000
    seed: int = 0
    tol: float = theory.SERIES_TOL
    output_path: str | None = None
    format: str = "pretty"
    codes: list[CodeParams] = field(default_factory=list)
    syndrome: int = 1
    points: int = 181
    threads: int | None = None

    def validate(self):
        for s in self.sigma:
            if not 0.0 <= s < 1.0:
                raise UsageError(f"sigma must lie in [0, 1), got {s}")
        if self.command in ("variance", "uniformity", "sweep") and self.samples < experiments.MIN_SAMPLES:
            raise UsageError(f"--samples must be >= {experiments.MIN_SAMPLES}")
        if self.command in ("variance", "uniformity"):
            try:
                code = CodeParams(self.n, self.m)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if self.command == "uniformity" and not 0 < self.syndrome < code.d_syndrome:
                raise UsageError(f"--syndrome must satisfy 0 < s < {code.d_syndrome}")
        if self.command == "density":
            if self.points < 2:
                raise UsageError("--points must be >= 2")
            if self.n < 1:
                raise UsageError("--n must be >= 1")
        if self.command == "sweep" and not self.sigma:
            raise UsageError("--sigma-list is empty")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be >= 1")

    def provenance(self) -> str:
        flags = {
            "density": f"--sigma {fmt(self.sigma[0])} --n {self.n} --points {self.points}",
            "variance": f"--sigma {fmt(self.sigma[0])} --n {self.n} --m {self.m} --samples {self.samples} --tol {fmt(self.tol)}",
            "sweep": "--sigma-list {} --codes {} --samples {} --tol {}".format(
                ",".join(fmt(s) for s in self.sigma), " ".join(f"{c.n},{c.m}" for c in self.codes),
                self.samples, fmt(self.tol)),
        }[self.command]
        return f"# isoqec {__version__} {self.command} seed={self.seed} {flags}"


def _write_csv(cfg: RunConfig, header, rows, out):
    buf = io.StringIO()
    buf.write(cfg.provenance() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _faulty_double_factorial(k: int):
    value = numerics.double_factorial(k)
    return numerics.LogScaled.from_int(int(value) + 1) if k == 7 else value


def validation_checks(tol: float, df: Callable = numerics.double_factorial):
    """Yield ``(name, passed, detail)`` for the closed-form identity suite."""
    quad = tol
    band = 1e-9

    ok = float(df(-1)) == 1 and float(df(0)) == 1 and int(df(6)) == 48 and int(df(7)) == 105
    ok = ok and all(int(df(k)) * int(df(k - 1)) == math.factorial(k) for k in range(1, 21))
    yield "double factorial: conventions and k!!(k-1)!! = k!", ok, "k = 1..20"

    worst = 0.0
    for k in range(0, 41):
        r = numerics.integrate_adaptive(lambda t: np.sin(t) ** k, 0, math.pi, quad)
        worst = max(worst, abs(r.value - numerics.wallis_integral(k)) / numerics.wallis_integral(k))
    yield "sin^k over [0, pi]", worst <= band, f"max rel err {worst:.2e}, k = 0..40"

    worst = max(abs(numerics.wallis_integral(k) * numerics.wallis_integral(k + 1) * (k + 1) / (2 * math.pi) - 1)
                for k in range(0, 41, 2))
    yield "Wallis product identity", worst <= 1e-12, f"max rel err {worst:.2e}"

    worst = 0.0
    for a in range(9):
        for b in range(9):
            r = numerics.integrate_adaptive(lambda t: np.cos(t) ** a * np.sin(t) ** b, 0, math.pi / 2, quad)
            exact = numerics.cos_sin_halfpi_integral(a, b)
            worst = max(worst, abs(r.value - exact) / exact)
    yield "cos^a sin^b over [0, pi/2]", worst <= band, f"max rel err {worst:.2e}, a, b = 0..8"

    for kind in numerics.KERNEL_KINDS:
        for d in range(1, 9):
            worst = 0.0
            for sigma in (0.0, 0.25, 0.5, 0.75, 0.9):
                f = numerics.kernel_integrand(kind, d, sigma)
                r = numerics.integrate_adaptive(f, 0, math.pi, quad, points=np.linspace(0, math.pi, 9))
                scale = numerics.integrate_adaptive(lambda t: np.abs(f(t)), 0, math.pi, quad).value
                exact = numerics.kernel_integral(kind, d, sigma)
                # the cos kernel vanishes at sigma = 0, so errors are measured against int|f|
                worst = max(worst, abs(r.value - exact) / max(abs(exact), scale))
            yield f"kernel integral {kind}, d={d}", worst <= band, f"max rel err {worst:.2e}"

    worst = 0.0
    for dim in range(2, 26):
        lhs = float(numerics.sphere_surface(dim))
        rhs = float(numerics.sphere_surface(dim - 1)) * numerics.wallis_integral(dim - 1)
        worst = max(worst, abs(lhs - rhs) / lhs)
    yield "sphere surface shell recursion", worst <= 1e-12, f"max rel err {worst:.2e}, dim = 2..25"

    for d in (2, 4, 8, 16):
        worst = max(check_normalization(normal_density(s, d), quad) for s in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99))
        yield f"normal density normalisation, d={d}", worst <= 1e-8, f"max residual {worst:.2e}"


def cmd_validate(args, out) -> int:
    df = _faulty_double_factorial if args.inject_fault else numerics.double_factorial
    failed = 0
    total = 0
    try:
        for name, passed, detail in validation_checks(args.tol, df):
            total += 1
            failed += not passed
            out.write(f"{'PASS' if passed else 'FAIL'}  {name}  ({detail})\n")
    except numerics.NumericalFailure as exc:
        out.write(f"ERROR numerical failure: {exc}\n")
        return EXIT_NUMERIC
    out.write(f"{total - failed}/{total} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# density / variance / sweep / uniformity
# ---------------------------------------------------------------------------


def cmd_density(cfg: RunConfig, out) -> int:
    density = normal_density(cfg.sigma[0], 2**cfg.n)
    theta = np.linspace(0.0, math.pi, cfg.points)
    f = density.density_fn(theta)
    _write_csv(cfg, ["theta", "f"], zip(theta.tolist(), f.tolist()), out)
    return EXIT_OK


def cmd_variance(cfg: RunConfig, out) -> int:
    code = CodeParams(cfg.n, cfg.m)
    density = normal_density(cfg.sigma[0], code.d)
    rep = theory.theory_report(density, code, rel_tol=cfg.tol)
    v_psi = experiments.mc_variance_disturbed(density, cfg.samples, cfg.seed, cfg.threads)
    v_sampled = experiments.mc_variance_corrected(density, code, cfg.samples, cfg.seed, "sampled", cfg.threads)
    v_rb = experiments.mc_variance_corrected(density, code, cfg.samples, cfg.seed, "rao_blackwell", cfg.threads)
    probs = experiments.mc_syndrome_probs(density, code, cfg.samples, cfg.seed, cfg.threads)
    header = ["sigma", "n", "m", "v_psi_theory", "v_psi_mc", "v_psi_se", "v_corr_theory",
              "v_corr_mc_sampled", "v_corr_se_sampled", "v_corr_mc_rb", "v_corr_se_rb", "gap_theory",
              "e_p0_theory", "e_ps_theory"] + [f"e_p{s}_mc" for s in range(code.d_syndrome)]
    row = [cfg.sigma[0], cfg.n, cfg.m, rep.v_disturbed, v_psi.mean, v_psi.std_error, rep.v_corrected,
           v_sampled.mean, v_sampled.std_error, v_rb.mean, v_rb.std_error, rep.gap, rep.e_p0, rep.e_ps]
    row += [p.mean for p in probs]
    if cfg.format == "csv":
        _write_csv(cfg, header, [row], out)
        return EXIT_OK
    lines = [
        f"normal error, sigma={fmt(cfg.sigma[0])}, code [{cfg.n},{cfg.m}] (d={code.d}, d'={code.d_logical}, d''={code.d_syndrome})",
        f"  samples={cfg.samples} seed={cfg.seed}",
        f"  V(disturbed)  theory {rep.v_disturbed:.10f}   mc {v_psi.mean:.6f} +- {v_psi.std_error:.6f}",
        f"  V(corrected)  theory {rep.v_corrected:.10f}   mc sampled {v_sampled.mean:.6f} +- {v_sampled.std_error:.6f}"
        f"   mc rao-blackwell {v_rb.mean:.6f} +- {v_rb.std_error:.6f}",
        f"  gap           theory {rep.gap:.10f}   ({rep.series_terms_used} series terms)",
        "  syndrome   E[P_s] theory   E[P_s] mc",
    ]
    for s, p in enumerate(probs):
        expected = rep.e_p0 if s == 0 else rep.e_ps
        lines.append(f"  {s:8d}   {expected:.10f}   {p.mean:.6f} +- {p.std_error:.6f}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out) -> int:
    rows = experiments.sweep(cfg.sigma, cfg.codes, cfg.samples, cfg.seed, cfg.tol, cfg.threads)
    _write_csv(cfg, list(experiments.SWEEP_COLUMNS),
               ([getattr(r, c) for c in experiments.SWEEP_COLUMNS] for r in rows), out)
    gaps = [r.gap_theory for r in rows if r.ok]
    summary = out if cfg.output_path else sys.stderr
    if gaps:
        summary.write(f"min gap_theory over {len(gaps)} rows: {fmt(min(gaps))}\n")
    return EXIT_OK if all(r.ok for r in rows) else EXIT_NUMERIC


def cmd_uniformity(cfg: RunConfig, out) -> int:
    code = CodeParams(cfg.n, cfg.m)
    density = normal_density(cfg.sigma[0], code.d)
    try:
        rep = experiments.mc_uniformity_test(density, code, cfg.syndrome, cfg.samples, cfg.seed,
                                             threads=cfg.threads)
    except experiments.InsufficientSamples as exc:
        out.write(f"insufficient samples: {exc}\n")
        return EXIT_NUMERIC
    m1, m2 = rep.moment1, rep.moment2
    out.write(
        f"syndrome {rep.syndrome}: {rep.n_hits} hits of {cfg.samples}\n"
        f"  E[cos]   = {m1.mean:.6f} +- {m1.std_error:.6f}   target 0\n"
        f"  E[cos^2] = {m2.mean:.6f} +- {m2.std_error:.6f}   target {rep.target2:.6f}\n"
        f"  {'PASS' if rep.passed else 'FAIL'} at {experiments.SE_BAND:g} standard errors\n"
    )
    return EXIT_OK if rep.passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isoqec", description="Isotropic errors versus ideal quantum error correction.")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $ISOQEC_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="run the closed-form identity suite")
    v.add_argument("--tol", type=float, default=1e-12, help="quadrature relative tolerance")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    d = sub.add_parser("density", help="tabulate the normal error density")
    d.add_argument("--sigma", type=float, required=True)
    d.add_argument("--n", type=int, default=3)
    d.add_argument("--points", type=int, default=181)
    d.add_argument("--out")

    for name in ("variance", "uniformity"):
        c = sub.add_parser(name)
        c.add_argument("--sigma", type=float, required=True)
        c.add_argument("--n", type=int, required=True)
        c.add_argument("--m", type=int, required=True)
        c.add_argument("--samples", type=int, default=100_000 if name == "variance" else 1_000_000)
        c.add_argument("--seed", type=int, default=0)
        if name == "variance":
            c.add_argument("--tol", type=float, default=theory.SERIES_TOL)
            c.add_argument("--format", choices=("csv", "pretty"), default="pretty")
            c.add_argument("--out")
        else:
            c.add_argument("--syndrome", type=int, required=True)

    s = sub.add_parser("sweep", help="theory vs Monte Carlo over a sigma x code grid")
    s.add_argument("--sigma-list", type=_float_list, default=[0.25, 0.5, 0.75])
    s.add_argument("--codes", nargs="+", default=["2,1", "3,1", "3,2"])
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=theory.SERIES_TOL)
    s.add_argument("--out")
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, threads=args.threads)
    if hasattr(args, "sigma"):
        cfg.sigma = [args.sigma]
    if hasattr(args, "sigma_list"):
        cfg.sigma = list(args.sigma_list)
    for name in ("n", "m", "samples", "seed", "tol", "format", "syndrome", "points"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    cfg.output_path = getattr(args, "out", None)
    if hasattr(args, "codes"):
        try:
            cfg.codes = [CodeParams.parse(c) for c in args.codes]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cfg.validate()
    return cfg


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args, out)
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        sys.stderr.write(f"isoqec {args.command}: error: {exc}\n")
        return EXIT_USAGE
    handler = {"density": cmd_density, "variance": cmd_variance, "sweep": cmd_sweep,
               "uniformity": cmd_uniformity}[cfg.command]
    try:
        return handler(cfg, out)
    except numerics.NumericalFailure as exc:
        sys.stderr.write(f"isoqec {cfg.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
