"""Command-line interface: eigen, density, cdf, mean, sweep, mc, slope.

Parameter precedence is CLI flag > JSON config file > documented
defaults (R=1, D=10, r_b=1e-3, r0=R).  Usage problems (bad flags,
invalid geometry, malformed config) exit 2; failures while computing
exit 1; success exits 0.
"""

import argparse
import csv
import json
import math
import sys
from typing import List, Optional, Sequence

from .harness import (
    _cdf_curve,
    _density_grid,
    _solution_pair,
    appendix_grids,
    eigen_table,
    fmt17,
    sweep,
    sweep_table,
    write_csv,
)
from .mc import McConfig, simulate
from .numerics import loglog_slope
from .solution import mean_binding_doi, mean_binding_smol, mean_diff, rel_diff
from .spectral import DOI, SMOL, Geometry
from .svgplot import line_plot

_DEFAULTS = {"rb": 1e-3, "R": 1.0, "D": 10.0}
_CONFIG_KEYS = ("rb", "R", "D", "lambda", "r0", "count", "seed")


class UsageError(ValueError):
    """Bad flags, config, or geometry: reported on stderr with exit 2."""


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rb", type=float, help="reaction radius r_b (um)")
    p.add_argument("--R", type=float, help="ball radius R (um)")
    p.add_argument("--D", type=float, help="diffusivity D (um^2/s)")
    p.add_argument("--lambda", dest="lam", type=float, help="reaction rate (1/s)")
    p.add_argument("--r0", type=float, help="start radius (um), default R")
    p.add_argument("--count", type=int, help="mode count (eigen) or path count (mc)")
    p.add_argument("--seed", type=int, help="RNG seed (mc)")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--config", help="JSON file with default parameter values")
    p.add_argument("--svg", help="also write an SVG line plot here")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doismol",
        description="Binding kinetics of a diffusing particle: spectral "
        "solutions, parameter sweeps, and a Brownian-dynamics oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="leading eigenvalues of both models")
    _common_flags(p)
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser("density", help="survival densities over the standard grid")
    _common_flags(p)
    p.add_argument("--subsample", type=int, default=1, help="keep every k-th time point")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("cdf", help="binding-time CDFs over the standard time grid")
    _common_flags(p)
    p.add_argument("--subsample", type=int, default=1, help="keep every k-th time point")
    p.set_defaults(func=_cmd_cdf)

    p = sub.add_parser("mean", help="closed-form mean binding times and their gap")
    _common_flags(p)
    p.set_defaults(func=_cmd_mean)

    p = sub.add_parser("sweep", help="study table over rates and trap radii")
    _common_flags(p)
    p.add_argument("--lambdas", required=True, help="comma-separated rates (1/s)")
    p.add_argument("--rbs", required=True, help="comma-separated trap radii (um)")
    p.add_argument("--subsample", type=int, default=1, help="keep every k-th time point")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("mc", help="Brownian-dynamics binding-time sample")
    _common_flags(p)
    p.add_argument("--model", choices=(SMOL, DOI), default=SMOL)
    p.add_argument("--dt", type=float, default=5e-7, help="time step (s)")
    p.add_argument("--tmax", type=float, default=20.0, help="censoring horizon (s)")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("slope", help="log-log slope of two CSV columns")
    _common_flags(p)
    p.add_argument("csvfile", help="input CSV with the data to fit")
    p.add_argument("--x-col", default="x", help="x column name (default x)")
    p.add_argument("--y-col", default="y", help="y column name (default y)")
    p.set_defaults(func=_cmd_slope)

    return parser


# ---------------------------------------------------------------------------
# parameter resolution

def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        if key not in _CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r} (allowed: {', '.join(_CONFIG_KEYS)})")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UsageError(f"config key {key!r} must be a number, got {value!r}")
    return cfg


def _resolve(args: argparse.Namespace) -> dict:
    """Merge CLI flags over config-file values over defaults."""
    cfg = _load_config(args.config) if args.config else {}

    def pick(flag, key, default=None):
        if flag is not None:
            return flag
        return cfg.get(key, default)

    return {
        "rb": float(pick(args.rb, "rb", _DEFAULTS["rb"])),
        "R": float(pick(args.R, "R", _DEFAULTS["R"])),
        "D": float(pick(args.D, "D", _DEFAULTS["D"])),
        "lam": pick(args.lam, "lambda"),
        "r0": pick(args.r0, "r0"),
        "count": pick(args.count, "count"),
        "seed": pick(args.seed, "seed"),
    }


def _geometry(p: dict) -> Geometry:
    try:
        return Geometry(r_b=p["rb"], R=p["R"], D=p["D"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _start_radius(p: dict, geom: Geometry) -> float:
    r0 = p["r0"] if p["r0"] is not None else geom.R
    if not geom.r_b < r0 <= geom.R:
        raise UsageError(f"need r_b < r0 <= R, got r0={r0}")
    return float(r0)


def _rate(p: dict) -> float:
    lam = p["lam"]
    if lam is None:
        raise UsageError("--lambda is required for this subcommand")
    if not (math.isfinite(lam) and lam > 0.0):
        raise UsageError(f"need a positive finite rate, got {lam}")
    return float(lam)


def _count(p: dict, default: int) -> int:
    count = p["count"] if p["count"] is not None else default
    count = int(count)
    if count < 1:
        raise UsageError(f"need count >= 1, got {count}")
    return count


def _subsample(args: argparse.Namespace) -> int:
    if args.subsample < 1:
        raise UsageError(f"need subsample >= 1, got {args.subsample}")
    return args.subsample


def _emit(args: argparse.Namespace, header: Sequence[str], rows) -> None:
    if args.out:
        write_csv(args.out, header, rows)
    else:
        write_csv(sys.stdout, header, rows)


def _maybe_svg(args: argparse.Namespace, series, **kwargs) -> None:
    if args.svg:
        line_plot(args.svg, series, **kwargs)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_eigen(args, p) -> int:
    geom = _geometry(p)
    lam = _rate(p)
    count = _count(p, default=10)
    header, rows = eigen_table(geom, lam, count)
    _emit(args, header, rows)
    _maybe_svg(
        args,
        [("alpha - mu", [r[0] for r in rows], [r[3] for r in rows])],
        title="Eigenvalue gap", xlabel="n", ylabel="gap (1/um^2)", log_y=True,
    )
    return 0


def _cmd_density(args, p) -> int:
    geom = _geometry(p)
    lam = _rate(p)
    r0 = _start_radius(p, geom)
    step = _subsample(args)
    grid = appendix_grids(geom)
    t = grid.t_points[::step]
    doi, smol = _solution_pair(geom, lam, r0, term_tol=1e-10, max_modes=5000, scale_4pi=True)
    dd = _density_grid(doi, grid.r_points, t)
    ds = _density_grid(smol, grid.r_points, t)
    rows = (
        [r, tj, dd[i, j], ds[i, j], abs(dd[i, j] - ds[i, j])]
        for i, r in enumerate(grid.r_points)
        for j, tj in enumerate(t)
    )
    _emit(args, ["r", "t", "density_doi", "density_smol", "abs_diff"], rows)
    if args.out:
        print(f"sup |density_doi - density_smol| = {fmt17(abs(dd - ds).max())}")
    j_mid = len(t) // 2
    _maybe_svg(
        args,
        [
            ("doi", grid.r_points, dd[:, j_mid]),
            ("smol", grid.r_points, ds[:, j_mid]),
        ],
        title=f"Survival density at t={t[j_mid]:g} s",
        xlabel="r (um)", ylabel="density (1/um^3, per 4pi)",
    )
    return 0


def _cmd_cdf(args, p) -> int:
    geom = _geometry(p)
    lam = _rate(p)
    r0 = _start_radius(p, geom)
    step = _subsample(args)
    t = appendix_grids(geom).t_points[::step]
    doi, smol = _solution_pair(geom, lam, r0, term_tol=1e-10, max_modes=5000, scale_4pi=False)
    cd = _cdf_curve(doi, t)
    cs = _cdf_curve(smol, t)
    rows = ([tj, cd[j], cs[j], abs(cd[j] - cs[j])] for j, tj in enumerate(t))
    _emit(args, ["t", "cdf_doi", "cdf_smol", "abs_diff"], rows)
    if args.out:
        print(f"sup |cdf_doi - cdf_smol| = {fmt17(abs(cd - cs).max())}")
    _maybe_svg(
        args,
        [("doi", t, cd), ("smol", t, cs)],
        title="Binding-time CDF", xlabel="t (s)", ylabel="P[T < t]", log_x=True,
    )
    return 0


def _cmd_mean(args, p) -> int:
    geom = _geometry(p)
    lam = _rate(p)
    r0 = _start_radius(p, geom)
    m_doi = mean_binding_doi(geom, lam, r0)
    m_smol = mean_binding_smol(geom, r0)
    gap = mean_diff(geom, lam, r0)
    rel = rel_diff(geom, lam, r0)
    print(f"mean_doi = {fmt17(m_doi)}")
    print(f"mean_smol = {fmt17(m_smol)}")
    print(f"mean_diff = {fmt17(gap)}")
    print(f"rel_diff = {fmt17(rel)}")
    if args.out:
        write_csv(
            args.out,
            ["lambda", "r_b", "r0", "mean_doi", "mean_smol", "mean_diff", "rel_diff"],
            [[lam, geom.r_b, r0, m_doi, m_smol, gap, rel]],
        )
    if args.svg:
        print("note: --svg has no plot for mean; ignored", file=sys.stderr)
    return 0


def _float_list(text: str, what: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {what} list {text!r}: {exc}") from exc
    if not values:
        raise UsageError(f"need at least one value in {what}")
    return values


def _cmd_sweep(args, p) -> int:
    geom = _geometry(p)
    r0 = _start_radius(p, geom)
    lambdas = _float_list(args.lambdas, "--lambdas")
    rbs = _float_list(args.rbs, "--rbs")
    step = _subsample(args)
    rows = sweep(lambdas, rbs, geom, r0, subsample=step)
    header, data = sweep_table(rows)
    _emit(args, header, data)
    series = []
    for r_b in rbs:
        cells = [row for row in rows if row.r_b == r_b and not row.error]
        if cells:
            series.append((f"r_b={r_b:g}", [c.lam for c in cells], [c.norm_cdf for c in cells]))
    if series:
        _maybe_svg(
            args, series,
            title="sup |CDF difference|", xlabel="rate (1/s)", ylabel="sup norm",
            log_x=True, log_y=True,
        )
    return 0


def _cmd_mc(args, p) -> int:
    geom = _geometry(p)
    r0 = _start_radius(p, geom)
    count = _count(p, default=1000)
    seed = int(p["seed"]) if p["seed"] is not None else 1
    lam = p["lam"]
    if args.model == SMOL and lam is not None:
        raise UsageError("--lambda only applies to the doi model")
    if args.model == DOI:
        lam = _rate(p)
    try:
        cfg = McConfig(
            model=args.model, dt=args.dt, n_paths=count, seed=seed,
            t_max=args.tmax, lam=lam if lam is not None else 0.0,
        )
        sample = simulate(geom, r0, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    header = [
        "model", "lambda", "r_b", "R", "D", "r0", "dt", "n_paths", "seed",
        "t_max", "n_bound", "censored_fraction", "mean_restricted", "ci95_halfwidth",
    ]
    row = [
        args.model, lam if lam is not None else 0.0, geom.r_b, geom.R, geom.D,
        r0, args.dt, count, seed, args.tmax, sample.n_bound,
        sample.censored_fraction, sample.mean_restricted, sample.ci95_halfwidth,
    ]
    _emit(args, header, [row])
    if args.out:
        print(f"mean_restricted = {fmt17(sample.mean_restricted)}")
        print(f"ci95_halfwidth = {fmt17(sample.ci95_halfwidth)}")
    if args.svg:
        if sample.n_bound == 0:
            print("note: no bound paths; skipping --svg", file=sys.stderr)
        else:
            hit = sample.times[sample.bound]
            _maybe_svg(
                args,
                [("ecdf", hit, [(k + 1) / sample.n_paths for k in range(len(hit))])],
                title="Empirical binding-time CDF", xlabel="t (s)", ylabel="fraction bound",
            )
    return 0


def _cmd_slope(args, p) -> int:
    try:
        with open(args.csvfile, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or args.x_col not in reader.fieldnames or args.y_col not in reader.fieldnames:
                raise UsageError(
                    f"columns {args.x_col!r}, {args.y_col!r} not both present in {args.csvfile}"
                )
            records = list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read {args.csvfile}: {exc}") from exc
    points = [(float(rec[args.x_col]), float(rec[args.y_col])) for rec in records]
    fit = loglog_slope(points)
    print(f"slope = {fmt17(fit.slope)}")
    print(f"intercept = {fmt17(fit.intercept)}")
    print(f"residual_rms = {fmt17(fit.residual_rms)}")
    print(f"n_points = {fit.n_points}")
    if args.out:
        write_csv(
            args.out,
            ["slope", "intercept", "residual_rms", "n_points"],
            [[fit.slope, fit.intercept, fit.residual_rms, fit.n_points]],
        )
    xs = [x for x, _ in points]
    x_lo, x_hi = min(xs), max(xs)
    fit_y = [math.exp(fit.intercept) * x**fit.slope for x in (x_lo, x_hi)]
    _maybe_svg(
        args,
        [
            ("data", xs, [y for _, y in points]),
            (f"fit p={fit.slope:.3g}", [x_lo, x_hi], fit_y),
        ],
        title="Log-log fit", xlabel=args.x_col, ylabel=args.y_col,
        log_x=True, log_y=True,
    )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        params = _resolve(args)
        return args.func(args, params)
    except UsageError as exc:
        print(f"doismol: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"doismol: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
