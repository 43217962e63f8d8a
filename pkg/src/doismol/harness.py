"""Study runner: evaluation grids, sup-norm differences, sweeps, CSV tables.

The grids reproduce the published evaluation points by integer-indexed
progressions (start + k*step, never floating accumulation) so two runs
are bit-identical, including the duplicated t=200 the generating rule
produces.  Sup-norm operations evaluate both models over the grid with
a shared spectral cache and column-wise truncation: a mode is dropped
only once its largest contribution anywhere on the grid falls below
term_tol, so no grid cell is truncated earlier than the scalar
operations would truncate it.
"""

import csv
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .solution import SpectralSolution, TruncationWarning, mean_binding_doi, mean_binding_smol
from .solution import rel_diff as _rel_diff
from .spectral import DOI, SMOL, Geometry, doi_eigenvalues, smol_eigenvalues

_NEAR_FRACTIONS = (5e-6, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3)


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: 107 radii in (r_b, R], 10229 nondecreasing times."""

    r_points: List[float]
    t_points: List[float]

    def __post_init__(self):
        if not self.r_points or not self.t_points:
            raise ValueError("grid must have at least one radius and one time")


def appendix_grids(geom: Geometry) -> GridSpec:
    """Build the standard evaluation grid for a geometry.

    Radii: seven points hugging the reaction radius (r_b plus r_b times
    5e-6 .. 5e-3) followed by the percent grid r_b + 0.01*k*(R - r_b),
    k = 1..100.  Times: three early snapshots, then 0.01..100 by 0.01,
    101..200 by 1, 200..1000 by 10 (duplicating 200), 1200..10000 by
    200.
    """
    r_b, R = geom.r_b, geom.R
    r = [r_b + r_b * f for f in _NEAR_FRACTIONS]
    r += [0.01 * k * (R - r_b) + r_b for k in range(1, 101)]
    t = [1e-5, 1e-4, 1e-3]
    t += [0.01 + k * 0.01 for k in range(10000)]
    t += [101.0 + k * 1.0 for k in range(100)]
    t += [200.0 + k * 10.0 for k in range(81)]
    t += [1200.0 + k * 200.0 for k in range(45)]
    return GridSpec(r_points=r, t_points=t)


# ---------------------------------------------------------------------------
# grid evaluation

def _mode_arrays(sol: SpectralSolution, factors, t_min: float):
    """Collect per-mode factor rows until the column-wise truncation stop.

    ``factors(n)`` returns the mode's spatial factor as an array (or a
    scalar for cdf curves).  Returns (eigenvalues, stacked rows).  Warns
    like the scalar series if the mode cap cuts the sum short, naming
    the worst grid cell.
    """
    dcoef = sol.geometry.D * t_min
    values: List[float] = []
    rows: List[np.ndarray] = []
    n = 0
    while True:
        if n >= len(sol._values) and sol._ensure(n + 1) <= n:
            worst = float(np.abs(rows[-1]).max()) * math.exp(-dcoef * values[-1])
            warnings.warn(
                TruncationWarning(
                    f"grid series still above term_tol={sol.term_tol:g} after "
                    f"{sol.max_modes} modes (worst cell bound {worst:.3g} at "
                    f"t={t_min:g})",
                    partial_sum=math.nan,
                    last_term=worst,
                ),
                stacklevel=3,
            )
            break
        row = sol._coefs[n] * np.atleast_1d(factors(n)).astype(float)
        values.append(sol._values[n])
        rows.append(row)
        if float(np.abs(row).max()) * math.exp(-dcoef * sol._values[n]) < sol.term_tol:
            break
        n += 1
    return np.asarray(values), np.vstack(rows)


def _density_grid(sol: SpectralSolution, r_points: Sequence[float], t_points: Sequence[float]) -> np.ndarray:
    """Survival density on the r x t grid, shaped (len(r), len(t))."""
    t = np.asarray(t_points, dtype=float)
    values, rows = _mode_arrays(
        sol,
        lambda n: np.array([sol._eigenfunction(sol._values[n], float(r)) for r in r_points]),
        float(t.min()),
    )
    out = rows.T @ np.exp(-sol.geometry.D * np.outer(values, t))
    return out / (4.0 * math.pi) if sol.scale_4pi else out


def _cdf_curve(sol: SpectralSolution, t_points: Sequence[float]) -> np.ndarray:
    """Binding-time CDF along the t grid, clamped to [0, 1] like cdf()."""
    t = np.asarray(t_points, dtype=float)
    values, rows = _mode_arrays(sol, lambda n: sol._weights[n], float(t.min()))
    survival = rows[:, 0] @ np.exp(-sol.geometry.D * np.outer(values, t))
    return np.clip(1.0 - survival, 0.0, 1.0)


def _solution_pair(geom: Geometry, lam: float, r0: float, term_tol: float, max_modes: int, scale_4pi: bool):
    doi = SpectralSolution(
        geom, DOI, r0, lambda_hat=lam / geom.D,
        term_tol=term_tol, max_modes=max_modes, scale_4pi=scale_4pi,
    )
    smol = SpectralSolution(
        geom, SMOL, r0, term_tol=term_tol, max_modes=max_modes, scale_4pi=scale_4pi,
    )
    return doi, smol


def _check_subsample(subsample: int) -> None:
    if not isinstance(subsample, int) or subsample < 1:
        raise ValueError(f"subsample must be a positive integer, got {subsample!r}")


def sup_norm_density_diff(
    geom: Geometry,
    lam: float,
    r0: float,
    *,
    subsample: int = 1,
    term_tol: float = 1e-10,
    max_modes: int = 5000,
) -> float:
    """Largest |density difference| between the models over the grid.

    Densities carry the 4pi rescaling (the unscaled norm is exactly
    4*pi times this value).  ``subsample`` keeps every subsample-th
    time point; radii are never thinned.
    """
    _check_subsample(subsample)
    grid = appendix_grids(geom)
    r = [ri for ri in grid.r_points if ri >= geom.r_b]
    t = grid.t_points[::subsample]
    doi, smol = _solution_pair(geom, lam, r0, term_tol, max_modes, scale_4pi=True)
    return float(np.abs(_density_grid(doi, r, t) - _density_grid(smol, r, t)).max())


def sup_norm_cdf_diff(
    geom: Geometry,
    lam: float,
    r0: float,
    *,
    subsample: int = 1,
    term_tol: float = 1e-10,
    max_modes: int = 5000,
) -> float:
    """Largest |CDF difference| between the models over the time grid."""
    _check_subsample(subsample)
    grid = appendix_grids(geom)
    t = grid.t_points[::subsample]
    doi, smol = _solution_pair(geom, lam, r0, term_tol, max_modes, scale_4pi=False)
    return float(np.abs(_cdf_curve(doi, t) - _cdf_curve(smol, t)).max())


# ---------------------------------------------------------------------------
# parameter sweeps

@dataclass(frozen=True)
class StudyRow:
    """One sweep cell: rate, trap radius, norms, means, relative gap.

    norm_density is the 4pi-rescaled sup-norm; norm_density_raw is the
    unscaled one (exactly 4*pi larger).  A nonempty error means the
    cell failed; its numeric fields are then NaN.
    """

    lam: float
    r_b: float
    norm_density: float
    norm_density_raw: float
    norm_cdf: float
    mean_doi: float
    mean_smol: float
    rel_diff: float
    error: str = ""

    def __post_init__(self):
        if self.error:
            return
        for name in ("norm_density", "norm_density_raw", "norm_cdf", "rel_diff"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")


def sweep(
    lambdas: Sequence[float],
    rbs: Sequence[float],
    geom: Geometry,
    r0: float,
    *,
    subsample: int = 1,
    term_tol: float = 1e-10,
    max_modes: int = 5000,
) -> List[StudyRow]:
    """Evaluate every (rate, trap radius) cell; rate outer, radius inner.

    Cells are independent, so a failure is recorded in the row's error
    column and the sweep continues.
    """
    if not lambdas or not rbs:
        raise ValueError("sweep needs at least one rate and one trap radius")
    rows: List[StudyRow] = []
    for lam in lambdas:
        for r_b in rbs:
            try:
                cell = Geometry(r_b=r_b, R=geom.R, D=geom.D)
                norm_density = sup_norm_density_diff(
                    cell, lam, r0,
                    subsample=subsample, term_tol=term_tol, max_modes=max_modes,
                )
                norm_cdf = sup_norm_cdf_diff(
                    cell, lam, r0,
                    subsample=subsample, term_tol=term_tol, max_modes=max_modes,
                )
                rows.append(StudyRow(
                    lam=lam,
                    r_b=r_b,
                    norm_density=norm_density,
                    norm_density_raw=4.0 * math.pi * norm_density,
                    norm_cdf=norm_cdf,
                    mean_doi=mean_binding_doi(cell, lam, r0),
                    mean_smol=mean_binding_smol(cell, r0),
                    rel_diff=_rel_diff(cell, lam, r0),
                ))
            except Exception as exc:
                nan = math.nan
                rows.append(StudyRow(
                    lam=lam, r_b=r_b,
                    norm_density=nan, norm_density_raw=nan, norm_cdf=nan,
                    mean_doi=nan, mean_smol=nan, rel_diff=nan,
                    error=f"{type(exc).__name__}: {exc}",
                ))
    return rows


# ---------------------------------------------------------------------------
# CSV output (fixed formatting so identical runs are byte-identical)

SWEEP_COLUMNS = [
    "lambda", "r_b", "norm_density_scaled", "norm_density_raw",
    "norm_cdf", "mean_doi", "mean_smol", "rel_diff", "error",
]
EIGEN_COLUMNS = ["n", "alpha", "mu", "gap"]


def fmt17(value) -> str:
    """Render a number with 17 significant digits, '.' decimal, no locale."""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, header: Sequence[str], rows) -> None:
    """Write a CSV file (or file-like object): mandatory header, LF line ends."""
    if hasattr(path, "write"):
        _write_csv_to(path, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_csv_to(fh, header, rows)


def _write_csv_to(fh, header, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt17(v) for v in row])


def sweep_table(rows: Sequence[StudyRow]):
    """Header and formatted data rows for a sweep CSV."""
    data = [
        [
            row.lam, row.r_b, row.norm_density, row.norm_density_raw,
            row.norm_cdf, row.mean_doi, row.mean_smol, row.rel_diff, row.error,
        ]
        for row in rows
    ]
    return SWEEP_COLUMNS, data


def eigen_table(geom: Geometry, lam: float, count: int):
    """Header and rows (n, alpha, mu, gap) for the leading eigenvalues."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    alphas = smol_eigenvalues(geom, count).values()
    mus = doi_eigenvalues(geom, lam / geom.D, count).values()
    data = [
        [n + 1, alphas[n], mus[n], alphas[n] - mus[n]]
        for n in range(count)
    ]
    return EIGEN_COLUMNS, data
