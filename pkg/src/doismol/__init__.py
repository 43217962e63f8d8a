"""Binding kinetics of a diffusing particle in a reflecting ball.

Two absorption models for a spherical binding site of radius r_b inside
a ball of radius R: a partial-reactivity volume sink with rate lambda
(the "doi" model) and a perfectly absorbing boundary at r_b (the "smol"
model).  The package provides eigenvalue spectra, spectral solutions
for the survival density and binding-time CDF, closed-form mean binding
times, a Brownian-dynamics oracle, and a comparison harness with a CLI.
"""

from .harness import (
    GridSpec,
    StudyRow,
    appendix_grids,
    eigen_table,
    fmt17,
    sup_norm_cdf_diff,
    sup_norm_density_diff,
    sweep,
    sweep_table,
    write_csv,
)
from .mc import (
    BindingSample,
    McConfig,
    ecdf_at,
    simulate,
)
from .numerics import (
    AccuracyError,
    Bracket,
    BracketError,
    EvaluationError,
    SlopeFit,
    find_root,
    integrate,
    loglog_slope,
    sinh_ratio,
)
from .solution import (
    BindingStats,
    SlowConvergenceWarning,
    SpectralSolution,
    TruncationWarning,
    binding_stats,
    cdf,
    density_doi,
    density_smol,
    mean_binding_doi,
    mean_binding_smol,
    mean_diff,
    rel_diff,
)
from .spectral import (
    DOI,
    SMOL,
    EigenMode,
    ExhaustionError,
    Geometry,
    ModeSet,
    PoleError,
    core_norm_sq,
    core_weight,
    doi_eigenvalues,
    f_smol,
    mode_norms,
    phi,
    psi,
    reaction_kernel_A,
    shell_norm_sq,
    shell_weight,
    smol_eigenvalues,
    smol_poles,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BindingSample",
    "BindingStats",
    "Bracket",
    "BracketError",
    "DOI",
    "EigenMode",
    "EvaluationError",
    "ExhaustionError",
    "Geometry",
    "GridSpec",
    "McConfig",
    "ModeSet",
    "PoleError",
    "SMOL",
    "SlopeFit",
    "SlowConvergenceWarning",
    "SpectralSolution",
    "StudyRow",
    "TruncationWarning",
    "appendix_grids",
    "binding_stats",
    "cdf",
    "core_norm_sq",
    "core_weight",
    "density_doi",
    "density_smol",
    "doi_eigenvalues",
    "ecdf_at",
    "eigen_table",
    "f_smol",
    "find_root",
    "fmt17",
    "integrate",
    "loglog_slope",
    "mean_binding_doi",
    "mean_binding_smol",
    "mean_diff",
    "mode_norms",
    "phi",
    "psi",
    "reaction_kernel_A",
    "rel_diff",
    "shell_norm_sq",
    "shell_weight",
    "simulate",
    "sinh_ratio",
    "smol_eigenvalues",
    "smol_poles",
    "sup_norm_cdf_diff",
    "sup_norm_density_diff",
    "sweep",
    "sweep_table",
    "write_csv",
    "__version__",
]
