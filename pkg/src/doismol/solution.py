"""Series solutions, binding-time CDFs, and closed-form mean binding times.

The survival density of a particle that starts at radius r0 is expanded
over the eigenmodes of the chosen model.  Each mode contributes
norm * u_n(r0) * u_n(r) * exp(-D * value * t); the series is truncated
at the first term whose magnitude drops below ``term_tol`` (that term
is included).  Integrating the expansion over the ball term by term
gives the binding-time CDF without quadrature, and the mean binding
times have exact elementary expressions that need no series at all.

Densities carry a presentation flag ``scale_4pi``: the raw expansion is
normalized so the r^2-weighted radial integral of the initial data is
one, and dividing by 4 pi converts it to a volume density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional

from .numerics import sinh_ratio
from .spectral import (
    DOI,
    SMOL,
    EigenMode,
    Geometry,
    ModeSet,
    core_weight,
    doi_eigenvalues,
    mode_norms,
    phi,
    psi,
    shell_weight,
    smol_eigenvalues,
)
from .spectral import _g7

__all__ = [
    "BindingStats",
    "SlowConvergenceWarning",
    "SpectralSolution",
    "TruncationWarning",
    "binding_stats",
    "cdf",
    "density_doi",
    "density_smol",
    "mean_binding_doi",
    "mean_binding_smol",
    "mean_diff",
    "rel_diff",
]

MIN_TIME = 1e-8
SLOW_TIME = 1e-5


class TruncationWarning(UserWarning):
    """The mode cap was reached before the series met its tolerance.

    Carries the partial sum and the magnitude of the last term added.
    """

    def __init__(self, message: str, partial_sum: float, last_term: float):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class SlowConvergenceWarning(UserWarning):
    """Requested time is small enough that the series converges slowly."""


class SpectralSolution:
    """Eigenmode expansion of the survival problem for one start radius.

    Modes are computed lazily and cached: whenever the truncation rule
    needs more terms than are cached, the spectrum is recomputed with a
    1.6x larger count (up to ``max_modes``).  A precomputed ModeSet may
    be passed to seed the cache.

    ``initial_inner_product``, when given, replaces the point-source
    weight u_n(r0) with a custom inner product (g, u_n) evaluated per
    mode, for initial data other than the delta at r0.
    """

    def __init__(
        self,
        geometry: Geometry,
        model: str,
        r0: float,
        lambda_hat: Optional[float] = None,
        modes: Optional[ModeSet] = None,
        term_tol: float = 1e-10,
        max_modes: int = 5000,
        scale_4pi: bool = False,
        initial_inner_product: Optional[Callable[[EigenMode], float]] = None,
    ):
        if model not in (SMOL, DOI):
            raise ValueError(f"model must be {SMOL!r} or {DOI!r}, got {model!r}")
        if model == DOI:
            if lambda_hat is None or lambda_hat < 0.0:
                raise ValueError("doi model needs lambda_hat >= 0")
        elif lambda_hat is not None:
            raise ValueError("lambda_hat only applies to the doi model")
        if not geometry.r_b < r0 <= geometry.R:
            raise ValueError(f"need r_b < r0 <= R, got r0={r0}")
        if not term_tol > 0.0:
            raise ValueError(f"need term_tol > 0, got {term_tol}")
        if max_modes < 1:
            raise ValueError(f"need max_modes >= 1, got {max_modes}")
        if modes is not None:
            if modes.model != model:
                raise ValueError(f"seed modes are for model {modes.model!r}")
            if model == DOI and modes.lambda_hat != lambda_hat:
                raise ValueError("seed modes were computed for a different rate")
            if modes.geometry != geometry:
                raise ValueError("seed modes were computed for a different geometry")

        self.geometry = geometry
        self.model = model
        self.r0 = r0
        self.lambda_hat = lambda_hat
        self.term_tol = term_tol
        self.max_modes = max_modes
        self.scale_4pi = scale_4pi
        self.initial_inner_product = initial_inner_product

        # parallel per-mode caches: eigenvalue, norm * (g, u_n), I_n
        self._values: List[float] = []
        self._coefs: List[float] = []
        self._weights: List[float] = []
        if modes is not None:
            self._absorb(modes)

    def _eigenfunction(self, value: float, r: float) -> float:
        if self.model == SMOL:
            return phi(self.geometry, value, r)
        return psi(self.geometry, self.lambda_hat, value, r)

    def _absorb(self, modes: ModeSet) -> None:
        if modes.count <= len(self._values):
            return
        if any(m.norm_const is None for m in modes.modes):
            modes = mode_norms(self.geometry, modes)
        g = self.geometry
        values, coefs, weights = [], [], []
        for m in modes.modes:
            if self.initial_inner_product is not None:
                source = self.initial_inner_product(m)
            else:
                source = self._eigenfunction(m.value, self.r0)
            w = shell_weight(g, m.value)
            if self.model == DOI:
                w += core_weight(g, self.lambda_hat, m.value)
            values.append(m.value)
            coefs.append(m.norm_const * source)
            weights.append(w)
        self._values, self._coefs, self._weights = values, coefs, weights

    def _ensure(self, count: int) -> int:
        """Grow the cache to hold >= count modes; return what is available."""
        count = min(count, self.max_modes)
        have = len(self._values)
        if have >= count:
            return have
        target = min(self.max_modes, max(count, math.ceil(1.6 * have), 16))
        if self.model == SMOL:
            modes = smol_eigenvalues(self.geometry, target)
        else:
            modes = doi_eigenvalues(self.geometry, self.lambda_hat, target)
        self._absorb(mode_norms(self.geometry, modes))
        return len(self._values)


def _check_time(t: float) -> None:
    if not t >= MIN_TIME:
        raise ValueError(f"need t >= {MIN_TIME:g} s, got {t}")
    if t < SLOW_TIME:
        warnings.warn(
            SlowConvergenceWarning(
                f"t={t:g} s is below {SLOW_TIME:g} s; the series converges "
                "slowly and may hit the mode cap"
            ),
            stacklevel=3,
        )


def _sum_series(sol: SpectralSolution, t: float, factor) -> float:
    """Sum factor(n)*coef_n*exp(-D*value_n*t) under the truncation rule."""
    dcoef = sol.geometry.D * t
    terms: List[float] = []
    n = 0
    while True:
        if n >= len(sol._values) and sol._ensure(n + 1) <= n:
            partial = math.fsum(terms)
            last = abs(terms[-1]) if terms else math.inf
            warnings.warn(
                TruncationWarning(
                    f"series still above term_tol={sol.term_tol:g} after "
                    f"{sol.max_modes} modes (partial sum {partial:.6g}, "
                    f"last term {last:.3g})",
                    partial_sum=partial,
                    last_term=last,
                ),
                stacklevel=3,
            )
            return partial
        term = sol._coefs[n] * factor(n) * math.exp(-dcoef * sol._values[n])
        terms.append(term)
        if abs(term) < sol.term_tol:
            return math.fsum(terms)
        n += 1


def density_smol(sol: SpectralSolution, r: float, t: float) -> float:
    """Survival density of the absorbing-boundary model at radius r, time t."""
    if sol.model != SMOL:
        raise ValueError("solution was built for the doi model")
    g = sol.geometry
    if not g.r_b <= r <= g.R:
        raise ValueError(f"need r_b <= r <= R, got r={r}")
    _check_time(t)
    out = _sum_series(sol, t, lambda n: phi(g, sol._values[n], r))
    return out / (4.0 * math.pi) if sol.scale_4pi else out


def density_doi(sol: SpectralSolution, r: float, t: float) -> float:
    """Survival density of the volume-reactivity model at radius r, time t."""
    if sol.model != DOI:
        raise ValueError("solution was built for the smol model")
    g = sol.geometry
    if not 0.0 <= r <= g.R:
        raise ValueError(f"need 0 <= r <= R, got r={r}")
    _check_time(t)
    out = _sum_series(sol, t, lambda n: psi(g, sol.lambda_hat, sol._values[n], r))
    return out / (4.0 * math.pi) if sol.scale_4pi else out


def cdf(sol: SpectralSolution, t: float) -> float:
    """Probability that binding happened by time t.

    One minus the r^2-weighted integral of the survival density, with
    every mode integrated in closed form.
    """
    _check_time(t)
    survival = _sum_series(sol, t, lambda n: sol._weights[n])
    # Truncation can leave the summed survival a few ulps outside [0, 1];
    # a CDF must not.
    return min(1.0, max(0.0, 1.0 - survival))


def mean_binding_smol(geom: Geometry, r0: float) -> float:
    """Mean binding time of the absorbing-boundary model from radius r0."""
    if not geom.r_b <= r0 <= geom.R:
        raise ValueError(f"need r_b <= r0 <= R, got r0={r0}")
    D = geom.D
    return (geom.r_b**2 - r0**2) / (6.0 * D) + (geom.R**3 / (3.0 * D)) * (
        1.0 / geom.r_b - 1.0 / r0
    )


def _mean_gap(geom: Geometry, lam: float) -> float:
    # The two means differ by a start-independent offset:
    # 1/lambda + (R^3 - r_b^3) / (3 D r_b (b coth b - 1)), b = sqrt(lam/D) r_b.
    lam_hat = lam / geom.D
    b = math.sqrt(lam_hat) * geom.r_b
    denom = b * b * _g7(b)  # equals b coth b - 1, stable for any b
    return 1.0 / lam + (geom.R**3 - geom.r_b**3) / (3.0 * geom.D * geom.r_b * denom)


def mean_binding_doi(geom: Geometry, lam: float, r0: float) -> float:
    """Mean binding time of the volume-reactivity model from radius r0.

    Exact piecewise closed form: outside the reactive core it is the
    absorbing-model mean plus a start-independent offset; inside, the
    profile rises toward the center through a sinh ratio (evaluated
    overflow-safely for any rate).
    """
    if not 0.0 <= r0 <= geom.R:
        raise ValueError(f"need 0 <= r0 <= R, got r0={r0}")
    if not lam > 0.0:
        raise ValueError(f"need lam > 0, got {lam}")
    if r0 >= geom.r_b:
        return mean_binding_smol(geom, r0) + _mean_gap(geom, lam)

    lam_hat = lam / geom.D
    q = math.sqrt(lam_hat)
    b = q * geom.r_b
    if r0 == 0.0:
        # limit of sinh(q r0)/(r0 sinh b) as r0 -> 0, without overflow
        ratio_over_r0 = q * 2.0 * math.exp(-b) / (-math.expm1(-2.0 * b))
    else:
        ratio_over_r0 = sinh_ratio(q * r0, b) / r0
    shell = (geom.R**3 - geom.r_b**3) / (3.0 * geom.D)
    return 1.0 / lam + shell * ratio_over_r0 / (b * b * _g7(b))


def mean_diff(geom: Geometry, lam: float, r0: float) -> float:
    """Exact difference of mean binding times (reactivity minus absorbing)."""
    if not geom.r_b < r0 <= geom.R:
        raise ValueError(f"need r_b < r0 <= R, got r0={r0}")
    if not lam > 0.0:
        raise ValueError(f"need lam > 0, got {lam}")
    return _mean_gap(geom, lam)


def rel_diff(geom: Geometry, lam: float, r0: float) -> float:
    """Difference of means relative to the absorbing-model mean."""
    return abs(mean_diff(geom, lam, r0)) / mean_binding_smol(geom, r0)


@dataclass(frozen=True)
class BindingStats:
    """Mean binding time plus the CDF callable, with the run's parameters."""

    mean: float
    cdf: Callable[[float], float]
    model: str
    params: dict


def binding_stats(sol: SpectralSolution) -> BindingStats:
    """Bundle the closed-form mean and series CDF of a solution."""
    g = sol.geometry
    params = {
        "r_b": g.r_b,
        "R": g.R,
        "D": g.D,
        "r0": sol.r0,
        "lambda_hat": sol.lambda_hat,
    }
    if sol.model == SMOL:
        mean = mean_binding_smol(g, sol.r0)
    else:
        mean = mean_binding_doi(g, sol.lambda_hat * g.D, sol.r0)
    return BindingStats(
        mean=mean, cdf=lambda t: cdf(sol, t), model=sol.model, params=params
    )
