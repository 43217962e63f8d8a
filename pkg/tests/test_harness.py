"""Tests for the study runner: grids, sup-norm differences, sweeps, CSV."""

import io
import math

import numpy as np
import pytest

from doismol.harness import (
    GridSpec,
    StudyRow,
    _cdf_curve,
    _density_grid,
    appendix_grids,
    eigen_table,
    fmt17,
    sup_norm_cdf_diff,
    sup_norm_density_diff,
    sweep,
    sweep_table,
    write_csv,
)
from doismol.numerics import loglog_slope
from doismol.solution import (
    SpectralSolution,
    TruncationWarning,
    cdf,
    density_doi,
    density_smol,
    mean_binding_doi,
    mean_binding_smol,
    rel_diff,
)
from doismol.spectral import DOI, SMOL, Geometry, doi_eigenvalues, smol_eigenvalues

GEOM_MILLI = Geometry(r_b=1e-3, R=1.0, D=10.0)
GEOM_CENTI = Geometry(r_b=1e-2, R=1.0, D=10.0)
GEOM_WIDE = Geometry(r_b=0.1, R=1.0, D=10.0)

# Largest |CDF gap| between the models over the standard time grid at
# lam=1e11 /s, r_b=1e-3: a few parts in a thousand.
SUP_CDF_LAM1E11 = 0.003703927683310626

# 4pi-rescaled density sup-norms on the every-10th-time grid.
SUP_DEN_LAM1E6_CENTI = 0.07505692709752522
SUP_DEN_LAM1E14_CENTI = 7.5241418087067555e-06
SUP_DEN_LAM1E8_CENTI = 0.007525017090462921
SUP_DEN_LAM1E8_MILLI = 0.0752077960928212

# Relative mean-binding-time gap at lam=1e11 /s, r_b=1e-3: just above
# one percent.
REL_DIFF_LAM1E11 = 0.010116184362695041


class TestAppendixGrids:
    def test_counts(self):
        grid = appendix_grids(GEOM_MILLI)
        assert len(grid.r_points) == 107
        assert len(grid.t_points) == 10229
        assert 10229 == 3 + 10000 + 100 + 81 + 45

    def test_radius_values(self):
        for geom in (GEOM_MILLI, GEOM_CENTI, GEOM_WIDE):
            r = appendix_grids(geom).r_points
            assert r[0] == pytest.approx(geom.r_b * (1.0 + 5e-6), rel=1e-15)
            assert r[6] == pytest.approx(geom.r_b * 1.005, rel=1e-15)
            assert r[-1] == pytest.approx(geom.R, rel=1e-15)
            assert all(b > a for a, b in zip(r, r[1:]))
            assert all(geom.r_b < ri <= geom.R for ri in r)

    def test_time_values(self):
        t = appendix_grids(GEOM_MILLI).t_points
        assert t[:3] == [1e-5, 1e-4, 1e-3]
        assert t[3] == 0.01
        assert t[10003] == 101.0
        assert t[10103] == 200.0
        assert t[10184] == 1200.0
        assert t[-1] == 10000.0
        assert t.count(200.0) == 2
        assert np.all(np.diff(t) >= 0.0)

    def test_deterministic(self):
        a = appendix_grids(GEOM_CENTI)
        b = appendix_grids(GEOM_CENTI)
        assert a.r_points == b.r_points
        assert a.t_points == b.t_points

    def test_gridspec_rejects_empty(self):
        with pytest.raises(ValueError):
            GridSpec(r_points=[], t_points=[1.0])
        with pytest.raises(ValueError):
            GridSpec(r_points=[0.5], t_points=[])


class TestGridEvaluators:
    R_SMALL = [0.1005, 0.3, 0.55, 0.8, 1.0]
    T_SMALL = [1e-3, 0.05, 0.4]

    def test_matches_scalar_density_smol(self):
        sol = SpectralSolution(GEOM_WIDE, SMOL, 1.0, scale_4pi=True)
        grid = _density_grid(sol, self.R_SMALL, self.T_SMALL)
        for i, r in enumerate(self.R_SMALL):
            for j, t in enumerate(self.T_SMALL):
                fresh = SpectralSolution(GEOM_WIDE, SMOL, 1.0, scale_4pi=True)
                assert grid[i, j] == pytest.approx(density_smol(fresh, r, t), abs=1e-9)

    def test_matches_scalar_density_doi(self):
        sol = SpectralSolution(GEOM_WIDE, DOI, 1.0, lambda_hat=1e4, scale_4pi=True)
        grid = _density_grid(sol, self.R_SMALL, self.T_SMALL)
        for i, r in enumerate(self.R_SMALL):
            for j, t in enumerate(self.T_SMALL):
                fresh = SpectralSolution(GEOM_WIDE, DOI, 1.0, lambda_hat=1e4, scale_4pi=True)
                assert grid[i, j] == pytest.approx(density_doi(fresh, r, t), abs=1e-9)

    def test_matches_scalar_cdf(self):
        sol = SpectralSolution(GEOM_WIDE, DOI, 1.0, lambda_hat=1e3)
        curve = _cdf_curve(sol, self.T_SMALL)
        for j, t in enumerate(self.T_SMALL):
            fresh = SpectralSolution(GEOM_WIDE, DOI, 1.0, lambda_hat=1e3)
            assert curve[j] == pytest.approx(cdf(fresh, t), abs=1e-9)

    def test_cdf_curve_clamped(self):
        sol = SpectralSolution(GEOM_WIDE, SMOL, 1.0)
        curve = _cdf_curve(sol, [1e-5, 1e-4, 1.0, 100.0])
        assert np.all(curve >= 0.0)
        assert np.all(curve <= 1.0)

    def test_same_solution_differences_vanish(self):
        sol = SpectralSolution(GEOM_WIDE, SMOL, 1.0, scale_4pi=True)
        a = _density_grid(sol, self.R_SMALL, self.T_SMALL)
        b = _density_grid(sol, self.R_SMALL, self.T_SMALL)
        assert float(np.abs(a - b).max()) == 0.0

    def test_mode_cap_warns_with_worst_cell(self):
        sol = SpectralSolution(GEOM_WIDE, SMOL, 1.0, max_modes=3)
        with pytest.warns(TruncationWarning, match="worst cell"):
            _density_grid(sol, self.R_SMALL, [1e-3])
        sol2 = SpectralSolution(GEOM_WIDE, SMOL, 1.0, max_modes=3)
        with pytest.warns(TruncationWarning):
            _cdf_curve(sol2, [1e-3])


class TestSupNorms:
    def test_cdf_norm_reference_value(self):
        value = sup_norm_cdf_diff(GEOM_MILLI, 1e11, 1.0)
        assert value == pytest.approx(SUP_CDF_LAM1E11, rel=1e-9)
        assert 2e-4 <= value <= 5e-3

    def test_density_norm_reference_values(self):
        assert sup_norm_density_diff(GEOM_CENTI, 1e6, 1.0, subsample=10) == pytest.approx(
            SUP_DEN_LAM1E6_CENTI, rel=1e-9
        )
        assert sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0, subsample=10) == pytest.approx(
            SUP_DEN_LAM1E8_CENTI, rel=1e-9
        )

    def test_density_norm_falls_with_rate(self):
        # two orders of magnitude in the norm across lam 1e6 -> 1e14
        hi = sup_norm_density_diff(GEOM_CENTI, 1e6, 1.0, subsample=10)
        lo = sup_norm_density_diff(GEOM_CENTI, 1e14, 1.0, subsample=10)
        assert lo == pytest.approx(SUP_DEN_LAM1E14_CENTI, rel=1e-9)
        assert hi / lo >= 10.0

    def test_density_norm_grows_as_trap_shrinks(self):
        wide = sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0, subsample=10)
        narrow = sup_norm_density_diff(GEOM_MILLI, 1e8, 1.0, subsample=10)
        assert narrow == pytest.approx(SUP_DEN_LAM1E8_MILLI, rel=1e-9)
        assert 3.0 <= narrow / wide <= 30.0

    def test_subsample_never_exceeds_full(self):
        full = sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0)
        thin = sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0, subsample=10)
        assert thin <= full

    def test_subsample_validation(self):
        with pytest.raises(ValueError):
            sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0, subsample=0)
        with pytest.raises(ValueError):
            sup_norm_cdf_diff(GEOM_CENTI, 1e8, 1.0, subsample=-3)

    def test_convergence_slope_window(self):
        points = [
            (lam, sup_norm_density_diff(GEOM_CENTI, lam, 1.0, subsample=10))
            for lam in (1e5, 1e6, 1e7, 1e8, 1e9)
        ]
        fit = loglog_slope(points)
        assert -0.6 <= fit.slope <= -0.4


class TestEigenGapStudy:
    def test_leading_gap_scales_like_inverse_sqrt_rate(self):
        products = []
        for lam in (1e6, 1e7, 1e8):
            lam_hat = lam / GEOM_CENTI.D
            alpha1 = smol_eigenvalues(GEOM_CENTI, 1).values()[0]
            mu1 = doi_eigenvalues(GEOM_CENTI, lam_hat, 1).values()[0]
            products.append((alpha1 - mu1) * math.sqrt(lam_hat))
        assert all(3.0 <= p <= 3.2 for p in products)
        assert max(products) / min(products) < 1.05


class TestSweep:
    def test_single_cell_reproduces_ops(self):
        rows = sweep([1e8], [1e-2], GEOM_CENTI, 1.0, subsample=200)
        assert len(rows) == 1
        row = rows[0]
        assert row.error == ""
        assert row.norm_density == sup_norm_density_diff(GEOM_CENTI, 1e8, 1.0, subsample=200)
        assert row.norm_cdf == sup_norm_cdf_diff(GEOM_CENTI, 1e8, 1.0, subsample=200)
        assert row.mean_doi == mean_binding_doi(GEOM_CENTI, 1e8, 1.0)
        assert row.mean_smol == mean_binding_smol(GEOM_CENTI, 1.0)
        assert row.rel_diff == rel_diff(GEOM_CENTI, 1e8, 1.0)
        assert row.norm_density_raw == 4.0 * math.pi * row.norm_density

    def test_rate_outer_radius_inner(self):
        rows = sweep([1e5, 1e6], [0.1, 0.2], GEOM_WIDE, 1.0, subsample=2000)
        assert [(r.lam, r.r_b) for r in rows] == [
            (1e5, 0.1), (1e5, 0.2), (1e6, 0.1), (1e6, 0.2),
        ]

    def test_order_independent_values(self):
        forward = sweep([1e5, 1e6], [0.1], GEOM_WIDE, 1.0, subsample=2000)
        reverse = sweep([1e6, 1e5], [0.1], GEOM_WIDE, 1.0, subsample=2000)
        by_key = {(r.lam, r.r_b): r for r in reverse}
        for row in forward:
            twin = by_key[(row.lam, row.r_b)]
            assert twin.norm_density == row.norm_density
            assert twin.norm_cdf == row.norm_cdf
            assert twin.mean_doi == row.mean_doi

    def test_bad_cell_recorded_and_run_continues(self):
        rows = sweep([1e6], [0.1, 2.0], GEOM_WIDE, 1.0, subsample=2000)
        good, bad = rows
        assert good.error == ""
        assert bad.error != ""
        assert math.isnan(bad.norm_density)
        assert math.isnan(bad.mean_doi)

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            sweep([], [0.1], GEOM_WIDE, 1.0)
        with pytest.raises(ValueError):
            sweep([1e6], [], GEOM_WIDE, 1.0)

    def test_mean_columns_at_headline_cell(self):
        rows = sweep([1e11], [1e-3], GEOM_MILLI, 1.0, subsample=500)
        row = rows[0]
        assert row.rel_diff == pytest.approx(REL_DIFF_LAM1E11, rel=1e-9)
        assert row.mean_doi > row.mean_smol > 0.0

    def test_studyrow_rejects_negative_norm(self):
        with pytest.raises(ValueError):
            StudyRow(
                lam=1.0, r_b=0.1, norm_density=-1e-3, norm_density_raw=0.1,
                norm_cdf=0.0, mean_doi=1.0, mean_smol=1.0, rel_diff=0.0,
            )


class TestCsvOutput:
    def test_fmt17_round_trip(self):
        for value in (math.pi, 0.1, 1.0 / 3.0, 1e308, 5e-324, 123456789.123456789):
            assert float(fmt17(value)) == value
        assert fmt17(7) == "7"
        assert fmt17(np.int64(7)) == "7"
        assert fmt17("already text") == "already text"
        assert fmt17(math.nan) == "nan"

    def test_write_csv_header_and_line_endings(self):
        buf = io.StringIO()
        write_csv(buf, ["a", "b"], [[1.5, "x"], [0.25, "y"]])
        text = buf.getvalue()
        assert text == "a,b\n1.5,x\n0.25,y\n"

    def test_sweep_csv_golden_determinism(self, tmp_path):
        rows = sweep([1e6], [0.1], GEOM_WIDE, 1.0, subsample=2000)
        header, data = sweep_table(rows)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_csv(first, header, data)
        write_csv(second, header, data)
        assert first.read_bytes() == second.read_bytes()
        text = first.read_text()
        assert text.splitlines()[0] == (
            "lambda,r_b,norm_density_scaled,norm_density_raw,"
            "norm_cdf,mean_doi,mean_smol,rel_diff,error"
        )

    def test_eigen_table(self):
        header, rows = eigen_table(GEOM_CENTI, 1e8, 10)
        assert header == ["n", "alpha", "mu", "gap"]
        assert [r[0] for r in rows] == list(range(1, 11))
        mus = [r[2] for r in rows]
        assert all(b > a for a, b in zip(mus, mus[1:]))
        for _, alpha, mu, gap in rows:
            assert gap == pytest.approx(alpha - mu, rel=1e-12)
            assert gap > 0.0

    def test_eigen_table_count_validation(self):
        with pytest.raises(ValueError):
            eigen_table(GEOM_CENTI, 1e8, 0)
