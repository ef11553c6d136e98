from dataclasses import replace

import numpy as np
import pytest

from crindex.crgeom import analyse_points, sample_boundary
from crindex.expr import parse_defining_function
from crindex.trivialization import (
    ConformalFamily,
    optimize_trivialization,
    trivialization_report,
)
from tests.helpers import make_spec


class TestConformalFamily:
    @pytest.fixture
    def quartic_geometry(self, quartic_conformal_spec):
        """Geometry of the quartic sample."""
        return analyse_points(quartic_conformal_spec, sample_boundary(quartic_conformal_spec))

    def test_zero_matches_eta_report(self, quartic_conformal_spec, quartic_geometry):
        """Test that c = 0 scores like eta_rho."""
        family = ConformalFamily(quartic_conformal_spec, quartic_geometry)
        report = trivialization_report(quartic_conformal_spec, quartic_geometry)
        score = family.score([0.0])
        assert family.n_weak == report.n_weak_points == 3
        assert (score.df_w, score.df_s, score.s_w, score.s_s) == (
            report.df_w,
            report.df_s,
            report.s_w,
            report.s_s,
        )

    def test_scores_match_transformed_report(self, quartic_conformal_spec, quartic_geometry):
        """Test the precomputed family against conformal_transform per point."""
        family = ConformalFamily(quartic_conformal_spec, quartic_geometry)
        for c in (-0.7, 0.3):
            score = family.score([c])
            report = trivialization_report(quartic_conformal_spec, quartic_geometry, [c])
            assert score.df_w == pytest.approx(report.df_w)
            assert score.s_w == pytest.approx(report.s_w)
            assert score.df_s == pytest.approx(report.df_s)

    def test_objective_prefers_negative_coefficient(self, quartic_conformal_spec, quartic_geometry):
        """Test that c < 0 makes the quartic strictly DF-feasible."""
        family = ConformalFamily(quartic_conformal_spec, quartic_geometry)
        assert family.objective([-0.5], "df") > 2.0
        assert family.objective([0.0], "df") == pytest.approx(1.0)
        assert family.objective([0.5], "df") < 1.0


class TestOptimizeTrivialization:
    def test_empty_basis(self, quartic_spec):
        """Test that an empty basis reports eta_rho."""
        geometry = analyse_points(quartic_spec, sample_boundary(quartic_spec))
        coeffs, report = optimize_trivialization(quartic_spec, geometry)
        assert coeffs == ()
        assert report.df_s == 0.0
        assert report.df_w == 1.0

    def test_quartic_becomes_strict(self, quartic_conformal_spec):
        """Test that the optimizer lifts df_s from 0 to 1 on the quartic."""
        geometry = analyse_points(quartic_conformal_spec, sample_boundary(quartic_conformal_spec))
        coeffs, report = optimize_trivialization(quartic_conformal_spec, geometry)
        assert coeffs[0] < 0
        assert report.df_s >= 0.99
        assert report.definite_positive
        assert report.trivialization_coeffs == coeffs

    def test_deterministic(self, quartic_conformal_spec):
        """Test that a fixed seed gives the same coefficients."""
        geometry = analyse_points(quartic_conformal_spec, sample_boundary(quartic_conformal_spec))
        first, _ = optimize_trivialization(quartic_conformal_spec, geometry)
        second, _ = optimize_trivialization(quartic_conformal_spec, geometry)
        assert first == second

    def test_cylinder_gap_persists(self):
        """Test that periodic factors cannot close the cylinder gap."""
        spec = make_spec(
            "abs2(z2) - 1",
            sampling={"count": 48},
            conformal_basis=["cos(re(z1))", "sin(re(z1))"],
            optimizer={"budget": 90, "restarts": 2},
        )
        geometry = analyse_points(spec, sample_boundary(spec))
        coeffs, report = optimize_trivialization(spec, geometry)
        assert coeffs == (0.0, 0.0)
        assert report.df_w == 1.0
        assert report.df_s == 0.0

    def test_steinness_objective(self):
        """Test the Steinness objective on the quartic with c > 0."""
        spec = make_spec(
            "abs2(z1)^2 + abs2(z2) - 1",
            sampling={"count": 24, "box_radius": 1.5, "anchors": [[0, 1]]},
            conformal_basis=["abs2(z1)"],
            optimizer={"budget": 60, "restarts": 1, "objective": "s"},
        )
        geometry = analyse_points(spec, sample_boundary(spec))
        coeffs, report = optimize_trivialization(spec, geometry)
        assert coeffs[0] > 0
        assert report.s_s == pytest.approx(1.0)

    def test_invalid_arguments(self, quartic_conformal_spec):
        """Test objective and budget validation."""
        with pytest.raises(ValueError, match="objective"):
            optimize_trivialization(quartic_conformal_spec, [], objective="max")
        with pytest.raises(ValueError, match="budget"):
            optimize_trivialization(quartic_conformal_spec, [], budget=0)

    def test_no_weak_points(self, ball_spec):
        """Test the optimizer on a strictly pseudoconvex sample."""
        spec = replace(
            ball_spec,
            conformal_basis=(parse_defining_function("abs2(z1)", 2),),
            conformal_basis_text=("abs2(z1)",),
        )
        geometry = analyse_points(spec, sample_boundary(spec))
        coeffs, report = optimize_trivialization(spec, geometry, budget=20)
        assert np.allclose(coeffs, 0.0)
        assert (report.df_w, report.df_s, report.s_w, report.s_s) == (1.0, 1.0, 1.0, 1.0)
