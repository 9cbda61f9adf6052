"""Potential shapes, forces, and Boltzmann reconstruction."""

import math

import numpy as np
import pytest

from erasurelab import (
    PotentialCurve,
    PotentialParams,
    bistable_energy,
    bistable_force,
    effective_energy,
    effective_force,
    kbt,
    reconstruct_potential,
    single_well_energy,
)

PARAMS = PotentialParams()  # k=0.0045, w=175, L=550
CAP = 0.5 * 0.0045 * 175.0**2  # plateau energy computed independently


class TestParams:
    def test_defaults_valid(self):
        assert PARAMS.plateau == pytest.approx(CAP)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(k=0.0), dict(k=-1.0), dict(w=0.0), dict(w=-5.0), dict(L=100.0, w=175.0)],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            PotentialParams(**kwargs)


class TestSingleWell:
    def test_bottom(self):
        assert single_well_energy(0.0, PARAMS) == 0.0

    def test_rim_value(self):
        assert single_well_energy(175.0, PARAMS) == pytest.approx(CAP)

    def test_plateau_branch(self):
        assert single_well_energy(500.0, PARAMS) == pytest.approx(CAP)

    def test_reference_offset(self):
        p = PotentialParams(U_r=3.0)
        assert single_well_energy(0.0, p) == pytest.approx(3.0)
        assert single_well_energy(1000.0, p) == pytest.approx(CAP + 3.0)

    def test_continuity_at_rim(self):
        for eps in (1e-6, 1e-9):
            gap = abs(
                single_well_energy(PARAMS.w - eps, PARAMS)
                - single_well_energy(PARAMS.w + eps, PARAMS)
            )
            assert gap < 1e-5

    def test_nonfinite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                single_well_energy(bad, PARAMS)

    def test_vectorized(self):
        x = np.array([0.0, 175.0, 500.0])
        u = single_well_energy(x, PARAMS)
        assert u == pytest.approx([0.0, CAP, CAP])


class TestBistable:
    def test_active_well_bottom(self):
        assert bistable_energy(550.0, 1, PARAMS) == 0.0
        assert bistable_energy(-550.0, 0, PARAMS) == 0.0

    def test_idle_basin_sees_plateau(self):
        # laser at the right trap: the left basin is just plateau
        assert bistable_energy(-550.0, 1, PARAMS) == pytest.approx(CAP)

    def test_bad_flag(self):
        with pytest.raises(ValueError):
            bistable_energy(0.0, 2, PARAMS)

    def test_force_restoring_inside_active_well(self):
        assert bistable_force(500.0, 1, PARAMS) == pytest.approx(-0.0045 * (500.0 - 550.0))
        assert bistable_force(-550.0, 1, PARAMS) == 0.0


class TestEffective:
    def test_symmetric_depth(self):
        u = effective_energy(-550.0, 0.5, PARAMS)
        assert u == pytest.approx(0.5 * CAP)
        assert u == pytest.approx(effective_energy(550.0, 0.5, PARAMS))

    def test_tilted_left_well(self):
        assert effective_energy(-550.0, 0.7, PARAMS) == pytest.approx(0.3 * CAP)

    def test_plateau_independent_of_duty(self):
        for d in (0.2, 0.5, 0.9):
            assert effective_energy(0.0, d, PARAMS) == pytest.approx(CAP)

    def test_duty_out_of_range(self):
        for d in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                effective_energy(0.0, d, PARAMS)

    def test_symmetry_at_half(self):
        xs = np.linspace(-900.0, 900.0, 181)
        u = effective_energy(xs, 0.5, PARAMS)
        assert u == pytest.approx(u[::-1])  # xs grid is symmetric about 0

    def test_monotone_tilt(self):
        ds = np.linspace(0.05, 0.95, 19)
        left = np.array([effective_energy(-550.0, d, PARAMS) for d in ds])
        right = np.array([effective_energy(550.0, d, PARAMS) for d in ds])
        assert np.all(np.diff(left) < 0)
        assert np.all(np.diff(right) > 0)

    def test_force_examples(self):
        assert effective_force(-550.0, 0.3, PARAMS) == 0.0
        assert effective_force(-500.0, 0.5, PARAMS) == pytest.approx(-0.5 * 0.0045 * 50.0)
        assert effective_force(0.0, 0.7, PARAMS) == 0.0

    def test_force_matches_finite_difference(self):
        # stay away from the branch seams at +-(L-w) and +-(L+w)
        xs = np.concatenate(
            [np.linspace(-700, -400, 31), np.linspace(-340, 340, 35), np.linspace(400, 700, 31)]
        )
        h = 1e-3
        for d in (0.3, 0.5, 0.7):
            fd = -(effective_energy(xs + h, d, PARAMS) - effective_energy(xs - h, d, PARAMS)) / (2 * h)
            assert np.max(np.abs(fd - effective_force(xs, d, PARAMS))) < 1e-6


class TestReconstruction:
    def test_uniform_histogram_is_flat(self):
        curve = reconstruct_potential([0.0, 1.0], [40, 40], 300.0)
        assert curve.values == pytest.approx([0.0, 0.0])

    def test_boltzmann_weights_invert_analytically(self):
        # P proportional to [exp(-1), 1] must map to energies [kBT, 0]
        curve = reconstruct_potential([0.0, 1.0], [math.exp(-1.0) * 1e6, 1e6], 300.0)
        assert curve.values == pytest.approx([kbt(300.0), 0.0], rel=1e-12)
        assert curve.normalization == pytest.approx(1e6 / (1e6 + math.exp(-1.0) * 1e6))

    def test_zero_count_bins_dropped(self):
        curve = reconstruct_potential([0.0, 1.0, 2.0], [10, 0, 10], 300.0)
        assert curve.grid.tolist() == [0.0, 2.0]
        assert np.all(np.isfinite(curve.values))

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_potential([0.0, 1.0], [0, 0], 300.0)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_potential([0.0, 1.0], [5, -1], 300.0)

    def test_round_trip_from_boltzmann_samples(self):
        # draw equilibrium samples from the d=0.5 landscape directly, then invert
        T = 300.0
        rng = np.random.default_rng(7)
        grid = np.arange(-800.0, 800.0, 0.5)
        weights = np.exp(-effective_energy(grid, 0.5, PARAMS) / kbt(T))
        weights /= weights.sum()
        samples = rng.choice(grid, size=400000, p=weights)
        edges = np.arange(-800.0, 801.0, 10.0)
        counts, _ = np.histogram(samples, bins=edges)
        centers = 0.5 * (edges[:-1] + edges[1:])
        curve = reconstruct_potential(centers, counts, T)
        dense = counts[counts > 0] >= 200
        theory = effective_energy(curve.grid, 0.5, PARAMS)
        theory = theory - theory[dense].min()
        err = np.abs(curve.values[dense] - theory[dense]) / kbt(T)
        assert err.max() < 0.25

    def test_csv_omits_missing_bins(self, tmp_path):
        curve = reconstruct_potential([0.0, 1.0, 2.0], [10, 0, 30], 300.0)
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x_nm,U_pNnm"
        assert len(lines) == 3  # header + two visited bins

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            PotentialCurve(grid=np.array([1.0, 0.0]), values=np.array([0.0, 0.0]), normalization=0.5)
        with pytest.raises(ValueError):
            PotentialCurve(grid=np.array([0.0, 1.0]), values=np.array([0.0, math.inf]), normalization=0.5)
        with pytest.raises(ValueError):
            PotentialCurve(grid=np.array([0.0]), values=np.array([0.0]), normalization=0.0)
