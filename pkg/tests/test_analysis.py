"""Tests for the damped-sinusoid fitter and the circular phase metrics."""

import math

import numpy as np
import pytest

from ramseylock import (
    FitError,
    FitResult,
    FringeScan,
    NoiseModel,
    build_write_read,
    fit_damped_sinusoid,
    fringe_visibility,
    phase_spread,
    scan,
    simulate_measurement,
)

TWO_PI = 2.0 * math.pi


def synthetic(T, amplitude, frequency, phase, offset, decay_time):
    p = offset + amplitude * np.exp(-T / decay_time) * np.cos(TWO_PI * frequency * T + phase)
    return FringeScan(T, p, np.zeros_like(T))


class TestFitDampedSinusoid:
    def test_noiseless_round_trip_is_machine_exact(self):
        T = np.linspace(0.0, 20e-3, 201)
        fit = fit_damped_sinusoid(synthetic(T, 0.5, 110.0, 1.0, 0.5, 30e-3))
        assert fit.converged
        assert fit.amplitude == pytest.approx(0.5, rel=1e-6)
        assert fit.frequency == pytest.approx(110.0, rel=1e-6)
        assert fit.phase == pytest.approx(1.0, rel=1e-6)
        assert fit.offset == pytest.approx(0.5, rel=1e-6)
        assert fit.decay_time == pytest.approx(30e-3, rel=1e-6)

    def test_constant_input_reports_no_fringe(self):
        T = np.linspace(0.0, 20e-3, 60)
        fit = fit_damped_sinusoid(FringeScan(T, np.full_like(T, 0.5), np.zeros_like(T)))
        assert fit.amplitude == 0.0
        assert not fit.converged

    def test_too_few_points_rejected(self):
        T = np.linspace(0.0, 1.0, 7)
        with pytest.raises(FitError):
            fit_damped_sinusoid(FringeScan(T, np.linspace(0, 1, 7), np.zeros(7)))

    def test_undamped_input_reports_infinite_decay(self):
        T = np.linspace(0.0, 20e-3, 201)
        fit = fit_damped_sinusoid(synthetic(T, 0.4, 110.0, 0.3, 0.5, math.inf))
        assert math.isinf(fit.decay_time)

    def test_consistency_over_random_parameter_draws(self):
        # 100 in-family parameter sets: below Nyquist, at least 1.5 periods
        # sampled; every parameter must come back to 1e-6 relative
        rng = np.random.default_rng(2024)
        T = np.linspace(0.0, 20e-3, 201)
        for _ in range(100):
            frequency = rng.uniform(80.0, 4000.0)
            offset = rng.uniform(0.3, 0.7)
            amplitude = rng.uniform(0.05, 1.0) * min(offset, 1.0 - offset)
            rate = rng.uniform(0.0, 200.0)
            phase = rng.uniform(0.0, TWO_PI)
            p = offset + amplitude * np.exp(-rate * T) * np.cos(TWO_PI * frequency * T + phase)
            fit = fit_damped_sinusoid(FringeScan(T, p, np.zeros_like(T)))
            assert fit.converged
            assert fit.frequency == pytest.approx(frequency, rel=1e-6)
            assert fit.amplitude == pytest.approx(amplitude, rel=1e-6)
            assert fit.offset == pytest.approx(offset, rel=1e-6)
            fitted_rate = 0.0 if math.isinf(fit.decay_time) else 1.0 / fit.decay_time
            assert fitted_rate == pytest.approx(rate, rel=1e-6, abs=1e-6)
            dphi = (fit.phase - phase + math.pi) % TWO_PI - math.pi
            assert abs(dphi) <= 1e-6

    def test_robust_to_projective_readout_noise(self, write_key, readout_grid):
        # binomial noise at 5e4 atoms x 5 repeats: the recording-field
        # fringe frequency is recovered within 1% in at least 95% of trials
        ideal = scan(build_write_read(write_key, 0.0, scanned=True), readout_grid)
        model = NoiseModel()
        rng = np.random.default_rng(77)
        hits = 0
        for _ in range(200):
            means = np.empty_like(ideal.p)
            sds = np.empty_like(ideal.p)
            for i, p in enumerate(ideal.p):
                means[i], sds[i] = simulate_measurement(float(p), model, rng)
            fit = fit_damped_sinusoid(FringeScan(readout_grid, np.clip(means, 0, 1), sds))
            if fit.converged and abs(fit.frequency - 110.0) / 110.0 < 0.01:
                hits += 1
        assert hits >= 190

    def test_weighted_fit_uses_per_point_sd(self):
        # outliers with huge declared sd should barely move the fit
        T = np.linspace(0.0, 20e-3, 201)
        clean = synthetic(T, 0.4, 110.0, 0.3, 0.5, math.inf)
        p = clean.p.copy()
        sd = np.full_like(T, 1e-3)
        p[50] = 0.0
        p[150] = 1.0
        sd[50] = sd[150] = 1e3
        fit = fit_damped_sinusoid(FringeScan(T, p, sd))
        assert fit.frequency == pytest.approx(110.0, rel=1e-4)
        assert fit.phase == pytest.approx(0.3, abs=1e-3)


class TestFringeVisibility:
    def test_full_cosine_fringe(self):
        # 65 points over one period place grid points exactly on the extrema
        T = np.linspace(0.0, 1.0 / 110.0, 65)
        p = np.cos(math.pi * 110.0 * T) ** 2
        assert fringe_visibility(FringeScan(T, p, np.zeros_like(T))) == pytest.approx(1.0)

    def test_flat_half(self):
        T = np.linspace(0.0, 1.0, 16)
        assert fringe_visibility(FringeScan(T, np.full_like(T, 0.5), np.zeros_like(T))) == 0.0

    def test_all_zero_maps_to_zero(self):
        T = np.linspace(0.0, 1.0, 16)
        assert fringe_visibility(FringeScan(T, np.zeros_like(T), np.zeros_like(T))) == 0.0

    def test_damped_fringe_value_from_direct_computation(self):
        T = np.linspace(0.0, 20e-3, 201)
        sc = synthetic(T, 0.5, 110.0, 0.0, 0.5, 20e-3)
        expected = (np.max(sc.p) - np.min(sc.p)) / (np.max(sc.p) + np.min(sc.p))
        got = fringe_visibility(sc)
        assert got == pytest.approx(expected, rel=1e-12)
        assert 1.0 / math.e < got <= 1.0


def _fit(phase, converged=True):
    return FitResult(
        amplitude=0.5,
        frequency=110.0,
        phase=phase % TWO_PI,
        offset=0.5,
        decay_time=math.inf,
        rms_residual=0.0,
        converged=converged,
        residual_threshold=0.3,
    )


class TestPhaseSpread:
    def test_identical_phases_have_zero_spread(self):
        assert phase_spread([_fit(1.0), _fit(1.0), _fit(1.0)]) == 0.0

    def test_quarter_turn_cluster(self):
        assert phase_spread([_fit(0.0), _fit(math.pi / 2), _fit(math.pi)]) == pytest.approx(
            math.pi, abs=1e-12
        )

    def test_wraparound_cluster(self):
        spread = phase_spread([_fit(TWO_PI - 0.1), _fit(0.0), _fit(0.1)])
        assert spread == pytest.approx(0.2, abs=1e-12)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(8)
        phases = rng.uniform(0.0, 1.5, size=12)
        base = phase_spread([_fit(p) for p in phases])
        for shift in rng.uniform(0.0, TWO_PI, size=10):
            rotated = phase_spread([_fit(p + shift) for p in phases])
            assert rotated == pytest.approx(base, abs=1e-12)

    def test_non_converged_fits_rejected_with_indices(self):
        fits = [_fit(0.0), _fit(1.0, converged=False), _fit(2.0)]
        with pytest.raises(FitError, match=r"\[1\]"):
            phase_spread(fits)

    def test_needs_at_least_two_fits(self):
        with pytest.raises(FitError):
            phase_spread([_fit(0.0)])
