"""Tests for phase diffusion, projective readout and contrast decay."""

import math

import numpy as np
import pytest

from ramseylock import (
    FringeScan,
    InvalidDurationError,
    NoiseModel,
    ScrambleKey,
    apply_contrast_decay,
    build_scrambled,
    build_write_read,
    fit_damped_sinusoid,
    monte_carlo_scramble,
    sample_phase_increment,
    sample_relative_phase,
    scan,
    simulate_measurement,
)

TWO_PI = 2.0 * math.pi


def kuiper_statistic(samples: np.ndarray) -> float:
    """Kuiper V against the uniform distribution on [0, 1)."""
    u = np.sort(samples)
    n = u.size
    i = np.arange(1, n + 1)
    return float(np.max(i / n - u) + np.max(u - (i - 1) / n))


class TestPhaseDiffusion:
    def test_zero_elapsed_is_exactly_zero(self):
        rng = np.random.default_rng(0)
        assert sample_relative_phase(TWO_PI * 1000.0, 0.0, rng) == 0.0
        assert sample_phase_increment(TWO_PI * 1000.0, 0.0, rng) == 0.0

    def test_negative_elapsed_rejected(self):
        with pytest.raises(InvalidDurationError):
            sample_relative_phase(1.0, -1.0, np.random.default_rng(0))

    def test_variance_after_one_shot_interval(self):
        # 1 kHz angular linewidth over the 47 s between shots gives a
        # variance of linewidth * elapsed = 2.95e5 rad^2
        rng = np.random.default_rng(42)
        draws = np.array(
            [sample_phase_increment(TWO_PI * 1000.0, 47.0, rng) for _ in range(10_000)]
        )
        assert draws.var() == pytest.approx(TWO_PI * 1000.0 * 47.0, rel=0.05)

    def test_variance_grows_linearly_with_elapsed_time(self):
        rng = np.random.default_rng(42)
        elapsed = np.arange(1.0, 11.0)
        variances = [
            np.var([sample_phase_increment(TWO_PI * 1000.0, t, rng) for t in [el] * 10_000])
            for el in elapsed
        ]
        slope = np.polyfit(elapsed, variances, 1)[0]
        assert slope == pytest.approx(TWO_PI * 1000.0, rel=0.05)

    def test_wrapped_phase_is_uniform_at_large_variance(self):
        # variance >= 100 rad^2: the wrapped normal is uniform to within the
        # 1% Kuiper critical value
        rng = np.random.default_rng(3)
        samples = np.array(
            [sample_relative_phase(TWO_PI * 1000.0, 1.0, rng) for _ in range(10_000)]
        )
        assert np.all((samples >= 0.0) & (samples < TWO_PI))
        v = kuiper_statistic(samples / TWO_PI)
        critical = 2.001 / (math.sqrt(10_000) + 0.155 + 0.24 / math.sqrt(10_000))
        assert v < critical


class TestSimulateMeasurement:
    def test_certain_outcomes_have_no_scatter(self):
        model = NoiseModel()
        rng = np.random.default_rng(1)
        assert simulate_measurement(0.0, model, rng) == (0.0, 0.0)
        assert simulate_measurement(1.0, model, rng) == (1.0, 0.0)

    def test_sd_of_mean_matches_binomial_statistics(self):
        model = NoiseModel()  # 5e4 atoms, 5 repeats
        rng = np.random.default_rng(9)
        means = np.array([simulate_measurement(0.5, model, rng)[0] for _ in range(1000)])
        expected = math.sqrt(0.25 / (5e4 * 5))
        assert means.std() == pytest.approx(expected, rel=0.20)

    def test_mean_is_unbiased(self):
        model = NoiseModel()
        rng = np.random.default_rng(10)
        means = np.array([simulate_measurement(0.3, model, rng)[0] for _ in range(10_000)])
        pooled_se = math.sqrt(0.3 * 0.7 / (5e4 * 5)) / math.sqrt(10_000)
        assert abs(means.mean() - 0.3) <= 3.0 * pooled_se

    def test_out_of_range_probability_rejected(self):
        with pytest.raises(ValueError):
            simulate_measurement(1.5, NoiseModel(), np.random.default_rng(0))


class TestContrastDecay:
    def test_infinite_time_leaves_scan_unchanged(self, write_key, readout_grid):
        sc = scan(build_write_read(write_key, 0.0, scanned=True), readout_grid)
        out = apply_contrast_decay(sc, math.inf)
        assert np.max(np.abs(out.p - sc.p)) <= 1e-15

    def test_one_decay_time_reaches_1_over_e(self):
        tau_c = 3e-3
        sc = FringeScan(np.array([0.0, tau_c]), np.array([1.0, 1.0]), np.zeros(2))
        out = apply_contrast_decay(sc, tau_c)
        assert out.p[1] == pytest.approx(0.5 + 0.5 / math.e, abs=1e-12)

    def test_fitted_decay_time_round_trips(self, write_key, readout_grid):
        tau_c = 30.0 / 565.0
        sc = apply_contrast_decay(
            scan(build_write_read(write_key, 0.0, scanned=True), readout_grid), tau_c
        )
        fit = fit_damped_sinusoid(sc)
        assert fit.converged
        assert fit.decay_time == pytest.approx(tau_c, rel=0.02)

    def test_nonpositive_time_rejected(self, write_key):
        sc = FringeScan(np.array([0.0, 1.0]), np.array([0.5, 0.6]), np.zeros(2))
        with pytest.raises(InvalidDurationError):
            apply_contrast_decay(sc, 0.0)


class TestMonteCarloScramble:
    def test_zero_linewidth_reproduces_declared_key(
        self, write_key, scramble_field, readout_grid
    ):
        # no diffusion: the single trial runs at the declared phase, and a
        # huge atom number makes the readout noise negligible
        key = ScrambleKey(scramble_field, 1.48e-3, 0.0, 5e-3)
        model = NoiseModel(linewidth=0.0, atom_count=10**8, repeats=2, seed=4)
        result = monte_carlo_scramble(write_key, key, readout_grid, 1, model)
        ideal = scan(build_scrambled(write_key, key, 0.0, scanned=True), readout_grid)
        assert np.max(np.abs(result.pooled.p - ideal.p)) <= 1e-3

    def test_seed_reproducibility_is_bit_exact(self, write_key, scramble_key, readout_grid):
        model = NoiseModel(linewidth=TWO_PI * 1000.0, seed=11)
        a = monte_carlo_scramble(write_key, scramble_key, readout_grid[:51], 5, model)
        b = monte_carlo_scramble(write_key, scramble_key, readout_grid[:51], 5, model)
        for sa, sb in zip(a.scans, b.scans):
            assert np.array_equal(sa.p, sb.p)
            assert np.array_equal(sa.sd, sb.sd)
        assert np.array_equal(a.pooled.p, b.pooled.p)

    def test_random_key_scatter_is_large_and_flat(self, write_key, scramble_key, readout_grid):
        # fully diffused key phases scatter the measured point by ~0.165
        # (rms over the uniformly scrambled fringe family) at every delay;
        # far above the 1e-3 binomial readout level
        model = NoiseModel(linewidth=TWO_PI * 1000.0, seed=11)
        result = monte_carlo_scramble(write_key, scramble_key, readout_grid, 100, model)
        sd = result.pooled.sd
        assert 0.10 <= float(np.mean(sd)) <= 0.25
        assert float(np.max(sd)) / float(np.min(sd)) < 1.6
        assert float(np.min(sd)) > 20.0 * math.sqrt(0.25 / (5e4 * 5))

    def test_trial_count_validated(self, write_key, scramble_key):
        with pytest.raises(ValueError):
            monte_carlo_scramble(write_key, scramble_key, [0.0, 1e-3], 0, NoiseModel())
