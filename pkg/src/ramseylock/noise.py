"""Noise models: key-phase diffusion, projective readout, contrast decay.

The key phase between the two driving fields random-walks at the laser
linewidth rate, ``d<dphi^2>/dt = linewidth``; over the tens of seconds
between experimental shots the wrapped phase becomes effectively uniform,
which is what makes the scramble phase a usable one-time key.  Readout is
projective: the excitation fraction of N atoms is binomial, and a data
point is the mean of a few repeated shots with its standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDurationError
from .protocol import ScrambleKey, WriteKey, build_scrambled
from .sequence import FringeScan, scan
from .spinor import ROTATING, TWO_PI, FrameConvention

#: Lower-bound 1/e contrast times implied by the observed coherence of the
#: two interferometers: >30 recording-field cycles and >100 scrambling-field
#: cycles at the default Rabi frequencies (565 Hz and 169 Hz).
DEFAULT_CONTRAST_WRITE = 30.0 / 565.0
DEFAULT_CONTRAST_SCRAMBLE = 100.0 / 169.0


@dataclass(frozen=True)
class NoiseModel:
    """Noise parameters of a simulated run.

    ``linewidth`` is the phase-diffusion rate in rad/s (angular linewidth);
    ``run_interval`` the wall-clock seconds between shots over which the
    key phase diffuses; ``contrast_time_write``/``contrast_time_scramble``
    the per-interferometer 1/e fringe-contrast times.
    """

    linewidth: float = 0.0
    atom_count: int = 50_000
    repeats: int = 5
    contrast_time_write: float = DEFAULT_CONTRAST_WRITE
    contrast_time_scramble: float = DEFAULT_CONTRAST_SCRAMBLE
    run_interval: float = 47.0
    seed: int = 0

    def __post_init__(self):
        if self.linewidth < 0.0:
            raise ValueError(f"linewidth must be >= 0, got {self.linewidth}")
        if self.atom_count < 1:
            raise ValueError(f"atom_count must be >= 1, got {self.atom_count}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.contrast_time_write <= 0.0 or self.contrast_time_scramble <= 0.0:
            raise ValueError("contrast times must be > 0 (inf allowed)")
        if self.run_interval < 0.0:
            raise ValueError(f"run_interval must be >= 0, got {self.run_interval}")


def sample_phase_increment(linewidth: float, elapsed: float, rng: np.random.Generator) -> float:
    """Unwrapped Gaussian phase excursion after ``elapsed`` seconds.

    Marginal of a Wiener process with variance rate ``linewidth``:
    zero-mean normal with variance ``linewidth * elapsed``.  Returns 0.0
    exactly (without consuming a variate) when the variance is zero.
    """
    if elapsed < 0.0:
        raise InvalidDurationError(f"elapsed time must be >= 0, got {elapsed}")
    if linewidth < 0.0:
        raise ValueError(f"linewidth must be >= 0, got {linewidth}")
    variance = linewidth * elapsed
    if variance == 0.0:
        return 0.0
    return float(rng.normal(0.0, math.sqrt(variance)))


def sample_relative_phase(linewidth: float, elapsed: float, rng: np.random.Generator) -> float:
    """Diffused field phase wrapped to [0, 2*pi).

    Once ``linewidth * elapsed`` exceeds a few tens of rad^2 the wrapped
    distribution is indistinguishable from uniform.
    """
    return sample_phase_increment(linewidth, elapsed, rng) % TWO_PI


def simulate_measurement(
    p_true: float, model: NoiseModel, rng: np.random.Generator
) -> tuple[float, float]:
    """Projective readout of one data point.

    Draws ``model.repeats`` binomial samples of ``model.atom_count`` atoms
    at success probability ``p_true`` and returns the mean excitation
    fraction with the sample standard deviation across repeats.
    """
    if not (0.0 <= p_true <= 1.0):
        raise ValueError(f"p_true must lie in [0, 1], got {p_true}")
    counts = rng.binomial(model.atom_count, p_true, size=model.repeats)
    fractions = counts / float(model.atom_count)
    mean = float(np.mean(fractions))
    sd = float(np.std(fractions, ddof=1)) if model.repeats > 1 else 0.0
    return mean, sd


def apply_contrast_decay(scan_data: FringeScan, tau_c: float) -> FringeScan:
    """Damp a fringe toward the incoherent 0.5 mixture.

    Each point becomes ``0.5 + (p - 0.5) * exp(-T / tau_c)``; ``tau_c`` is
    the 1/e contrast time (``inf`` leaves the scan unchanged).  Per-point
    standard deviations are left untouched: they describe readout scatter,
    not the coherence envelope.
    """
    if not (tau_c > 0.0) or math.isnan(tau_c):
        raise InvalidDurationError(f"contrast time must be > 0, got {tau_c}")
    envelope = np.exp(-scan_data.T / tau_c)
    p = 0.5 + (scan_data.p - 0.5) * envelope
    return FringeScan(scan_data.T, p, scan_data.sd, label=scan_data.label)


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-trial scrambled scans plus the per-point pooled statistics."""

    scans: tuple[FringeScan, ...]
    pooled: FringeScan


def monte_carlo_scramble(
    write_key: WriteKey,
    scramble_key: ScrambleKey,
    T_grid,
    trials: int,
    model: NoiseModel,
    *,
    frame: FrameConvention = ROTATING,
) -> MonteCarloResult:
    """Ensemble of scrambled scans with a freshly diffused phase per trial.

    Each trial draws its key phase via :func:`sample_relative_phase` over
    ``model.run_interval`` (added to the key's declared phase, if any),
    evaluates the scrambled fringe on the grid, and applies projective
    readout noise per point.  Trials use independent child streams spawned
    from the model seed, so results do not depend on execution order and
    identical seeds reproduce the ensemble bit for bit.

    The pooled scan holds, per grid point, the mean and standard deviation
    over trials of the measured means; the scatter is largest where the
    fringe slope against the key phase is steepest (near the zero
    crossings) and smallest at the extrema.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    base_phase = scramble_key.phi_S if scramble_key.has_phase else 0.0
    streams = np.random.SeedSequence(model.seed).spawn(trials)
    grid = np.asarray(list(T_grid), dtype=float)

    scans = []
    for child in streams:
        rng = np.random.default_rng(child)
        phase = (base_phase + sample_relative_phase(model.linewidth, model.run_interval, rng)) % TWO_PI
        keyed = ScrambleKey(scramble_key.field, scramble_key.tau, phase, scramble_key.T1)
        ideal = scan(build_scrambled(write_key, keyed, 0.0, frame=frame, scanned=True), grid)
        means = np.empty_like(grid)
        sds = np.empty_like(grid)
        for i, p in enumerate(ideal.p):
            means[i], sds[i] = simulate_measurement(float(p), model, rng)
        scans.append(FringeScan(grid, np.clip(means, 0.0, 1.0), sds))

    stacked = np.vstack([s.p for s in scans])
    pooled = FringeScan(
        grid,
        np.clip(stacked.mean(axis=0), 0.0, 1.0),
        stacked.std(axis=0, ddof=1) if trials > 1 else np.zeros_like(grid),
        label="pooled",
    )
    return MonteCarloResult(scans=tuple(scans), pooled=pooled)
