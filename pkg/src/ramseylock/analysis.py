"""Fringe analysis: damped-sinusoid fitting and circular phase statistics.

Every simulated (or measured) interference scan is reduced the same way: a
least-squares fit of::

    p(T) = offset + amplitude * exp(-T / decay_time) * cos(2*pi*frequency*T + phase)

The fitter is deterministic and derivative-based: a coarse frequency grid
over [0, Nyquist] (with linear subproblems for offset and quadrature
amplitudes) picks the starting point, then Gauss-Newton iterations refine
all five parameters.  Fitted phases feed the circular-spread statistic
that quantifies how much key-phase ambiguity a scramble stage injects and
how completely a retrieve stage removes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence as SequenceType

import numpy as np

from .errors import FitError
from .sequence import FringeScan
from .spinor import TWO_PI

#: Coarse initialization grid size over [0, Nyquist].
COARSE_GRID_SIZE = 512

#: Gauss-Newton iteration cap and relative-step convergence threshold.
MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-10

#: Envelope rates tried (in units of 1/span) during initialization.
_RATE_SEEDS = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class FitResult:
    """Damped-sinusoid parameters extracted from one scan.

    ``decay_time`` may be ``inf`` (no detectable damping).  ``converged``
    is set when the iteration reached its step tolerance and the remaining
    root-mean-square residual is below ``residual_threshold``, which is
    recorded alongside (the standard deviation of the input data, i.e. the
    residual of fitting no fringe at all).
    """

    amplitude: float
    frequency: float
    phase: float
    offset: float
    decay_time: float
    rms_residual: float
    converged: bool
    residual_threshold: float

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be >= 0 after normalization")
        if self.rms_residual < 0.0:
            raise ValueError("rms_residual must be >= 0")


def _model(T: np.ndarray, offset: float, a: float, b: float, rate: float, freq: float) -> np.ndarray:
    env = np.exp(-rate * T)
    arg = TWO_PI * freq * T
    return offset + env * (a * np.cos(arg) + b * np.sin(arg))


def _linear_fit(T, p, weights, freq, rate):
    """Weighted LS over (offset, a, b) at fixed frequency and decay rate."""
    env = np.exp(-rate * T)
    arg = TWO_PI * freq * T
    design = np.column_stack([np.ones_like(T), env * np.cos(arg), env * np.sin(arg)])
    wd = design * weights[:, None]
    wp = p * weights
    coef, *_ = np.linalg.lstsq(wd, wp, rcond=None)
    resid = wp - wd @ coef
    return coef, float(resid @ resid)


def _grid_ssr(T, p, weights, freqs):
    """Weighted SSR of the undamped linear model at each trial frequency."""
    arg = TWO_PI * np.outer(freqs, T)
    cos_t, sin_t = np.cos(arg), np.sin(arg)
    w2 = weights * weights
    gram = np.empty((freqs.size, 3, 3))
    rhs = np.empty((freqs.size, 3))
    gram[:, 0, 0] = np.sum(w2)
    gram[:, 0, 1] = gram[:, 1, 0] = cos_t @ w2
    gram[:, 0, 2] = gram[:, 2, 0] = sin_t @ w2
    gram[:, 1, 1] = (cos_t * cos_t) @ w2
    gram[:, 1, 2] = gram[:, 2, 1] = (cos_t * sin_t) @ w2
    gram[:, 2, 2] = (sin_t * sin_t) @ w2
    rhs[:, 0] = np.sum(w2 * p)
    rhs[:, 1] = cos_t @ (w2 * p)
    rhs[:, 2] = sin_t @ (w2 * p)
    # a ridge proportional to the gram scale keeps the degenerate rows
    # (f = 0 and f = Nyquist have a vanishing sin column) solvable;
    # selection is unaffected elsewhere
    scale = float(np.max(gram[:, 0, 0]))
    gram += (1e-9 * max(scale, 1.0)) * np.eye(3)
    coefs = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return np.sum(w2 * p * p) - np.einsum("ki,ki->k", coefs, rhs)


def _coarse_frequency(T, p, weights):
    """Initial frequency: coarse grid over [0, Nyquist], then a fine local
    scan one grid bin wide, so Gauss-Newton starts inside the right basin."""
    nyquist = 0.5 / float(np.min(np.diff(T)))
    freqs = np.linspace(0.0, nyquist, COARSE_GRID_SIZE)
    best = float(freqs[int(np.argmin(_grid_ssr(T, p, weights, freqs)))])
    bin_width = nyquist / (COARSE_GRID_SIZE - 1)
    fine = np.linspace(max(0.0, best - bin_width), best + bin_width, 65)
    return float(fine[int(np.argmin(_grid_ssr(T, p, weights, fine)))])


def _gauss_newton(T, p, weights, params):
    """Refine (offset, a, b, rate, freq); returns (params, step_converged)."""
    offset, a, b, rate, freq = params
    ssr = None
    for _ in range(MAX_ITERATIONS):
        env = np.exp(-rate * T)
        arg = TWO_PI * freq * T
        cos_t, sin_t = np.cos(arg), np.sin(arg)
        osc = a * cos_t + b * sin_t
        resid = (offset + env * osc - p) * weights
        ssr = float(resid @ resid)
        jac = np.column_stack(
            [
                np.ones_like(T),
                env * cos_t,
                env * sin_t,
                -T * env * osc,
                TWO_PI * T * env * (-a * sin_t + b * cos_t),
            ]
        ) * weights[:, None]
        try:
            step, *_ = np.linalg.lstsq(jac, -resid, rcond=None)
        except np.linalg.LinAlgError:
            return (offset, a, b, rate, freq), False
        scale = np.maximum(np.abs([offset, a, b, rate, freq]), 1.0)
        rel_step = float(np.max(np.abs(step) / scale))

        # plain Gauss-Newton with step halving as a guard against overshoot
        shrink = 1.0
        for _ in range(30):
            trial = np.array([offset, a, b, rate, freq]) + shrink * step
            r = (_model(T, *trial) - p) * weights
            if float(r @ r) <= ssr or rel_step * shrink < STEP_TOLERANCE:
                offset, a, b, rate, freq = trial
                break
            shrink *= 0.5
        else:
            return (offset, a, b, rate, freq), False
        if rel_step * shrink < STEP_TOLERANCE:
            return (offset, a, b, rate, freq), True
    return (offset, a, b, rate, freq), False


def fit_damped_sinusoid(scan: FringeScan) -> FitResult:
    """Fit ``offset + A*exp(-T/tau)*cos(2*pi*f*T + phase)`` to a scan.

    Uses per-point standard deviations as inverse weights when every point
    carries one, unweighted least squares otherwise.  Needs at least 8
    points on a strictly increasing grid.  A zero-variance input is
    reported as amplitude 0 and ``converged=False`` rather than an error.

    Returns
    -------
    FitResult
        Amplitude normalized to be >= 0 with the phase folded into
        [0, 2*pi); frequency in Hz; ``decay_time`` in seconds (``inf``
        when no damping is resolved).
    """
    if len(scan) < 8:
        raise FitError(f"need at least 8 points to fit, got {len(scan)}")
    T = np.asarray(scan.T, dtype=float)
    p = np.asarray(scan.p, dtype=float)
    if not np.all(np.diff(T) > 0.0):
        raise FitError("scan times must be strictly increasing")

    data_sd = float(np.std(p))
    if data_sd == 0.0:
        return FitResult(
            amplitude=0.0,
            frequency=0.0,
            phase=0.0,
            offset=float(p[0]),
            decay_time=math.inf,
            rms_residual=0.0,
            converged=False,
            residual_threshold=0.0,
        )

    weights = np.ones_like(T)
    if np.all(scan.sd > 0.0):
        weights = 1.0 / np.asarray(scan.sd, dtype=float)

    freq0 = _coarse_frequency(T, p, weights)
    span = float(T[-1] - T[0])
    best = None
    for rate_seed in _RATE_SEEDS:
        rate = rate_seed / span
        coef, ssr = _linear_fit(T, p, weights, freq0, rate)
        if best is None or ssr < best[0]:
            best = (ssr, coef, rate)
    _, (offset, a, b), rate = best

    (offset, a, b, rate, freq), step_ok = _gauss_newton(
        T, p, weights, (float(offset), float(a), float(b), rate, freq0)
    )

    # canonical form: positive frequency, amplitude >= 0, phase in [0, 2*pi)
    if freq < 0.0:
        freq, b = -freq, -b
    amplitude = math.hypot(a, b)
    phase = math.atan2(-b, a) % TWO_PI
    # an envelope that changes by < 1e-9 over the scanned window is
    # indistinguishable from no damping
    decay_time = math.inf if rate * span < 1e-9 else 1.0 / rate

    rms = float(np.sqrt(np.mean((_model(T, offset, a, b, rate, freq) - p) ** 2)))
    converged = bool(step_ok and amplitude > 0.0 and rms <= data_sd)
    return FitResult(
        amplitude=amplitude,
        frequency=float(freq),
        phase=float(phase),
        offset=float(offset),
        decay_time=decay_time,
        rms_residual=rms,
        converged=converged,
        residual_threshold=data_sd,
    )


def fringe_visibility(scan: FringeScan) -> float:
    """``(max - min) / (max + min)`` of the scanned probabilities.

    Zero when the scan is identically zero (max + min = 0).
    """
    if len(scan) == 0:
        raise FitError("scan must not be empty")
    hi = float(np.max(scan.p))
    lo = float(np.min(scan.p))
    total = hi + lo
    if total == 0.0:
        return 0.0
    return (hi - lo) / total


def phase_spread(fits: SequenceType[FitResult]) -> float:
    """Length of the smallest circular arc containing all fitted phases.

    Negative-amplitude results would be folded to the canonical
    ``amplitude >= 0`` form first (adding pi to the phase); the fitter in
    this module already returns that form.  Identical phases give 0; a
    full wrap approaches 2*pi.
    """
    fits = list(fits)
    if len(fits) < 2:
        raise FitError(f"need at least two fits, got {len(fits)}")
    bad = [i for i, f in enumerate(fits) if not f.converged]
    if bad:
        raise FitError(f"non-converged fits at indices {bad}")
    phases = np.sort(np.array([f.phase for f in fits], dtype=float) % TWO_PI)
    gaps = np.diff(np.concatenate([phases, [phases[0] + TWO_PI]]))
    return float(TWO_PI - np.max(gaps))
