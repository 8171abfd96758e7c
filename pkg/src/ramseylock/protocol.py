"""Key material, sequence builders and timing planners for phase encryption.

The memory scheme runs two in-principle independent interferometers on one
spin.  The recording interferometer (field W) writes a phase with its
first pulse and reads it back with its second.  A scrambling
interferometer (field S) inserts a pulse in between whose phase offset is
the secret key: without it the recorded fringe phase is ambiguous, and
with a retrieve pulse timed so the scrambling field precesses by an odd
multiple of pi between its two pulses, the scramble is undone exactly and
the original fringe reappears regardless of the key phase.

Builders return :class:`~ramseylock.sequence.Sequence` objects; planners
solve the integer timing constraints that make decryption exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence as SequenceType

import numpy as np

from .errors import (
    InfeasiblePlanError,
    InvalidDurationError,
    NoFringeError,
    NoPrecessionError,
    PlanMismatchError,
    SequenceError,
)
from .sequence import FringeScan, PulseSpec, Sequence, Wait, scan
from .spinor import ROTATING, TWO_PI, FieldParams, FrameConvention

#: Relative tolerance for plan-versus-key consistency checks.
_PLAN_RTOL = 1e-9

#: Search bound for the integer timing planners; prevents unbounded loops
#: on infeasible inputs.
MAX_PLAN_INDEX = 10**6


@dataclass(frozen=True)
class WriteKey:
    """Recording-pulse key: field, duration, phase and pulse area.

    Exactly the information needed to read the memory back: phase offset,
    field frequency (through ``field``) and pulse timing.  Either ``tau``
    or ``pulse_area`` may be given; the other is derived.  With neither,
    the area defaults to pi/2.  If both are given they must agree to 1e-9.
    """

    field: FieldParams
    tau: float | None = None
    phase: float = 0.0
    pulse_area: float | None = None

    def __post_init__(self):
        tau, area = self.tau, self.pulse_area
        if tau is None and area is None:
            area = 0.5 * math.pi
        if tau is None:
            tau = area / self.field.rabi
        if area is None:
            area = self.field.rabi * tau
        if not (tau > 0.0) or not math.isfinite(tau):
            raise InvalidDurationError(f"write pulse tau must be > 0, got {tau}")
        if abs(area - self.field.rabi * tau) > 1e-9:
            raise ValueError(
                f"declared pulse area {area} inconsistent with rabi*tau = {self.field.rabi * tau}"
            )
        object.__setattr__(self, "tau", float(tau))
        object.__setattr__(self, "pulse_area", float(area))

    def pulse(self) -> PulseSpec:
        return PulseSpec(self.field, self.tau, self.phase)


@dataclass(frozen=True)
class ScrambleKey:
    """Scrambling-pulse key.

    ``phi_S`` is the field's phase offset relative to the recording field,
    reduced to [0, 2*pi); ``None`` marks a withheld key whose phase must be
    treated as random.  ``T1`` is the wait between the preceding pulse and
    this scramble pulse (recording pulse for the first scrambler, previous
    scramble pulse in stacked schemes).
    """

    field: FieldParams
    tau: float
    phi_S: float | None
    T1: float

    def __post_init__(self):
        if not (self.tau > 0.0) or not math.isfinite(self.tau):
            raise InvalidDurationError(f"scramble pulse tau must be > 0, got {self.tau}")
        if self.T1 < 0.0 or not math.isfinite(self.T1):
            raise InvalidDurationError(f"T1 must be >= 0, got {self.T1}")
        if self.phi_S is not None:
            if not math.isfinite(self.phi_S):
                raise ValueError("phi_S must be finite or None")
            object.__setattr__(self, "phi_S", float(self.phi_S) % TWO_PI)

    @property
    def has_phase(self) -> bool:
        return self.phi_S is not None

    def pulse(self) -> PulseSpec:
        if self.phi_S is None:
            raise ValueError("scramble key phase is withheld; cannot build a concrete pulse")
        return PulseSpec(self.field, self.tau, self.phi_S)


@dataclass(frozen=True)
class RetrievalPlan:
    """Scramble-to-retrieve wait ``T2 = (2n+1)*pi/|detuning|``."""

    n: int
    T2: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not (self.T2 > 0.0):
            raise ValueError(f"T2 must be > 0, got {self.T2}")


@dataclass(frozen=True)
class DoubleRetrievalPlan:
    """Solved timings for the stacked (two-scrambler) scheme.

    ``T3 = (2n+1)*pi/|detuning_2|`` and
    ``T2 + T3 + T4 (+ 2*tau_S2 if clock_during_pulses) = (2m+1)*pi/|detuning_1|``.
    """

    m: int
    n: int
    T2: float
    T3: float
    T4: float
    tau_S2: float
    clock_during_pulses: bool = False


def build_write_read(
    key: WriteKey,
    T: float,
    *,
    frame: FrameConvention = ROTATING,
    clock_during_pulses: bool = False,
    scanned: bool = False,
) -> Sequence:
    """Plain two-pulse interferometer: ``[pulse, wait T, pulse]``.

    With ``scanned`` the read wait is marked as the scan variable so the
    result can be handed straight to :func:`~ramseylock.sequence.scan`.
    """
    return Sequence(
        (key.pulse(), Wait(T, scanned=scanned), key.pulse()),
        frame=frame,
        clock_during_pulses=clock_during_pulses,
    )


def plan_readout(delta_W: float, k: int = 0) -> float:
    """Read-pulse wait, ``(2k+1)*pi/|delta_W|``, at which the recorded
    superposition maps back onto a population extremum."""
    if delta_W == 0.0:
        raise NoFringeError("readout timing is undefined at zero detuning")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return (2 * k + 1) * math.pi / abs(delta_W)


def build_scrambled(
    write_key: WriteKey,
    scramble_key: ScrambleKey,
    T: float,
    *,
    frame: FrameConvention = ROTATING,
    clock_during_pulses: bool = False,
    scanned: bool = False,
) -> Sequence:
    """Encrypting sequence ``[write, wait T1, scramble, wait T, read]``."""
    return Sequence(
        (
            write_key.pulse(),
            Wait(scramble_key.T1),
            scramble_key.pulse(),
            Wait(T, scanned=scanned),
            write_key.pulse(),
        ),
        frame=frame,
        clock_during_pulses=clock_during_pulses,
    )


def plan_retrieval(delta_S: float, min_T2: float = 0.0) -> RetrievalPlan:
    """Smallest odd-pi precession wait: least ``n`` with
    ``(2n+1)*pi/|delta_S| >= min_T2``."""
    if delta_S == 0.0:
        raise NoPrecessionError("retrieval timing is undefined at zero detuning")
    if min_T2 < 0.0:
        raise ValueError(f"min_T2 must be >= 0, got {min_T2}")
    period = math.pi / abs(delta_S)
    estimate = (min_T2 / period - 1.0) / 2.0
    if not estimate <= MAX_PLAN_INDEX:
        raise InfeasiblePlanError(f"no n <= {MAX_PLAN_INDEX} satisfies the T2 bound")
    n = max(0, math.ceil(estimate))
    while (2 * n + 1) * period < min_T2:  # guard against ceil round-off
        n += 1
    return RetrievalPlan(n=n, T2=(2 * n + 1) * math.pi / abs(delta_S))


def _check_close(actual: float, expected: float, what: str) -> None:
    if abs(actual - expected) > _PLAN_RTOL * max(abs(expected), 1e-300):
        raise PlanMismatchError(f"{what}: plan value {actual} != required {expected}")


def build_retrieved(
    write_key: WriteKey,
    scramble_key: ScrambleKey,
    plan: RetrievalPlan,
    T: float,
    *,
    frame: FrameConvention = ROTATING,
    clock_during_pulses: bool = False,
    scanned: bool = False,
) -> Sequence:
    """Decrypting sequence ``[write, T1, scramble, T2, retrieve, T, read]``.

    The retrieve pulse reuses the scramble key's field, duration and phase
    offset; the engine's accumulated ``detuning * (T1 + T2)`` then differs
    from the scramble pulse's phase by an odd multiple of pi, which undoes
    the scramble for every key phase.
    """
    d = scramble_key.field.detuning
    if d == 0.0:
        raise NoPrecessionError("retrieval is undefined at zero detuning")
    _check_close(plan.T2, (2 * plan.n + 1) * math.pi / abs(d), "retrieval wait")
    return Sequence(
        (
            write_key.pulse(),
            Wait(scramble_key.T1),
            scramble_key.pulse(),
            Wait(plan.T2),
            scramble_key.pulse(),
            Wait(T, scanned=scanned),
            write_key.pulse(),
        ),
        frame=frame,
        clock_during_pulses=clock_during_pulses,
    )


def build_double_scrambled(
    write_key: WriteKey,
    scramble_1: ScrambleKey,
    scramble_2: ScrambleKey,
    T: float,
    *,
    frame: FrameConvention = ROTATING,
    clock_during_pulses: bool = False,
    scanned: bool = False,
) -> Sequence:
    """Stacked encryption ``[write, T1, scramble-1, T2, scramble-2, T, read]``.

    ``scramble_2.T1`` is the scramble-1 to scramble-2 wait.
    """
    return Sequence(
        (
            write_key.pulse(),
            Wait(scramble_1.T1),
            scramble_1.pulse(),
            Wait(scramble_2.T1),
            scramble_2.pulse(),
            Wait(T, scanned=scanned),
            write_key.pulse(),
        ),
        frame=frame,
        clock_during_pulses=clock_during_pulses,
    )


def plan_double_retrieval(
    delta_S1: float,
    delta_S2: float,
    tau_S2: float,
    min_T3: float = 0.0,
    min_T2_plus_T4: float = 0.0,
    clock_during_pulses: bool = False,
    T2: float | None = None,
) -> DoubleRetrievalPlan:
    """Solve the stacked-retrieval timing constraints.

    Picks the smallest ``n`` with ``T3 = (2n+1)*pi/|delta_S2| >= min_T3``,
    then the smallest ``m`` whose slack
    ``(2m+1)*pi/|delta_S1| - T3 (- 2*tau_S2 when the clock runs during
    pulses)`` is at least ``min_T2_plus_T4``.  The slack is split evenly
    between ``T2`` and ``T4`` unless an explicit ``T2`` override is given
    (the constraints fix only the sum).
    """
    if delta_S1 == 0.0 or delta_S2 == 0.0:
        raise NoPrecessionError("stacked retrieval is undefined at zero detuning")
    if tau_S2 < 0.0:
        raise InvalidDurationError(f"tau_S2 must be >= 0, got {tau_S2}")
    if min_T3 < 0.0 or min_T2_plus_T4 < 0.0:
        raise ValueError("minimum intervals must be >= 0")

    period_2 = math.pi / abs(delta_S2)
    estimate = (min_T3 / period_2 - 1.0) / 2.0
    if not estimate <= MAX_PLAN_INDEX:
        raise InfeasiblePlanError(f"no n <= {MAX_PLAN_INDEX} satisfies the T3 bound")
    n = max(0, math.ceil(estimate))
    while (2 * n + 1) * period_2 < min_T3:
        n += 1
        if n > MAX_PLAN_INDEX:
            raise InfeasiblePlanError(f"no n <= {MAX_PLAN_INDEX} satisfies the T3 bound")
    T3 = (2 * n + 1) * math.pi / abs(delta_S2)

    correction = 2.0 * tau_S2 if clock_during_pulses else 0.0
    period_1 = math.pi / abs(delta_S1)
    needed = T3 + correction + min_T2_plus_T4
    estimate = (needed / period_1 - 1.0) / 2.0
    if not estimate <= MAX_PLAN_INDEX:
        raise InfeasiblePlanError(f"no m <= {MAX_PLAN_INDEX} satisfies the sum constraint")
    m = max(0, math.ceil(estimate))
    while (2 * m + 1) * period_1 - T3 - correction < min_T2_plus_T4:
        m += 1
        if m > MAX_PLAN_INDEX:
            raise InfeasiblePlanError(f"no m <= {MAX_PLAN_INDEX} satisfies the sum constraint")
    slack = (2 * m + 1) * math.pi / abs(delta_S1) - T3 - correction

    if T2 is None:
        T2 = slack / 2.0
        T4 = slack - T2
    else:
        if not (0.0 <= T2 <= slack):
            raise PlanMismatchError(f"T2 override {T2} outside available slack [0, {slack}]")
        T4 = slack - T2
    return DoubleRetrievalPlan(
        m=m, n=n, T2=T2, T3=T3, T4=T4, tau_S2=tau_S2, clock_during_pulses=clock_during_pulses
    )


def build_double_retrieved(
    write_key: WriteKey,
    scramble_1: ScrambleKey,
    scramble_2: ScrambleKey,
    plan: DoubleRetrievalPlan,
    T: float,
    *,
    frame: FrameConvention = ROTATING,
    scanned: bool = False,
) -> Sequence:
    """Stacked decryption; retrieve-1 for scramble-1 comes after retrieve-2.

    ``[write, T1, scramble-1, T2, scramble-2, T3, retrieve-2, T4,
    retrieve-1, T, read]`` with each retrieve pulse reusing its scramble
    key.  The plan must match the keys: ``T3`` against the second
    scrambler's detuning, the sum constraint against the first scrambler's
    detuning (with the ``2*tau_S2`` correction iff the plan was made for a
    wall-clock timeline), ``tau_S2`` and ``T2`` against the second key.
    """
    d1 = abs(scramble_1.field.detuning)
    d2 = abs(scramble_2.field.detuning)
    if d1 == 0.0 or d2 == 0.0:
        raise NoPrecessionError("stacked retrieval is undefined at zero detuning")
    _check_close(plan.T3, (2 * plan.n + 1) * math.pi / d2, "retrieve-2 wait")
    correction = 2.0 * plan.tau_S2 if plan.clock_during_pulses else 0.0
    _check_close(
        plan.T2 + plan.T3 + plan.T4 + correction,
        (2 * plan.m + 1) * math.pi / d1,
        "retrieve-1 sum constraint",
    )
    _check_close(plan.tau_S2, scramble_2.tau, "scramble-2 duration")
    _check_close(plan.T2, scramble_2.T1, "scramble-1 to scramble-2 wait")
    return Sequence(
        (
            write_key.pulse(),
            Wait(scramble_1.T1),
            scramble_1.pulse(),
            Wait(plan.T2),
            scramble_2.pulse(),
            Wait(plan.T3),
            scramble_2.pulse(),
            Wait(plan.T4),
            scramble_1.pulse(),
            Wait(T, scanned=scanned),
            write_key.pulse(),
        ),
        frame=frame,
        clock_during_pulses=plan.clock_during_pulses,
    )


def secret_readout(
    write_key: WriteKey,
    scramble_key: ScrambleKey,
    T_grid: SequenceType[float],
    rng: np.random.Generator | None = None,
    *,
    frame: FrameConvention = ROTATING,
    fresh_phase_per_point: bool = False,
) -> FringeScan:
    """Read the memory with or without the scrambler's cooperation.

    If ``scramble_key`` carries its phase, the holder of both keys builds
    the timed retrieve sequence (smallest odd-pi wait) and recovers the
    recorded fringe.  If the phase is withheld (``phi_S is None``) the
    scramble pulse still happened, but with a phase unknown to the reader:
    a fresh uniform phase is drawn (one per readout by default, or one per
    grid point with ``fresh_phase_per_point`` to model shot-by-shot drift)
    and the resulting ambiguous scan is returned.
    """
    grid = list(T_grid)
    if len(grid) == 0:
        raise SequenceError("readout grid must not be empty")
    if scramble_key.has_phase:
        plan = plan_retrieval(scramble_key.field.detuning, 0.0)
        template = build_retrieved(write_key, scramble_key, plan, 0.0, frame=frame, scanned=True)
        return scan(template, grid)
    if rng is None:
        raise ValueError("blind readout needs a random generator for the unknown key phase")
    if fresh_phase_per_point:
        T_arr = np.asarray(grid, dtype=float)
        pieces = [
            scan(
                build_scrambled(
                    write_key,
                    replace(scramble_key, phi_S=float(rng.uniform(0.0, TWO_PI))),
                    0.0,
                    frame=frame,
                    scanned=True,
                ),
                [T],
            ).p[0]
            for T in T_arr
        ]
        return FringeScan(T_arr, np.asarray(pieces), np.zeros_like(T_arr))
    blind = replace(scramble_key, phi_S=float(rng.uniform(0.0, TWO_PI)))
    template = build_scrambled(write_key, blind, 0.0, frame=frame, scanned=True)
    return scan(template, grid)
