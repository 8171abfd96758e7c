"""Pulse timelines and the evolution engine that executes them.

A :class:`Sequence` is an ordered list of :class:`Wait` and
:class:`PulseSpec` events plus a frame convention.  Evolution applies the
free-evolution unitary for every wait and the pulse unitary for every
pulse, in timeline order, which reproduces the right-to-left operator
products of multi-pulse interferometry.

Phase bookkeeping: the phase argument handed to pulse ``k`` is
``rate * t_k + phase_offset`` where ``rate`` is the field's phase rate in
the chosen frame and ``t_k`` the pulse's timeline start time.  With
``clock_during_pulses`` off (the default) the clock advances only through
waits, so free phase accumulates over the declared intervals alone; with
it on, every pulse also advances the clock by its own duration.  Both
conventions are first-class: single scramble/retrieve pairs are timed on
intervals alone, while the stacked-retrieval sum constraint carries a
pulse-duration term that presupposes the wall-clock convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence as SequenceType, Union

import numpy as np

from .errors import InvalidDurationError, SequenceError
from .spinor import (
    GROUND,
    ROTATING,
    FieldParams,
    FrameConvention,
    SpinState,
    apply_unitary,
    excitation_probability,
    free_unitary,
    pulse_unitary,
)


@dataclass(frozen=True)
class PulseSpec:
    """One rectangular pulse: a field, a duration and a constant phase offset.

    ``phase_offset`` is the per-field constant added on top of the
    engine-accumulated ``rate * t`` phase (zero for the recording field by
    convention; the key phase for scrambling fields).
    """

    field: FieldParams
    tau: float
    phase_offset: float = 0.0

    def __post_init__(self):
        if not (self.tau > 0.0) or not math.isfinite(self.tau):
            raise InvalidDurationError(f"pulse tau must be > 0, got {self.tau}")
        if not math.isfinite(self.phase_offset):
            raise InvalidDurationError("pulse phase offset must be finite")
        if not math.isfinite(self.field.rabi * self.tau):
            raise InvalidDurationError("pulse area must be finite")


@dataclass(frozen=True)
class Wait:
    """Free evolution for ``duration`` seconds.

    At most one wait in a sequence may be marked ``scanned``; its duration
    is the variable replaced point-by-point by :func:`scan`.
    """

    duration: float
    scanned: bool = False

    def __post_init__(self):
        if self.duration < 0.0 or not math.isfinite(self.duration):
            raise InvalidDurationError(f"wait duration must be >= 0, got {self.duration}")


Event = Union[Wait, PulseSpec]


@dataclass(frozen=True)
class Sequence:
    """An ordered timeline of waits and pulses in a fixed frame."""

    events: tuple[Event, ...]
    frame: FrameConvention = ROTATING
    clock_during_pulses: bool = False

    def __post_init__(self):
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if not any(isinstance(e, PulseSpec) for e in events):
            raise SequenceError("sequence must contain at least one pulse")
        for e in events:
            if not isinstance(e, (Wait, PulseSpec)):
                raise SequenceError(f"unsupported event type {type(e).__name__}")
        if sum(1 for e in events if isinstance(e, Wait) and e.scanned) > 1:
            raise SequenceError("at most one wait may be marked as the scan variable")

    @property
    def pulses(self) -> tuple[PulseSpec, ...]:
        return tuple(e for e in self.events if isinstance(e, PulseSpec))

    def end_time(self, start_time: float = 0.0) -> float:
        """Timeline clock value after the last event."""
        t = start_time
        for e in self.events:
            if isinstance(e, Wait):
                t += e.duration
            elif self.clock_during_pulses:
                t += e.tau
        return t


class TimelineEntry(NamedTuple):
    """One compiled pulse: spec, timeline start time, full phase argument."""

    pulse: PulseSpec
    start_time: float
    phase: float


def compile_timeline(seq: Sequence, start_time: float = 0.0) -> list[TimelineEntry]:
    """Resolve pulse start times and phase arguments.

    For a pulse of field ``j`` starting at timeline time ``t`` the phase
    argument is ``rate_j * t + phase_offset`` with ``rate_j`` the field's
    phase rate in the sequence frame (the detuning in rotating mode).  The
    returned phases are not reduced modulo 2*pi; reduction happens inside
    the trigonometric evaluation of the pulse unitary.
    """
    entries = []
    t = start_time
    for e in seq.events:
        if isinstance(e, Wait):
            t += e.duration
        else:
            rate = seq.frame.pulse_phase_rate(e.field)
            entries.append(TimelineEntry(e, t, rate * t + e.phase_offset))
            if seq.clock_during_pulses:
                t += e.tau
    return entries


def evolve(seq: Sequence, initial: SpinState = GROUND, start_time: float = 0.0) -> SpinState:
    """Run the timeline on ``initial`` and return the final state.

    Applies ``free_unitary`` for each wait and ``pulse_unitary`` (with the
    compiled phase argument) for each pulse, in timeline order.  Chaining:
    evolving sequence A and then sequence B with
    ``start_time = A.end_time()`` equals evolving their concatenation.
    """
    state = initial
    t = start_time
    for e in seq.events:
        if isinstance(e, Wait):
            state = apply_unitary(free_unitary(seq.frame, e.duration), state)
            t += e.duration
        else:
            rate = seq.frame.pulse_phase_rate(e.field)
            state = apply_unitary(pulse_unitary(e.field, e.tau, rate * t + e.phase_offset), state)
            if seq.clock_during_pulses:
                t += e.tau
    return state


@dataclass(frozen=True)
class FringeScan:
    """A sampled excitation-probability curve ``p(T)`` with per-point sd."""

    T: np.ndarray
    p: np.ndarray
    sd: np.ndarray
    label: str = ""

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        p = np.asarray(self.p, dtype=float)
        sd = np.asarray(self.sd, dtype=float)
        if T.ndim != 1 or T.size == 0:
            raise ValueError("scan needs at least one point")
        if p.shape != T.shape or sd.shape != T.shape:
            raise ValueError("T, p and sd must have identical shapes")
        if T.size > 1 and not np.all(np.diff(T) > 0.0):
            raise ValueError("T values must be strictly increasing")
        if np.any(p < -1e-9) or np.any(p > 1.0 + 1e-9):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(sd < 0.0):
            raise ValueError("standard deviations must be >= 0")
        p = np.clip(p, 0.0, 1.0)
        for name, arr in (("T", T), ("p", p), ("sd", sd)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.T.size)


def set_scan_value(template: Sequence, T: float) -> Sequence:
    """Return a copy of ``template`` with its scanned wait set to ``T``."""
    marks = [i for i, e in enumerate(template.events) if isinstance(e, Wait) and e.scanned]
    if len(marks) != 1:
        raise SequenceError(f"template must contain exactly one scanned wait, found {len(marks)}")
    events = list(template.events)
    events[marks[0]] = replace(events[marks[0]], duration=float(T))
    return replace(template, events=tuple(events))


def scan(template: Sequence, grid: SequenceType[float]) -> FringeScan:
    """Evaluate ``p(T)`` over ``grid`` by evolving ``|g>`` per grid point.

    The template must carry exactly one wait marked as the scan variable.
    Points are noiseless (``sd = 0``); each evolution is independent, so
    grid points may be distributed over workers and reassembled in order.
    """
    grid_arr = np.asarray(list(grid), dtype=float)
    if grid_arr.size == 0:
        raise SequenceError("scan grid must not be empty")
    if grid_arr.size > 1 and not np.all(np.diff(grid_arr) > 0.0):
        raise SequenceError("scan grid must be strictly increasing")
    if np.any(grid_arr < 0.0):
        raise SequenceError("scan grid values must be >= 0")
    # validates the single scan mark before any evolution runs
    set_scan_value(template, float(grid_arr[0]))
    p = np.empty_like(grid_arr)
    for i, T in enumerate(grid_arr):
        final = evolve(set_scan_value(template, float(T)))
        p[i] = excitation_probability(final)
    return FringeScan(grid_arr, np.clip(p, 0.0, 1.0), np.zeros_like(grid_arr))
