"""Tactile oddball stimulation schedule.

Six palm positions are stimulated one at a time in randomized rounds; every
round visits each command exactly once. Stimuli last 100 ms and are
separated by a 300 ms inter-stimulus interval, so onsets are one
stimulus-onset asynchrony (SOA) of 400 ms apart, i.e. 205 samples at 512 Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .seeding import ROUND_STREAM, derive_seed

N_COMMANDS = 6
CALIBRATION_ROUNDS = 15
ONLINE_ROUNDS = 3
EPOCH_MS = 800.0


def check_command(command: int) -> int:
    if isinstance(command, bool) or not 0 <= int(command) < N_COMMANDS:
        raise ValueError(f"command index must be in 0..{N_COMMANDS - 1}, got {command!r}")
    return int(command)


@dataclass(frozen=True)
class StimulusEvent:
    """One tactile stimulus.

    ``is_target`` is ``None`` when ground truth is unknown to the decoder
    (online mode). ``selection_index`` identifies the selection the event
    belongs to inside a multi-selection session.
    """

    command: int
    onset_sample: int
    round_index: int = 0
    is_target: Optional[bool] = None
    selection_index: int = 0

    def __post_init__(self):
        check_command(self.command)
        if self.onset_sample < 0:
            raise ValueError(f"onset_sample must be >= 0, got {self.onset_sample}")

    def with_target(self, is_target: Optional[bool]) -> "StimulusEvent":
        return StimulusEvent(self.command, self.onset_sample, self.round_index,
                             is_target, self.selection_index)


@dataclass(frozen=True)
class SessionPlan:
    """Timing and repetition settings for a calibration or online session.

    ``targets`` lists the intended command of each calibration selection.
    Online plans leave it empty; the intents come from the caller.
    """

    mode: Literal["calibration", "online"] = "online"
    rounds_per_selection: int = ONLINE_ROUNDS
    targets: tuple = ()
    stimulus_ms: float = 100.0
    isi_ms: float = 300.0
    inter_selection_gap_ms: float = 2000.0
    sample_rate: float = 512.0
    epoch_ms: float = EPOCH_MS

    def __post_init__(self):
        if self.mode not in ("calibration", "online"):
            raise ValueError(f"mode must be 'calibration' or 'online', got {self.mode!r}")
        if self.rounds_per_selection < 1:
            raise ValueError("rounds_per_selection must be >= 1")
        if self.stimulus_ms <= 0 or self.isi_ms < 0:
            raise ValueError("stimulus_ms must be > 0 and isi_ms >= 0")
        if self.inter_selection_gap_ms < 0:
            raise ValueError("inter_selection_gap_ms must be >= 0")
        if self.sample_rate <= 0 or self.epoch_ms <= 0:
            raise ValueError("sample_rate and epoch_ms must be positive")
        object.__setattr__(self, "targets", tuple(check_command(t) for t in self.targets))
        if self.mode == "calibration" and not self.targets:
            raise ValueError("a calibration plan needs at least one target")
        if self.soa_samples < 1:
            raise ValueError("stimulus onset asynchrony rounds to zero samples")

    @property
    def soa_ms(self) -> float:
        return self.stimulus_ms + self.isi_ms

    @property
    def soa_samples(self) -> int:
        return int(round(self.soa_ms * self.sample_rate / 1000.0))

    @property
    def epoch_samples(self) -> int:
        # 409.6 samples at 512 Hz round up so the window spans the full 800 ms
        return int(np.ceil(self.epoch_ms * self.sample_rate / 1000.0 - 1e-9))

    @property
    def gap_samples(self) -> int:
        return int(round(self.inter_selection_gap_ms * self.sample_rate / 1000.0))

    @property
    def events_per_selection(self) -> int:
        return self.rounds_per_selection * N_COMMANDS

    @property
    def n_selections(self) -> int:
        return len(self.targets)


def calibration_plan(targets: Sequence[int] = tuple(range(N_COMMANDS)),
                     rounds: int = CALIBRATION_ROUNDS, **kwargs) -> SessionPlan:
    return SessionPlan(mode="calibration", rounds_per_selection=rounds,
                       targets=tuple(targets), **kwargs)


def online_plan(rounds: int = ONLINE_ROUNDS, **kwargs) -> SessionPlan:
    return SessionPlan(mode="online", rounds_per_selection=rounds, **kwargs)


def build_round(seed: int, previous_last: Optional[int] = None) -> list:
    """Random permutation of the six commands for one round.

    The first command differs from ``previous_last`` so the same palm
    position is never stimulated twice in a row across a round boundary.
    Permutations are redrawn until the constraint holds, which keeps the
    accepted orders uniformly distributed.
    """
    if previous_last is not None:
        previous_last = check_command(previous_last)
    rng = np.random.default_rng(seed)
    while True:
        order = [int(c) for c in rng.permutation(N_COMMANDS)]
        if order[0] != previous_last:
            return order


def schedule_selection(plan: SessionPlan, selection_index: int, start_sample: int,
                       seed: int, target: Optional[int] = None) -> list:
    """Stimulus events of one selection, starting at ``start_sample``.

    For calibration plans the target defaults to ``plan.targets[selection_index]``
    and every event carries ground truth. Online events are unlabeled unless
    ``target`` is given explicitly (used by the simulator, which plays the user).
    """
    if start_sample < 0:
        raise ValueError(f"start_sample must be >= 0, got {start_sample}")
    if target is None and plan.mode == "calibration":
        target = plan.targets[selection_index]
    if target is not None:
        target = check_command(target)

    events = []
    previous = None
    onset = int(start_sample)
    for r in range(plan.rounds_per_selection):
        order = build_round(derive_seed(seed, ROUND_STREAM, selection_index, r), previous)
        for command in order:
            is_target = None if target is None else command == target
            events.append(StimulusEvent(command, onset, r, is_target, selection_index))
            onset += plan.soa_samples
        previous = order[-1]
    return events


def selection_span_samples(plan: SessionPlan) -> int:
    """Samples from the first onset to the end of the last epoch window."""
    return (plan.events_per_selection - 1) * plan.soa_samples + plan.epoch_samples


def session_duration(plan: SessionPlan, n_selections: Optional[int] = None) -> float:
    """Scheduled session length in seconds.

    Each selection lasts from its first onset to 800 ms after its final
    onset; consecutive selections are separated by the inter-selection gap.
    ``n_selections`` overrides the plan's own count (online plans carry none).
    """
    n = plan.n_selections if n_selections is None else int(n_selections)
    if n <= 0:
        return 0.0
    per_selection = ((plan.events_per_selection - 1) * plan.soa_samples / plan.sample_rate
                     + plan.epoch_ms / 1000.0)
    return n * per_selection + (n - 1) * plan.inter_selection_gap_ms / 1000.0
