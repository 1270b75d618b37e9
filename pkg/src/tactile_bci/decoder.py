"""Closed-loop simulation: stimulate, synthesize EEG, condition, score, decide.

Every selection is synthesized in its own buffer: a lead-in equal to the
inter-selection gap (so the high-pass filter has settled when the first
stimulus arrives), followed by the stimulation sequence and the final 800 ms
epoch tail. Randomness for selection ``i`` is derived from
``(seed, stream, i)`` only, so selections can be regenerated one at a time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import dsp
from .paradigm import (N_COMMANDS, SessionPlan, StimulusEvent, calibration_plan,
                       check_command, schedule_selection)
from .seeding import CALIBRATION_STREAM, ONLINE_STREAM, derive_seed
from .signal_model import (ChannelLayout, ErpModel, NoiseModel, SignalBuffer, epoch_samples_for,
                           generate_background, inject_erp)
from .swlda import MAX_FEATURES, P_ENTER, P_REMOVE, Dataset, SwldaModel, score_matrix, train

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionResult:
    intended: Optional[int]
    chosen: int
    command_scores: tuple
    rounds_used: int
    tie_flag: bool = False

    def to_dict(self) -> dict:
        return {"intended": self.intended, "chosen": self.chosen,
                "command_scores": list(self.command_scores),
                "rounds_used": self.rounds_used, "tie_flag": self.tie_flag}

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        return cls(d["intended"], d["chosen"], tuple(d["command_scores"]),
                   d["rounds_used"], d["tie_flag"])


@dataclass(frozen=True)
class SimulationConfig:
    noise: NoiseModel = field(default_factory=NoiseModel)
    erp: ErpModel = field(default_factory=ErpModel)
    plan: SessionPlan = field(default_factory=calibration_plan)
    seed: int = 0
    layout: ChannelLayout = field(default_factory=ChannelLayout)
    high_pass: float = 0.1
    low_pass: float = 60.0
    notch_band: tuple = (48.0, 52.0)
    decimation: int = dsp.DECIMATION
    p_enter: float = P_ENTER
    p_remove: float = P_REMOVE
    max_features: int = MAX_FEATURES

    def chain(self) -> dsp.FilterChain:
        return dsp.design_chain(self.plan.sample_rate, self.high_pass, self.low_pass,
                                self.notch_band)

    def with_plan(self, plan: SessionPlan) -> "SimulationConfig":
        return replace(self, plan=plan)


@dataclass(frozen=True, eq=False)
class SelectionTrial:
    """Everything produced while simulating one selection."""

    events: list
    features: np.ndarray
    raw: SignalBuffer


def simulate_selection(config: SimulationConfig, selection_index: int, target: int,
                       stream: int, chain: Optional[dsp.FilterChain] = None) -> SelectionTrial:
    """Synthesize, filter and featurize one selection whose attended command
    is ``target``. Returned events carry the labels the decoder would see
    (ground truth in calibration, unknown online)."""
    plan = config.plan
    target = check_command(target)
    chain = chain or config.chain()
    lead = plan.gap_samples
    events = schedule_selection(plan, selection_index, lead,
                                derive_seed(config.seed, stream), target)
    truth = [ev.with_target(ev.command == target) for ev in events]
    if plan.mode == "online":
        events = [ev.with_target(None) for ev in events]

    # the ERP window is 800 ms whatever epoch length the decoder uses
    tail = max(plan.epoch_samples, epoch_samples_for(plan.sample_rate))
    n_samples = lead + (plan.events_per_selection - 1) * plan.soa_samples + tail
    sel_seed = derive_seed(config.seed, stream, selection_index)
    raw = generate_background(config.layout, n_samples / plan.sample_rate, config.noise,
                              sel_seed, plan.sample_rate)
    raw = inject_erp(raw, truth, config.erp, sel_seed)
    filtered = dsp.apply_chain(chain, raw)
    features = dsp.epoch_features(filtered, events, config.decimation, plan.epoch_ms)
    return SelectionTrial(events, features, raw)


def decide(scored_events: Sequence, intended: Optional[int] = None) -> SelectionResult:
    """Six-way decision from ``(event, score)`` pairs.

    Each command's score is the mean over its epochs; the largest mean wins
    and exact ties go to the lowest command index.
    """
    totals = np.zeros(N_COMMANDS)
    counts = np.zeros(N_COMMANDS, dtype=int)
    for ev, s in scored_events:
        c = ev.command if isinstance(ev, StimulusEvent) else check_command(ev)
        totals[c] += float(s)
        counts[c] += 1
    if counts.min() == 0 or np.any(counts != counts[0]):
        raise ValueError(f"every command needs the same number of epochs, got counts {counts.tolist()}")
    means = totals / counts
    if not np.all(np.isfinite(means)):
        raise ValueError("scores must be finite")
    best = float(means.max())
    winners = np.flatnonzero(means == best)
    return SelectionResult(intended, int(winners[0]), tuple(float(m) for m in means),
                           int(counts[0]), bool(len(winners) > 1))


def calibration_session(config: SimulationConfig):
    """Like :func:`run_calibration` but also returns the per-selection trials."""
    plan = config.plan
    if plan.mode != "calibration":
        raise ValueError("run_calibration needs a calibration plan")
    chain = config.chain()
    trials = []
    for i, target in enumerate(plan.targets):
        trials.append(simulate_selection(config, i, target, CALIBRATION_STREAM, chain))
        log.debug("calibration selection %d/%d done", i + 1, plan.n_selections)
    labels = [1.0 if ev.is_target else -1.0 for t in trials for ev in t.events]
    data = Dataset(np.vstack([t.features for t in trials]), np.array(labels))
    model = train(data, config.p_enter, config.p_remove, config.max_features)
    log.info("calibration: %d epochs, %d features selected", data.n, len(model.selected))
    return data, model, trials


def run_calibration(config: SimulationConfig):
    """Simulate the calibration session and train SWLDA on it.

    Returns ``(dataset, model)``. With the default plan the dataset has
    6 selections x 15 rounds x 6 stimuli = 540 epochs, 90 of them targets.
    """
    data, model, _ = calibration_session(config)
    return data, model


def decode_selection(config: SimulationConfig, model: SwldaModel, selection_index: int,
                     intent: int, chain: Optional[dsp.FilterChain] = None):
    """One online selection; returns ``(SelectionResult, SelectionTrial)``."""
    trial = simulate_selection(config, selection_index, intent, ONLINE_STREAM, chain)
    scores = score_matrix(model, trial.features)
    result = decide(list(zip(trial.events, scores)), intended=check_command(intent))
    return result, trial


def run_online(config: SimulationConfig, model: SwldaModel, intents: Sequence[int]) -> list:
    """Decode one selection per intent with the online averaging depth."""
    if config.plan.mode != "online":
        raise ValueError("run_online needs an online plan")
    intents = [check_command(c) for c in intents]
    if not intents:
        raise ValueError("intents must not be empty")
    chain = config.chain()
    return [decode_selection(config, model, i, intent, chain)[0]
            for i, intent in enumerate(intents)]
