"""Configuration files and replayable session records.

A session record is newline-delimited JSON: one header line, then one line
per stimulus event, one per selection, and optionally robot states and raw
signal buffers. Floats are written with ``repr`` precision, so every value
survives a save/load round trip exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import decoder
from .paradigm import N_COMMANDS, SessionPlan, StimulusEvent
from .robot import RobotState
from .signal_model import DEFAULT_CHANNELS, DEFAULT_SPATIAL_WEIGHTS, ChannelLayout, ErpModel, NoiseModel
from .swlda import SwldaModel

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnsupportedVersionError(ValueError):
    pass


class SessionIOError(OSError):
    pass


@dataclass(frozen=True)
class Config:
    sample_rate: float = 512.0
    hp: float = 0.1
    lp: float = 60.0
    notch: tuple = (48.0, 52.0)
    epoch_ms: float = 800.0
    decimation: int = 20
    stimulus_ms: float = 100.0
    isi_ms: float = 300.0
    inter_selection_gap_ms: float = 2000.0
    rounds_online: int = 3
    rounds_calibration: int = 15
    calibration_targets: tuple = tuple(range(N_COMMANDS))
    n_commands: int = N_COMMANDS
    p_enter: float = 0.10
    p_remove: float = 0.15
    max_features: int = 60
    channel_names: tuple = DEFAULT_CHANNELS
    background_rms: float = 10.0
    spectral_slope: float = 1.0
    mains_freq: float = 50.0
    mains_amplitude: float = 2.0
    target_amplitude: float = 5.0
    latency_mean: float = 350.0
    latency_jitter_sd: float = 20.0
    width_sd: float = 60.0
    nontarget_scale: float = 0.0
    spatial_weights: tuple = DEFAULT_SPATIAL_WEIGHTS
    seed: int = 0

    def __post_init__(self):
        for name in ("notch", "calibration_targets", "channel_names", "spatial_weights"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                raise ConfigError(name, "expected a list")
            object.__setattr__(self, name, tuple(value))
        validate_config(self)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        return cls(**d)

    def replace(self, **changes) -> "Config":
        d = self.to_dict()
        d.update(changes)
        return Config.from_dict(d)

    def plan(self, mode: str, rounds: Optional[int] = None) -> SessionPlan:
        if rounds is None:
            rounds = self.rounds_calibration if mode == "calibration" else self.rounds_online
        return SessionPlan(
            mode=mode, rounds_per_selection=rounds,
            targets=self.calibration_targets if mode == "calibration" else (),
            stimulus_ms=self.stimulus_ms, isi_ms=self.isi_ms,
            inter_selection_gap_ms=self.inter_selection_gap_ms,
            sample_rate=self.sample_rate, epoch_ms=self.epoch_ms)

    def simulation(self, mode: str = "online", rounds: Optional[int] = None) -> decoder.SimulationConfig:
        return decoder.SimulationConfig(
            noise=NoiseModel(self.background_rms, self.spectral_slope, self.mains_freq,
                             self.mains_amplitude),
            erp=ErpModel(self.target_amplitude, self.latency_mean, self.latency_jitter_sd,
                         self.width_sd, self.nontarget_scale, self.spatial_weights),
            plan=self.plan(mode, rounds),
            seed=self.seed,
            layout=ChannelLayout(self.channel_names),
            high_pass=self.hp, low_pass=self.lp, notch_band=self.notch,
            decimation=self.decimation, p_enter=self.p_enter, p_remove=self.p_remove,
            max_features=self.max_features)


def _number(cfg, key, integer=False):
    v = getattr(cfg, key)
    ok = isinstance(v, int) if integer else isinstance(v, (int, float))
    if isinstance(v, bool) or not ok or not np.isfinite(v):
        raise ConfigError(key, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
    return v


def validate_config(cfg: Config) -> None:
    """Enforce every module's invariants, naming the first offending key."""
    for key in ("sample_rate", "hp", "lp", "epoch_ms", "stimulus_ms", "isi_ms",
                "inter_selection_gap_ms", "p_enter", "p_remove", "background_rms",
                "spectral_slope", "mains_freq", "mains_amplitude", "target_amplitude",
                "latency_mean", "latency_jitter_sd", "width_sd", "nontarget_scale"):
        _number(cfg, key)
    for key in ("decimation", "rounds_online", "rounds_calibration", "n_commands",
                "max_features", "seed"):
        _number(cfg, key, integer=True)

    def require(cond, key, message):
        if not cond:
            raise ConfigError(key, message)

    require(cfg.sample_rate >= 256, "sample_rate", "must be >= 256 Hz")
    require(0 < cfg.hp < cfg.lp, "hp", "need 0 < hp < lp")
    require(cfg.lp < cfg.sample_rate / 2, "lp", "must be below the Nyquist frequency")
    require(len(cfg.notch) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                         for v in cfg.notch), "notch", "expected [low, high]")
    require(cfg.hp < cfg.notch[0] < cfg.notch[1] < cfg.lp, "notch",
            "band must be increasing and inside (hp, lp)")
    require(cfg.epoch_ms > 0, "epoch_ms", "must be positive")
    require(cfg.decimation >= 1, "decimation", "must be >= 1")
    require(cfg.decimation <= cfg.epoch_ms * cfg.sample_rate / 1000.0, "decimation",
            "exceeds the samples in one epoch")
    require(cfg.stimulus_ms > 0, "stimulus_ms", "must be positive")
    require(cfg.isi_ms >= 0, "isi_ms", "must be >= 0")
    require(cfg.inter_selection_gap_ms >= 0, "inter_selection_gap_ms", "must be >= 0")
    require(cfg.rounds_online >= 1, "rounds_online", "must be >= 1")
    require(cfg.rounds_calibration >= 1, "rounds_calibration", "must be >= 1")
    require(cfg.n_commands == N_COMMANDS, "n_commands", f"the system has exactly {N_COMMANDS} commands")
    require(len(cfg.calibration_targets) >= 1 and all(
        isinstance(t, int) and not isinstance(t, bool) and 0 <= t < N_COMMANDS
        for t in cfg.calibration_targets), "calibration_targets",
        f"need a non-empty list of command indices 0..{N_COMMANDS - 1}")
    require(0 < cfg.p_enter <= cfg.p_remove < 1, "p_enter", "need 0 < p_enter <= p_remove < 1")
    require(cfg.max_features >= 0, "max_features", "must be >= 0")
    require(cfg.seed >= 0, "seed", "must be >= 0")
    require(cfg.background_rms >= 0, "background_rms", "must be >= 0")
    require(0 <= cfg.spectral_slope <= 2, "spectral_slope", "must lie in [0, 2]")
    require(cfg.mains_freq > 0, "mains_freq", "must be positive")
    require(cfg.mains_amplitude >= 0, "mains_amplitude", "must be >= 0")
    require(cfg.target_amplitude >= 0, "target_amplitude", "must be >= 0")
    require(cfg.width_sd > 0, "width_sd", "must be positive")
    require(cfg.latency_jitter_sd >= 0, "latency_jitter_sd", "must be >= 0")
    require(0 <= cfg.latency_mean and cfg.latency_mean + 3 * cfg.width_sd < 800,
            "latency_mean", "latency_mean + 3*width_sd must fall inside the 800 ms epoch")
    require(cfg.nontarget_scale >= 0, "nontarget_scale", "must be >= 0")
    try:
        ChannelLayout(cfg.channel_names)
    except ValueError as e:
        raise ConfigError("channel_names", str(e)) from None
    w = cfg.spatial_weights
    require(len(w) == len(cfg.channel_names) and all(
        isinstance(v, (int, float)) and 0 <= v <= 1 for v in w) and max(w) == 1,
        "spatial_weights", "need one weight in [0, 1] per channel, at least one equal to 1")
    require(round((cfg.stimulus_ms + cfg.isi_ms) * cfg.sample_rate / 1000.0) >= 1,
            "isi_ms", "stimulus onset asynchrony is shorter than one sample")


def load_config(path) -> Config:
    """Read a JSON config; missing keys take defaults, an empty file means
    all defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SessionIOError(f"cannot read config {path}: {e}") from e
    if not text.strip():
        return Config()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"{path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("<file>", f"{path} must hold a JSON object")
    return Config.from_dict(data)


def save_config(config: Config, path) -> None:
    _write_text(path, json.dumps(config.to_dict(), indent=2) + "\n")


def parse_override(item: str) -> tuple:
    """``key=value`` with a JSON value; bare words are taken as strings."""
    key, sep, raw = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(item, "override must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise SessionIOError(f"cannot write {path}: {e.strerror or e}") from e


def save_model(model: SwldaModel, path) -> None:
    _write_text(path, json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path) -> SwldaModel:
    path = Path(path)
    try:
        return SwldaModel.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except OSError as e:
        raise SessionIOError(f"cannot read model {path}: {e.strerror or e}") from e
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ValueError(f"{path} is not a valid model file: {e}") from None


@dataclass(eq=False)
class SessionRecord:
    """One simulated session.

    ``kind`` is "calibration" or "online". Online records embed the model
    they were decoded with and the intent script, so they can be replayed
    without any other file.
    """

    kind: str
    config: dict
    seed: int
    events: list = field(default_factory=list)
    selections: list = field(default_factory=list)
    model: Optional[dict] = None
    intents: list = field(default_factory=list)
    rounds: Optional[int] = None
    robot_trace: Optional[list] = None
    raw_signals: Optional[list] = None
    format_version: int = FORMAT_VERSION
    created_at: str = ""

    def header(self) -> dict:
        return {"record": "header", "format_version": self.format_version,
                "created_at": self.created_at, "kind": self.kind, "seed": self.seed,
                "config": self.config, "model": self.model, "intents": list(self.intents),
                "rounds": self.rounds}

    def to_lines(self) -> list:
        lines = [self.header()]
        for ev in self.events:
            lines.append({"record": "event", **asdict(ev)})
        for sel in self.selections:
            lines.append({"record": "selection", **sel.to_dict()})
        for state in self.robot_trace or ():
            lines.append({"record": "robot", **state.to_dict()})
        for i, (rate, samples) in enumerate(self.raw_signals or ()):
            lines.append({"record": "raw", "selection": i, "sample_rate": rate,
                          "samples": np.asarray(samples).tolist()})
        return [json.dumps(line, allow_nan=False) for line in lines]

    def __eq__(self, other):
        if not isinstance(other, SessionRecord):
            return NotImplemented
        return self.to_lines() == other.to_lines()


def save_session(record: SessionRecord, path) -> None:
    _write_text(path, "\n".join(record.to_lines()) + "\n")


def load_session(path) -> SessionRecord:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SessionIOError(f"cannot read session {path}: {e.strerror or e}") from e
    try:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        header = rows[0]
        if header.get("record") != "header":
            raise ValueError("first line is not a header")
        record = SessionRecord(
            kind=header["kind"], config=header["config"], seed=header["seed"],
            model=header.get("model"), intents=list(header.get("intents", [])),
            rounds=header.get("rounds"), format_version=header["format_version"],
            created_at=header.get("created_at", ""))
        for row in rows[1:]:
            kind = row.pop("record")
            if kind == "event":
                record.events.append(StimulusEvent(**row))
            elif kind == "selection":
                record.selections.append(decoder.SelectionResult.from_dict(row))
            elif kind == "robot":
                record.robot_trace = (record.robot_trace or []) + [RobotState.from_dict(row)]
            elif kind == "raw":
                record.raw_signals = (record.raw_signals or []) + [
                    (row["sample_rate"], np.asarray(row["samples"], dtype=float))]
            else:
                raise ValueError(f"unknown record type {kind!r}")
    except (IndexError, KeyError, TypeError, ValueError) as e:
        raise ValueError(f"{path} is not a valid session record: {e}") from None
    return record


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def record_calibration(config: Config, record_raw: bool = False):
    """Run calibration; returns ``(record, dataset, model)``."""
    data, model, trials = decoder.calibration_session(config.simulation("calibration"))
    record = SessionRecord(
        kind="calibration", config=config.to_dict(), seed=config.seed,
        events=[ev for t in trials for ev in t.events], model=model.to_dict(),
        created_at=_now())
    if record_raw:
        record.raw_signals = [(t.raw.sample_rate, t.raw.samples) for t in trials]
    return record, data, model


def record_online(config: Config, model: SwldaModel, intents: Sequence[int],
                  rounds: Optional[int] = None, record_raw: bool = False) -> SessionRecord:
    sim = config.simulation("online", rounds)
    intents = [int(c) for c in intents]
    if not intents:
        raise ValueError("intents must not be empty")
    chain = sim.chain()
    record = SessionRecord(kind="online", config=config.to_dict(), seed=config.seed,
                           model=model.to_dict(), intents=intents, rounds=rounds,
                           created_at=_now())
    raws = []
    for i, intent in enumerate(intents):
        result, trial = decoder.decode_selection(sim, model, i, intent, chain)
        record.events.extend(trial.events)
        record.selections.append(result)
        raws.append((trial.raw.sample_rate, trial.raw.samples))
    if record_raw:
        record.raw_signals = raws
    return record


def _replay_config(record: SessionRecord) -> Config:
    if record.format_version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"session format_version {record.format_version} is not supported "
            f"(expected {FORMAT_VERSION})")
    return Config.from_dict({**record.config, "seed": record.seed})


def replay(record: SessionRecord) -> list:
    """Regenerate the selections of an online record from its header.

    Calibration records have no selections; use :func:`verify_replay` to
    check their events and model.
    """
    config = _replay_config(record)
    if record.kind == "calibration":
        return []
    model = SwldaModel.from_dict(record.model)
    return decoder.run_online(config.simulation("online", record.rounds), model, record.intents)


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    message: str
    first_divergent: Optional[int] = None


def verify_replay(record: SessionRecord) -> ReplayReport:
    """Re-run a record and compare everything it stores against the rerun."""
    config = _replay_config(record)
    if record.kind == "calibration":
        fresh, _, _ = record_calibration(config)
        if fresh.events != record.events:
            i = _first_difference(record.events, fresh.events)
            return ReplayReport(False, f"event {i} differs from the regenerated schedule", i)
        if fresh.model != record.model:
            return ReplayReport(False, "retrained model differs from the stored model")
        return ReplayReport(True, f"calibration replay matches ({len(record.events)} events)")
    if record.kind != "online":
        raise ValueError(f"unknown session kind {record.kind!r}")
    fresh = record_online(config, SwldaModel.from_dict(record.model), record.intents,
                          record.rounds)
    if fresh.selections != record.selections:
        i = _first_difference(record.selections, fresh.selections)
        return ReplayReport(False, f"selection {i} diverges: stored {_describe(record.selections, i)}"
                                   f", regenerated {_describe(fresh.selections, i)}", i)
    if fresh.events != record.events:
        i = _first_difference(record.events, fresh.events)
        return ReplayReport(False, f"event {i} differs from the regenerated schedule", i)
    return ReplayReport(True, f"replay matches ({len(record.selections)} selections)")


def _first_difference(a: Sequence, b: Sequence) -> int:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return min(len(a), len(b))


def _describe(items: Sequence, i: int) -> str:
    if i >= len(items):
        return "<missing>"
    r = items[i]
    return f"chosen={r.chosen} scores={list(r.command_scores)}"
