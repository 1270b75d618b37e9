"""Synthetic parietal EEG with time-locked somatosensory ERPs.

The background is Gaussian noise shaped to a 1/f^slope power spectrum plus a
mains sinusoid; ERPs are Gaussian bumps added after target (and, optionally,
non-target) stimulus onsets. All amplitudes are in microvolts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as sp_fft

from .paradigm import EPOCH_MS, StimulusEvent
from .seeding import EVENT_STREAM, rng_for

DEFAULT_CHANNELS = ("P3", "Pz", "P4", "CP1", "CP2", "CP5", "CP6", "POz")
# Midline parietal sites carry the strongest response.
DEFAULT_SPATIAL_WEIGHTS = (0.8, 1.0, 0.8, 0.9, 0.9, 0.6, 0.6, 0.9)
N_CHANNELS = 8


@dataclass(frozen=True)
class ChannelLayout:
    names: tuple = DEFAULT_CHANNELS
    reference_label: str = "A1"
    ground_label: str = "Fpz"

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if len(names) != N_CHANNELS:
            raise ValueError(f"layout needs exactly {N_CHANNELS} channels, got {len(names)}")
        if any(not n.strip() for n in names) or len(set(names)) != len(names):
            raise ValueError("channel labels must be unique and non-empty")
        object.__setattr__(self, "names", names)

    @property
    def n_channels(self) -> int:
        return len(self.names)


@dataclass(frozen=True, eq=False)
class SignalBuffer:
    """Multichannel EEG, ``samples`` shaped (channels, time)."""

    samples: np.ndarray
    sample_rate: float = 512.0

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=float)
        if data.ndim != 2:
            raise ValueError(f"samples must be 2-D (channels, time), got shape {data.shape}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(data)):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "samples", data)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, SignalBuffer):
            return NotImplemented
        return (self.sample_rate == other.sample_rate
                and np.array_equal(self.samples, other.samples))


@dataclass(frozen=True)
class NoiseModel:
    background_rms: float = 10.0
    spectral_slope: float = 1.0
    mains_freq: float = 50.0
    mains_amplitude: float = 2.0

    def __post_init__(self):
        if self.background_rms < 0:
            raise ValueError("background_rms must be >= 0")
        if self.mains_amplitude < 0:
            raise ValueError("mains_amplitude must be >= 0")
        if not 0 <= self.spectral_slope <= 2:
            raise ValueError("spectral_slope must lie in [0, 2]")
        if self.mains_freq <= 0:
            raise ValueError("mains_freq must be positive")


@dataclass(frozen=True)
class ErpModel:
    """Gaussian-envelope ERP; times in ms, amplitudes in microvolts."""

    target_amplitude: float = 5.0
    latency_mean: float = 350.0
    latency_jitter_sd: float = 20.0
    width_sd: float = 60.0
    nontarget_scale: float = 0.0
    spatial_weights: tuple = DEFAULT_SPATIAL_WEIGHTS

    def __post_init__(self):
        weights = tuple(float(w) for w in self.spatial_weights)
        object.__setattr__(self, "spatial_weights", weights)
        if self.target_amplitude < 0:
            raise ValueError("target_amplitude must be >= 0")
        if self.width_sd <= 0 or self.latency_jitter_sd < 0:
            raise ValueError("width_sd must be > 0 and latency_jitter_sd >= 0")
        if self.latency_mean < 0 or self.latency_mean + 3 * self.width_sd >= EPOCH_MS:
            raise ValueError("latency_mean + 3*width_sd must fall inside the 800 ms epoch")
        if self.nontarget_scale < 0:
            raise ValueError("nontarget_scale must be >= 0")
        if len(weights) != N_CHANNELS:
            raise ValueError(f"spatial_weights needs {N_CHANNELS} entries, got {len(weights)}")
        if any(not 0 <= w <= 1 for w in weights) or max(weights) != 1.0:
            raise ValueError("spatial_weights must lie in [0, 1] with at least one equal to 1")


def generate_background(layout: ChannelLayout, duration: float, noise: NoiseModel,
                        seed: int, sample_rate: float = 512.0) -> SignalBuffer:
    """Background EEG of ``floor(duration * sample_rate)`` samples.

    White Gaussian noise is shaped in the frequency domain so its power falls
    as 1/f^slope (synthesized on an FFT-friendly length, then truncated),
    the mean is removed, and each channel is rescaled to exactly
    ``background_rms``. A mains sinusoid with a random phase per
    channel is added on top.
    """
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    n = int(np.floor(duration * sample_rate + 1e-9))
    if n < 1:
        raise ValueError(f"duration {duration} s holds no samples at {sample_rate} Hz")
    n_ch = layout.n_channels
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, size=n_ch)

    data = np.zeros((n_ch, n))
    if noise.background_rms > 0 and n > 1:
        m = sp_fft.next_fast_len(n, real=True)
        spectrum = sp_fft.rfft(rng.standard_normal((n_ch, m)), axis=1)
        freqs = sp_fft.rfftfreq(m, d=1.0 / sample_rate)
        gain = np.zeros_like(freqs)
        gain[1:] = freqs[1:] ** (-noise.spectral_slope / 2.0)
        shaped = sp_fft.irfft(spectrum * gain, n=m, axis=1)[:, :n]
        shaped -= shaped.mean(axis=1, keepdims=True)
        rms = np.sqrt(np.mean(shaped ** 2, axis=1, keepdims=True))
        data += shaped * (noise.background_rms / np.where(rms > 0, rms, 1.0))
    if noise.mains_amplitude > 0:
        t = np.arange(n) / sample_rate
        data += noise.mains_amplitude * np.sin(2 * np.pi * noise.mains_freq * t + phases[:, None])
    return SignalBuffer(data, sample_rate)


def erp_template(erp: ErpModel, latency: float, length: int,
                 sample_rate: float = 512.0) -> np.ndarray:
    """Single-channel Gaussian deflection peaking at ``latency`` ms.

    The peak is snapped to the nearest sample so that sample holds exactly
    ``target_amplitude``.
    """
    if length <= 0:
        raise ValueError(f"length must be positive, got {length}")
    if erp.target_amplitude == 0:
        return np.zeros(length)
    peak = round(latency * sample_rate / 1000.0)
    t_ms = (np.arange(length) - peak) * 1000.0 / sample_rate
    return erp.target_amplitude * np.exp(-0.5 * (t_ms / erp.width_sd) ** 2)


def epoch_samples_for(sample_rate: float, epoch_ms: float = EPOCH_MS) -> int:
    return int(np.ceil(epoch_ms * sample_rate / 1000.0 - 1e-9))


def inject_erp(buffer: SignalBuffer, events: Sequence[StimulusEvent], erp: ErpModel,
               seed: int) -> SignalBuffer:
    """Return a copy of ``buffer`` with an ERP added after each event.

    Target events get the full template; non-targets (including events whose
    ground truth is unknown) get it scaled by ``nontarget_scale``. Latency
    jitter for each event is drawn from a generator keyed on
    ``(seed, onset_sample, command)``, so splitting an event list across
    several calls gives the same result as a single call.
    """
    if buffer.n_channels != len(erp.spatial_weights):
        raise ValueError("buffer channel count does not match spatial_weights")
    length = epoch_samples_for(buffer.sample_rate)
    for i, ev in enumerate(events):
        if ev.onset_sample + length > buffer.n_samples:
            raise IndexError(
                f"event {i} (command {ev.command}, onset {ev.onset_sample}) needs samples "
                f"up to {ev.onset_sample + length}, buffer has {buffer.n_samples}")

    data = buffer.samples.copy()
    weights = np.asarray(erp.spatial_weights)[:, None]
    for ev in events:
        scale = 1.0 if ev.is_target else erp.nontarget_scale
        if scale == 0.0 or erp.target_amplitude == 0.0:
            continue
        rng = rng_for(seed, EVENT_STREAM, ev.onset_sample, ev.command)
        latency = erp.latency_mean + erp.latency_jitter_sd * rng.standard_normal()
        wave = scale * erp_template(erp, latency, length, buffer.sample_rate)
        data[:, ev.onset_sample:ev.onset_sample + length] += weights * wave
    return SignalBuffer(data, buffer.sample_rate)
