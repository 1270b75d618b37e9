"""Online signal conditioning: band-pass, mains notch, epoching, decimation.

The chain is causal (second-order sections run forward only), matching what
an online BCI can do. Continuous buffers are filtered once and then sliced
into 0-800 ms epochs; each epoch is reduced to per-channel block means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal

from .paradigm import EPOCH_MS, StimulusEvent
from .signal_model import SignalBuffer, epoch_samples_for

DECIMATION = 20


@dataclass(frozen=True, eq=False)
class FilterChain:
    high_pass_cutoff: float
    low_pass_cutoff: float
    notch_band: tuple
    sample_rate: float
    sos: np.ndarray

    @property
    def notch_center(self) -> float:
        return 0.5 * (self.notch_band[0] + self.notch_band[1])


def design_chain(sample_rate: float = 512.0, high_pass: float = 0.1,
                 low_pass: float = 60.0, notch_band: Sequence[float] = (48.0, 52.0),
                 high_pass_order: int = 2, low_pass_order: int = 8) -> FilterChain:
    """Design the causal conditioning filter.

    Stages, in order: Butterworth high-pass, Butterworth low-pass and a
    second-order notch whose -3 dB edges sit on ``notch_band``.
    """
    lo, hi = (float(f) for f in notch_band)
    if sample_rate < 256:
        raise ValueError(f"sample_rate {sample_rate} Hz is too low for this chain (need >= 256 Hz)")
    if not 0 < high_pass < low_pass < sample_rate / 2:
        raise ValueError("need 0 < high_pass < low_pass < sample_rate/2")
    if not high_pass < lo < hi < low_pass:
        raise ValueError("notch band must be ordered and lie inside the pass band")

    hp = signal.butter(high_pass_order, high_pass, btype="highpass", fs=sample_rate, output="sos")
    lp = signal.butter(low_pass_order, low_pass, btype="lowpass", fs=sample_rate, output="sos")
    center = 0.5 * (lo + hi)
    b, a = signal.iirnotch(center, center / (hi - lo), fs=sample_rate)
    sos = np.vstack([hp, lp, signal.tf2sos(b, a)])
    return FilterChain(float(high_pass), float(low_pass), (lo, hi), float(sample_rate), sos)


def apply_chain(chain: FilterChain, buffer: SignalBuffer) -> SignalBuffer:
    """Filter every channel from a zero initial state."""
    if buffer.sample_rate != chain.sample_rate:
        raise ValueError(f"buffer is sampled at {buffer.sample_rate} Hz, "
                         f"chain was designed for {chain.sample_rate} Hz")
    return SignalBuffer(signal.sosfilt(chain.sos, buffer.samples, axis=1), buffer.sample_rate)


@dataclass(frozen=True, eq=False)
class Epoch:
    samples: np.ndarray
    event: Optional[StimulusEvent] = None


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Decimated epoch, channel-major (channel 0 blocks first).

    ``label`` is +1 for targets, -1 for non-targets and ``None`` if unknown.
    """

    values: np.ndarray
    label: Optional[int] = None

    def __len__(self):
        return len(self.values)


def extract_epochs(buffer: SignalBuffer, events: Sequence[StimulusEvent],
                   epoch_ms: float = EPOCH_MS) -> list:
    """Slice ``[onset, onset + 410)`` for each event (at 512 Hz).

    Windows of neighbouring events overlap because the SOA is shorter than
    the epoch; each event still gets its full window.
    """
    length = epoch_samples_for(buffer.sample_rate, epoch_ms)
    epochs = []
    for i, ev in enumerate(events):
        stop = ev.onset_sample + length
        if stop > buffer.n_samples:
            raise IndexError(f"epoch for event {i} (onset {ev.onset_sample}) ends at sample "
                             f"{stop}, past the buffer end {buffer.n_samples}")
        epochs.append(Epoch(buffer.samples[:, ev.onset_sample:stop].copy(), ev))
    return epochs


def decimate_samples(samples: np.ndarray, factor: int = DECIMATION) -> np.ndarray:
    """Block means of ``factor`` samples along the last axis, flattened per
    leading index. Trailing samples that do not fill a block are dropped."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[-1]
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if factor > n:
        raise ValueError(f"factor {factor} exceeds the {n} samples per channel")
    n_blocks = n // factor
    used = samples[..., :n_blocks * factor]
    blocks = used.reshape(samples.shape[:-1] + (n_blocks, factor)).mean(axis=-1)
    return blocks.reshape(samples.shape[:-2] + (-1,))


def _label_of(event: Optional[StimulusEvent]) -> Optional[int]:
    if event is None or event.is_target is None:
        return None
    return 1 if event.is_target else -1


def decimate_epoch(epoch: Epoch, factor: int = DECIMATION) -> FeatureVector:
    """Reduce an 8 x 410 epoch to 8 x 20 block means (160 features)."""
    return FeatureVector(decimate_samples(epoch.samples, factor), _label_of(epoch.event))


def epoch_features(buffer: SignalBuffer, events: Sequence[StimulusEvent],
                   factor: int = DECIMATION, epoch_ms: float = EPOCH_MS) -> np.ndarray:
    """Feature matrix (n_events, n_features) for a filtered buffer."""
    epochs = extract_epochs(buffer, events, epoch_ms)
    if not epochs:
        return np.empty((0, 0))
    stack = np.stack([e.samples for e in epochs])
    return decimate_samples(stack, factor)
