"""
Synthetic EEG and the conditioning chain
========================================

Build one online selection by hand: schedule the stimuli, synthesize
background EEG, add the evoked response to the attended command, then filter
and featurize. Run with ``python3 demos/01_signal_and_filters.py``.
"""

# %%
# Three rounds of six stimuli, 400 ms apart (205 samples at 512 Hz).
# The attended command is 4.

import numpy as np

from tactile_bci import (ChannelLayout, ErpModel, NoiseModel, apply_chain, design_chain,
                         generate_background, inject_erp, online_plan, schedule_selection)
from tactile_bci.dsp import epoch_features, extract_epochs

plan = online_plan()
target = 4
events = schedule_selection(plan, 0, start_sample=plan.gap_samples, seed=1, target=target)
print("stimulus order:", [e.command for e in events])
print("onsets (s):", np.round([e.onset_sample / plan.sample_rate for e in events], 2))

# %%
# Background EEG is pink noise plus a 2 uV mains line. The default 10 uV
# background hides a 5 uV response in a single selection, so use 3 uV here
# to make the bump visible. A 2 s lead-in lets the 0.1 Hz high-pass settle
# before the first stimulus.

n = plan.gap_samples + 17 * plan.soa_samples + plan.epoch_samples
raw = generate_background(ChannelLayout(), n / plan.sample_rate, NoiseModel(background_rms=3.0), seed=1)
raw = inject_erp(raw, events, ErpModel(target_amplitude=5.0), seed=1)
print(f"raw buffer {raw.samples.shape}, Pz rms {raw.samples[1].std():.1f} uV")

# %%
# The chain is a 0.1 Hz high-pass, a 60 Hz low-pass and a 48-52 Hz notch.
# Compare the 50 Hz content before and after.

chain = design_chain(plan.sample_rate)
clean = apply_chain(chain, raw)


def line_power(x, fs=plan.sample_rate, f0=50.0):
    spec = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(x.size, 1 / fs)
    return spec[np.argmin(abs(freqs - f0))]


ratio = line_power(clean.samples[1]) / line_power(raw.samples[1])
print(f"50 Hz power after filtering: {10 * np.log10(ratio):.1f} dB")

# %%
# Average the three epochs of each command on Pz. The target's average
# should show a positive bump near 350 ms.

epochs = extract_epochs(clean, events)
t_ms = 1000 * np.arange(plan.epoch_samples) / plan.sample_rate
for cmd in range(6):
    avg = np.mean([ep.samples[1] for ep in epochs if ep.event.command == cmd], axis=0)
    window = (t_ms > 250) & (t_ms < 450)
    tag = "  <- attended" if cmd == target else ""
    print(f"command {cmd}: mean Pz 250-450 ms {avg[window].mean():6.2f} uV{tag}")

# %%
# Decimation by 20 turns each 410-sample, 8-channel epoch into 160 features.

features = epoch_features(clean, events)
print("feature matrix:", features.shape)
