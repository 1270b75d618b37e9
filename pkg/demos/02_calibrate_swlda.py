"""
Calibration and stepwise LDA
============================

Simulate the calibration run (15 rounds per target, six targets), train the
stepwise classifier and look at what it picked.
"""

# %%
import numpy as np

from tactile_bci import Config, run_calibration
from tactile_bci.swlda import score_matrix, training_accuracy

config = Config().replace(seed=7)
data, model = run_calibration(config.simulation("calibration"))
print(f"{data.n} epochs, {data.n_targets} targets, {data.n_features} features")

# %%
# Features are ordered channel-major: index = channel * 20 + block, and
# block b covers 20 samples starting at b * 39 ms.

names = config.channel_names
for idx, w in zip(model.selected, model.weights):
    ch, block = divmod(idx, 20)
    start = 1000 * block * 20 / config.sample_rate
    print(f"  feature {idx:3d}: {names[ch]:>3s} {start:5.0f} ms  weight {w:+.3f}")

# %%
# Scores separate the classes, though not perfectly at 10 uV background.

scores = score_matrix(model, data.features)
print(f"mean target score {scores[data.labels > 0].mean():+.3f}, "
      f"non-target {scores[data.labels < 0].mean():+.3f}")
print(f"training accuracy (threshold 0): {training_accuracy(model, data):.1%}")

# %%
# With no evoked response there is nothing real to learn. The search still
# admits a few chance correlations at p < 0.10, far fewer than above.

_, null_model = run_calibration(config.replace(target_amplitude=0.0).simulation("calibration"))
print(f"5 uV model selects {len(model.selected)} features, "
      f"zero-amplitude model {len(null_model.selected)}")
print(f"largest |weight| at 5 uV: {np.max(np.abs(model.weights)):.3f}")
