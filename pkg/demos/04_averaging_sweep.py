"""
Why average over rounds
=======================

Accuracy against ERP amplitude and rounds per selection. The single-round
decoder is weak; three rounds (the online setting) and fifteen (the
calibration setting) trade time for accuracy. Takes about a minute.
"""

# %%
from tactile_bci import Config, run_calibration, run_online
from tactile_bci.evaluation import chance_interval, itr_bits, summarize
from tactile_bci.paradigm import online_plan, session_duration

n = 120
intents = [i % 6 for i in range(n)]
lo, hi = chance_interval(n)
print(f"chance 16.7%, 99% region for n={n}: [{lo:.1%}, {hi:.1%}]")

# %%
print(f"{'amp':>4} {'rounds':>6} {'acc':>6} {'bits/min':>8}")
for amp in (0.0, 3.0, 5.0):
    config = Config().replace(seed=11, target_amplitude=amp)
    _, model = run_calibration(config.simulation("calibration"))
    for rounds in (1, 3, 15):
        acc = summarize(run_online(config.simulation("online", rounds), model, intents)).accuracy
        seconds = session_duration(online_plan(rounds), 1)
        print(f"{amp:4.0f} {rounds:6d} {acc:6.1%} {60 * itr_bits(acc) / seconds:8.2f}")

# %%
# More rounds always help accuracy, but each selection takes longer, so the
# information rate peaks at an intermediate depth.
