"""
Driving the robot arm online
============================

Decode the six-step pick-and-move task at two signal levels and watch the
arm. Each selection averages three rounds of scores per command.
"""

# %%
from tactile_bci import DEFAULT_TASK, Config, RobotCommand, optimal_script, run_calibration, run_online, run_task
from tactile_bci.evaluation import format_report, summarize
from tactile_bci.robot import render

script = optimal_script(DEFAULT_TASK)
print("task:", DEFAULT_TASK.description)
print("script:", [c.name for c in script])
print(render(DEFAULT_TASK.start))

# %%
# A clean recording (0.5 uV background) decodes every command.


def attempt(config):
    _, model = run_calibration(config.simulation("calibration"))
    results = run_online(config.simulation("online"), model, [int(c) for c in script])
    trace, ok = run_task(DEFAULT_TASK, [r.chosen for r in results])
    for r, state in zip(results, trace[1:]):
        print(f"  want {RobotCommand(r.intended).name:8s} got {RobotCommand(r.chosen).name:8s}"
              f" {state.last_action_effect}")
    print("  task", "completed" if ok else "failed")
    return results, trace


results, trace = attempt(Config().replace(seed=3, background_rms=0.5))
print(render(trace[-1]))

# %%
# At the default 10 uV background, three rounds give roughly 80% per
# selection, so the whole six-step task succeeds only some of the time.

results, _ = attempt(Config().replace(seed=4))
print(format_report(summarize(results)))
