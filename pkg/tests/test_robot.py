import itertools

import numpy as np
import pytest

from tactile_bci.robot import (DEFAULT_TASK, RobotCommand, RobotState, TaskSpec, apply,
                               manhattan, optimal_script, render, run_task)

L, R, F, B, GRASP, RELEASE = RobotCommand


def test_commands_biject_with_ids():
    assert [int(c) for c in RobotCommand] == list(range(6))
    assert len({c.name for c in RobotCommand}) == 6


def test_move_off_edge_is_flagged_noop():
    s = apply(RobotState(gripper=(0, 0)), L)
    assert s.gripper == (0, 0)
    assert s.last_action_effect == "blocked"


def test_grasp_on_object():
    s = apply(RobotState(gripper=(2, 0), object_at=(2, 0)), GRASP)
    assert s.holding
    assert s.last_action_effect == "grasped"


@pytest.mark.parametrize("state, cmd", [
    (RobotState(gripper=(0, 0), object_at=(2, 0)), GRASP),
    (RobotState(gripper=(2, 0), object_at=(2, 0), holding=True), GRASP),
    (RobotState(), RELEASE),
])
def test_invalid_manipulation_is_noop(state, cmd):
    out = apply(state, cmd)
    assert out.last_action_effect == "noop"
    assert (out.gripper, out.holding, out.object_at) == (state.gripper, state.holding, state.object_at)


def test_forward_increases_y():
    assert apply(RobotState(gripper=(1, 1)), F).gripper == (1, 2)
    assert apply(RobotState(gripper=(1, 1)), B).gripper == (1, 0)


def test_hand_traced_six_step_script():
    trace, ok = run_task(DEFAULT_TASK, [R, R, GRASP, F, F, RELEASE])
    assert ok
    assert [s.gripper for s in trace] == [(0, 0), (1, 0), (2, 0), (2, 0), (2, 1), (2, 2), (2, 2)]
    assert trace[-1].object_at == (2, 2)
    assert not trace[-1].holding


def test_default_optimal_script_has_six_commands():
    script = optimal_script(DEFAULT_TASK)
    assert script == [R, R, GRASP, F, F, RELEASE]
    assert run_task(DEFAULT_TASK, script)[1]


def test_minimal_task():
    task = TaskSpec(RobotState(gripper=(1, 1), object_at=(1, 1), goal_at=(1, 2)))
    assert optimal_script(task) == [GRASP, F, RELEASE]


def test_axis_order_tie_break_is_x_first():
    task = TaskSpec(RobotState(gripper=(0, 0), object_at=(0, 0), goal_at=(2, 2)))
    script = optimal_script(task)
    assert script == [GRASP, R, R, F, F, RELEASE]
    # the y-first ordering is equally short and also succeeds
    assert run_task(task, [GRASP, F, F, R, R, RELEASE])[1]


def test_task_spec_rejects_object_on_goal():
    with pytest.raises(ValueError):
        TaskSpec(RobotState(object_at=(2, 2), goal_at=(2, 2)))


def test_state_rejects_out_of_bounds():
    with pytest.raises(ValueError):
        RobotState(gripper=(5, 0))


def test_empty_command_list_fails():
    trace, ok = run_task(DEFAULT_TASK, [])
    assert trace == [DEFAULT_TASK.start]
    assert not ok


def test_any_single_substitution_fails_default_task():
    script = optimal_script(DEFAULT_TASK)
    cases = 0
    for pos, wrong in itertools.product(range(len(script)), RobotCommand):
        if wrong == script[pos]:
            continue
        edited = list(script)
        edited[pos] = wrong
        assert not run_task(DEFAULT_TASK, edited)[1], (pos, wrong)
        cases += 1
    assert cases == 30


def random_task(rng):
    w, h = int(rng.integers(2, 8)), int(rng.integers(1, 8))
    while True:
        cells = [(int(rng.integers(w)), int(rng.integers(h))) for _ in range(3)]
        if cells[1] != cells[2]:
            break
    return TaskSpec(RobotState(gripper=cells[0], object_at=cells[1], goal_at=cells[2],
                               bounds=(w, h)))


def test_optimal_script_length_and_success_on_random_tasks():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        task = random_task(rng)
        s = task.start
        script = optimal_script(task)
        assert len(script) == manhattan(s.gripper, s.object_at) + manhattan(s.object_at, s.goal_at) + 2
        assert run_task(task, script)[1]


def test_fuzz_invariants():
    rng = np.random.default_rng(1)
    state = DEFAULT_TASK.start
    for cmd in rng.integers(0, 6, size=100_000):
        new = apply(state, cmd)
        assert new.inside(new.gripper) and new.inside(new.object_at)
        if new.holding:
            assert new.object_at == new.gripper
        if new.holding != state.holding:
            assert cmd in (GRASP, RELEASE)
        if new.object_at != state.object_at:
            assert state.holding
        state = new


def test_apply_is_pure():
    s = RobotState()
    assert apply(s, R) == apply(s, R)
    assert s.gripper == (0, 0)


def test_state_dict_round_trip():
    s = apply(apply(RobotState(gripper=(2, 0)), GRASP), F)
    assert RobotState.from_dict(s.to_dict()) == s


def test_render_default_start():
    assert render(DEFAULT_TASK.start).splitlines() == [
        ". . . . .",
        ". . . . .",
        ". . * . .",
        ". . . . .",
        "G . o . .",
    ]


def test_render_holding():
    trace, _ = run_task(DEFAULT_TASK, [R, R, GRASP, F])
    assert render(trace[-1]).splitlines()[3] == ". . @ . ."
