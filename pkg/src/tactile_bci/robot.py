"""Six-command virtual robot arm on a 2-D grid.

The gripper moves one cell per command, picks up the object with GRASP and
puts it down with RELEASE. Commands that cannot take effect (moving off the
grid, grasping empty space, releasing with an empty gripper) are no-ops, so a
misdecoded selection never stops the loop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Sequence


class RobotCommand(IntEnum):
    LEFT = 0
    RIGHT = 1
    FORWARD = 2
    BACK = 3
    GRASP = 4
    RELEASE = 5


_MOVES = {
    RobotCommand.LEFT: (-1, 0),
    RobotCommand.RIGHT: (1, 0),
    RobotCommand.FORWARD: (0, 1),
    RobotCommand.BACK: (0, -1),
}


@dataclass(frozen=True)
class RobotState:
    """Grid state. While held, ``object_at`` follows the gripper."""

    gripper: tuple = (0, 0)
    holding: bool = False
    object_at: tuple = (2, 0)
    goal_at: tuple = (2, 2)
    bounds: tuple = (5, 5)
    last_action_effect: str = "start"

    def __post_init__(self):
        for name in ("gripper", "object_at", "goal_at", "bounds"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        if min(self.bounds) < 1:
            raise ValueError("bounds must be positive")
        for name in ("gripper", "object_at", "goal_at"):
            if not self.inside(getattr(self, name)):
                raise ValueError(f"{name} {getattr(self, name)} lies outside bounds {self.bounds}")
        if self.holding and self.object_at != self.gripper:
            raise ValueError("a held object must sit in the gripper cell")

    def inside(self, cell) -> bool:
        return 0 <= cell[0] < self.bounds[0] and 0 <= cell[1] < self.bounds[1]

    @property
    def task_done(self) -> bool:
        return self.object_at == self.goal_at and not self.holding

    def to_dict(self) -> dict:
        return {"gripper": list(self.gripper), "holding": self.holding,
                "object_at": list(self.object_at), "goal_at": list(self.goal_at),
                "bounds": list(self.bounds), "last_action_effect": self.last_action_effect}

    @classmethod
    def from_dict(cls, d: dict) -> "RobotState":
        return cls(**d)


@dataclass(frozen=True)
class TaskSpec:
    start: RobotState
    description: str = ""

    def __post_init__(self):
        if self.start.object_at == self.start.goal_at:
            raise ValueError("object already sits on the goal cell")


DEFAULT_TASK = TaskSpec(
    RobotState(gripper=(0, 0), object_at=(2, 0), goal_at=(2, 2)),
    "pick up the object two cells to the right and carry it two cells forward",
)


def apply(state: RobotState, cmd) -> RobotState:
    cmd = RobotCommand(int(cmd))
    if cmd in _MOVES:
        dx, dy = _MOVES[cmd]
        target = (state.gripper[0] + dx, state.gripper[1] + dy)
        if not state.inside(target):
            return replace(state, last_action_effect="blocked")
        obj = target if state.holding else state.object_at
        return replace(state, gripper=target, object_at=obj, last_action_effect="moved")
    if cmd is RobotCommand.GRASP:
        if state.holding or state.gripper != state.object_at:
            return replace(state, last_action_effect="noop")
        return replace(state, holding=True, last_action_effect="grasped")
    if not state.holding:
        return replace(state, last_action_effect="noop")
    return replace(state, holding=False, object_at=state.gripper, last_action_effect="released")


def _path(src, dst) -> list:
    # x axis first, then y
    steps = []
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    steps += [RobotCommand.RIGHT if dx > 0 else RobotCommand.LEFT] * abs(dx)
    steps += [RobotCommand.FORWARD if dy > 0 else RobotCommand.BACK] * abs(dy)
    return steps


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def optimal_script(task: TaskSpec) -> list:
    """Shortest command sequence that completes ``task``.

    Moves go x-axis first. A start state that already holds the object
    skips the approach and the GRASP.
    """
    s = task.start
    if not (s.inside(s.object_at) and s.inside(s.goal_at)):
        raise ValueError("object or goal unreachable")
    script = []
    if not s.holding:
        script += _path(s.gripper, s.object_at) + [RobotCommand.GRASP]
    script += _path(s.object_at, s.goal_at) + [RobotCommand.RELEASE]
    return script


def run_task(task: TaskSpec, commands: Sequence) -> tuple:
    """Fold :func:`apply` over ``commands``; returns ``(trace, success)``.

    The trace starts with the task's initial state.
    """
    trace = [task.start]
    for cmd in commands:
        trace.append(apply(trace[-1], cmd))
    return trace, trace[-1].task_done


def render(state: RobotState) -> str:
    """Text grid, forward (increasing y) at the top.

    ``G`` gripper, ``o`` object, ``*`` goal, ``@`` gripper holding the object,
    ``g`` empty gripper over the object.
    """
    rows = []
    for y in reversed(range(state.bounds[1])):
        row = []
        for x in range(state.bounds[0]):
            cell = (x, y)
            if cell == state.gripper:
                ch = "@" if state.holding else ("G" if cell != state.object_at else "g")
            elif cell == state.object_at:
                ch = "o"
            elif cell == state.goal_at:
                ch = "*"
            else:
                ch = "."
            row.append(ch)
        rows.append(" ".join(row))
    return "\n".join(rows)
