"""Deterministic teleoperation core: commands, session state, frame stream.

The session owns every mutable piece of a live run and is driven one tick at
a time with the commands that arrived since the previous tick. No clocks and
no sockets here, which is what makes recorded command logs replayable
bit-for-bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .contact import (
    BodyMotion,
    FrictionParams,
    PlanarPose,
    advance_pose,
    detect_contacts,
    solve_quasi_static_report,
)
from .gait import GaitKind, GaitParams, SteeringInput, preset, targets_from_offsets
from .kinematics import (
    BodyShape,
    RobotSpec,
    forward_kinematics,
    settle_on_ground,
    shape_velocity,
)
from .tendons import global_tendons_to_joint_offsets

BIAS_CLAMP = 20.0  # deg, operator bias is clamped, not rejected

PARAM_WHITELIST = (
    "gait.amplitude_deg",
    "gait.period_s",
    "gait.phase_shift_deg",
    "gait.taper_deg",
    "mu",
    "smoothing_eps",
    "contact_eps_mm",
)

SETTABLE_KINDS = (GaitKind.FORWARD, GaitKind.BACKWARD, GaitKind.SIDEWINDING)


class CommandError(ValueError):
    """Malformed or non-whitelisted client command."""


@dataclass(frozen=True)
class SetBias:
    value: float  # deg, clamped on apply


@dataclass(frozen=True)
class SetGait:
    value: GaitKind


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class Reset:
    pass


@dataclass(frozen=True)
class SetParam:
    key: str
    value: float


Command = SetBias | SetGait | Start | Stop | Reset | SetParam


def parse_command(obj) -> Command:
    """JSON dict with a `type` field -> Command; raises CommandError."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise CommandError("command must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "set_bias":
        value = obj.get("value")
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise CommandError("set_bias needs a finite numeric 'value'")
        return SetBias(float(value))
    if kind == "set_gait":
        try:
            gait = GaitKind(obj.get("value"))
        except ValueError:
            raise CommandError(f"unknown gait {obj.get('value')!r}") from None
        if gait not in SETTABLE_KINDS:
            raise CommandError(f"gait {gait.value} cannot be commanded")
        return SetGait(gait)
    if kind == "start":
        return Start()
    if kind == "stop":
        return Stop()
    if kind == "reset":
        return Reset()
    if kind == "set_param":
        key = obj.get("key")
        value = obj.get("value")
        if key not in PARAM_WHITELIST:
            raise CommandError(f"parameter {key!r} is not settable")
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise CommandError("set_param needs a finite numeric 'value'")
        return SetParam(key, float(value))
    raise CommandError(f"unknown command type {kind!r}")


def command_to_json(command: Command) -> dict:
    if isinstance(command, SetBias):
        return {"type": "set_bias", "value": command.value}
    if isinstance(command, SetGait):
        return {"type": "set_gait", "value": command.value.value}
    if isinstance(command, Start):
        return {"type": "start"}
    if isinstance(command, Stop):
        return {"type": "stop"}
    if isinstance(command, Reset):
        return {"type": "reset"}
    return {"type": "set_param", "key": command.key, "value": command.value}


@dataclass
class StateFrame:
    t: float
    pose: PlanarPose
    centerline: np.ndarray      # (S, 3) mm, body frame
    contacts: list[int]         # indices into centerline
    speed: float                # mm/s, rolling one-cycle estimate
    gait: GaitKind
    bias: float
    seq: int

    def to_json(self) -> dict:
        return {
            "type": "state",
            "seq": self.seq,
            "t": self.t,
            "pose": {"x": self.pose.x, "y": self.pose.y, "heading": self.pose.heading},
            "centerline": [[float(p[0]), float(p[1]), float(p[2])]
                           for p in self.centerline],
            "contacts": self.contacts,
            "speed": self.speed,
            "gait": self.gait.value,
            "bias": self.bias,
        }


def _blend_offsets(old, new, u: float) -> list[tuple[float, float]]:
    return [((1.0 - u) * ov + u * nv, (1.0 - u) * ot + u * nt)
            for (ov, ot), (nv, nt) in zip(old, new)]


@dataclass
class TeleopSession:
    """All mutable teleop state, advanced strictly one dt per loop_tick."""

    spec: RobotSpec = field(default_factory=RobotSpec)
    friction: FrictionParams = field(default_factory=FrictionParams)
    dt: float = 0.01
    initial_params: GaitParams | None = None

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.params: GaitParams = (
            self.initial_params if self.initial_params is not None
            else preset(GaitKind.FORWARD))
        self.bias = 0.0
        self.running = True
        self.pose = PlanarPose()
        self.motion = BodyMotion()
        self.seq = 0
        self.tick = 0
        self._reset_gait_clock()

    def _reset_gait_clock(self) -> None:
        self.gait_time = 0.0
        # crossfade source: offsets per joint, zero at a cold start so the
        # pulls ramp in over the first period exactly like a batch episode
        self._old_offsets = [(0.0, 0.0)] * self.spec.joint_count
        self._switch_time = 0.0
        self.shape = settle_on_ground(
            forward_kinematics(self.spec, self._targets(0.0), 0.0))
        self.motion = BodyMotion()
        self._trace: deque[tuple[float, np.ndarray]] = deque()
        self.speed = 0.0

    def _current_offsets(self, t: float) -> list[tuple[float, float]]:
        new = global_tendons_to_joint_offsets(self.params.tendons, self.spec)
        u = (t - self._switch_time) / self.params.period
        u = min(max(u, 0.0), 1.0)
        return _blend_offsets(self._old_offsets, new, u)

    def _targets(self, t: float):
        steer = SteeringInput(bias=self.bias, clamp=BIAS_CLAMP) if self.bias else None
        return targets_from_offsets(t, self.params, steer, self.spec,
                                    self._current_offsets(t))

    def apply_command(self, command: Command) -> None:
        if isinstance(command, SetBias):
            self.bias = min(max(command.value, -BIAS_CLAMP), BIAS_CLAMP)
        elif isinstance(command, SetGait):
            # freeze the currently engaged offsets as the crossfade source so
            # mid-ramp switches stay continuous, then fade to the new preset
            self._old_offsets = self._current_offsets(self.gait_time)
            self._switch_time = self.gait_time
            self.params = preset(command.value)
        elif isinstance(command, Start):
            self.running = True
        elif isinstance(command, Stop):
            self.running = False
        elif isinstance(command, Reset):
            self._reset_gait_clock()
        elif isinstance(command, SetParam):
            self._set_param(command.key, command.value)
        else:
            raise CommandError(f"unhandled command {command!r}")

    def _set_param(self, key: str, value: float) -> None:
        try:
            if key == "gait.amplitude_deg":
                self.params = replace(self.params, amplitude=value)
            elif key == "gait.period_s":
                self.params = replace(self.params, period=value)
            elif key == "gait.phase_shift_deg":
                self.params = replace(self.params, phase_shift=value)
            elif key == "gait.taper_deg":
                self.params = replace(self.params, taper_head_extra=value)
            elif key == "mu":
                self.friction = replace(self.friction, mu=value)
            elif key == "smoothing_eps":
                self.friction = replace(self.friction, smoothing_eps=value)
            elif key == "contact_eps_mm":
                self.friction = replace(self.friction, contact_height_eps=value)
            else:
                raise CommandError(f"parameter {key!r} is not settable")
        except CommandError:
            raise
        except ValueError as err:  # in-range type, out-of-range value
            raise CommandError(f"{key}: {err}") from None

    def _world_centroid(self) -> np.ndarray:
        near = self.shape.centerline[
            self.shape.centerline[:, 2] <= self.friction.contact_height_eps]
        c = near[:, :2].mean(axis=0)
        ch, sh = math.cos(self.pose.heading), math.sin(self.pose.heading)
        return np.array([self.pose.x + ch * c[0] - sh * c[1],
                         self.pose.y + sh * c[0] + ch * c[1]])

    def _update_speed(self) -> None:
        t = self.gait_time
        self._trace.append((t, self._world_centroid()))
        horizon = self.params.period
        while self._trace and self._trace[0][0] < t - horizon - 0.5 * self.dt:
            self._trace.popleft()
        t0, c0 = self._trace[0]
        if t - t0 >= horizon - 0.5 * self.dt and t > t0:
            self.speed = float(np.linalg.norm(self._trace[-1][1] - c0)) / (t - t0)
        else:
            self.speed = 0.0

    def loop_tick(self, commands: list[Command] = ()) -> StateFrame:
        """Apply queued commands, advance one tick unless paused, emit a frame.

        A tick that handled a Reset emits the fresh t = 0 shape instead of
        advancing, so clients see the reinitialized state immediately.
        """
        was_reset = any(isinstance(c, Reset) for c in commands)
        for command in commands:
            self.apply_command(command)
        if self.running and not was_reset:
            t = self.gait_time + self.dt
            shape = settle_on_ground(
                forward_kinematics(self.spec, self._targets(t), t))
            velocities = shape_velocity(self.shape, shape, self.dt)
            contacts = detect_contacts(shape, self.spec, self.friction, velocities)
            report = solve_quasi_static_report(
                contacts, self.friction, self.spec.total_length, self.motion)
            self.pose = advance_pose(self.pose, report.motion, self.dt)
            self.gait_time = t
            self.shape = shape
            self.motion = report.motion
            self._update_speed()
        self.tick += 1
        self.seq += 1
        return self.frame()

    def frame(self) -> StateFrame:
        z = self.shape.centerline[:, 2]
        contacts = [int(i) for i in
                    np.flatnonzero(z <= self.friction.contact_height_eps)]
        return StateFrame(
            t=self.gait_time,
            pose=self.pose,
            centerline=self.shape.centerline,
            contacts=contacts,
            speed=self.speed,
            gait=self.params.kind,
            bias=self.bias,
            seq=self.seq,
        )


def replay(log: list[tuple[int, Command]], ticks: int,
           session: TeleopSession | None = None) -> list[StateFrame]:
    """Re-run a recorded (tick, command) log; frames match the live run."""
    sess = session if session is not None else TeleopSession()
    by_tick: dict[int, list[Command]] = {}
    for tick, command in log:
        by_tick.setdefault(tick, []).append(command)
    frames = []
    for tick in range(ticks):
        frames.append(sess.loop_tick(by_tick.get(tick, [])))
    return frames
