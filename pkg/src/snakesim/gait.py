"""Serpenoid motor setpoints, locomotion presets, amplitude taper, steering bias."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .kinematics import JointConfig, RobotSpec
from .tendons import GlobalTendonState, bend_from_motor_angle, global_tendons_to_joint_offsets

TAPER_HEAD_EXTRA = 27.5  # deg, added to the head motor amplitude, fading to 0 at the tail
BIAS_CLAMP = 20.0        # deg, steering authority limit


class GaitKind(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    SIDEWINDING = "sidewinding"
    CUSTOM = "custom"


@dataclass
class GaitParams:
    """Parameters of one locomotion pattern.

    amplitude, phase_shift and taper_head_extra are motor angles in deg;
    period in s. tendons holds the steady global pull displacements, which
    the engine ramps in over the first period rather than applying at once.
    """

    amplitude: float = 90.18
    period: float = 3.0
    phase_shift: float = 45.0
    taper_head_extra: float = TAPER_HEAD_EXTRA
    tendons: GlobalTendonState = field(default_factory=GlobalTendonState)
    kind: GaitKind = GaitKind.CUSTOM

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if not 0.0 < self.phase_shift < 180.0:
            raise ValueError("phase_shift must be in (0, 180) deg")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")
        if self.taper_head_extra < 0.0:
            raise ValueError("taper_head_extra must be nonnegative")
        t = self.tendons
        if self.kind is GaitKind.FORWARD and (t.lower_pull or t.spiral_pull):
            raise ValueError("forward gait uses the upper tendon only")
        if self.kind is GaitKind.BACKWARD and (t.upper_pull or t.spiral_pull):
            raise ValueError("backward gait uses the lower tendon only")
        if self.kind is GaitKind.SIDEWINDING and t.lower_pull:
            raise ValueError("sidewinding gait does not pull the lower tendon")


@dataclass
class SteeringInput:
    """Steering bias in deg, + for a left turn, bounded by the clamp."""

    bias: float = 0.0
    clamp: float = BIAS_CLAMP

    def __post_init__(self):
        if self.clamp < 0.0:
            raise ValueError("clamp must be nonnegative")
        if abs(self.bias) > self.clamp:
            raise ValueError(f"bias {self.bias} exceeds clamp {self.clamp}")


def preset(kind: GaitKind) -> GaitParams:
    """Stock parameter set for one of the three locomotion modes."""
    if kind is GaitKind.FORWARD:
        tendons = GlobalTendonState(upper_pull=52.4)
    elif kind is GaitKind.BACKWARD:
        tendons = GlobalTendonState(lower_pull=69.8)
    elif kind is GaitKind.SIDEWINDING:
        tendons = GlobalTendonState(upper_pull=14.0, spiral_pull=27.9)
    else:
        raise ValueError("custom gait has no preset")
    return GaitParams(amplitude=90.18, period=3.0, phase_shift=45.0,
                      tendons=tendons, kind=kind)


def amplitude_taper(motor_index: int, motor_count: int, extra: float = TAPER_HEAD_EXTRA) -> float:
    """Extra amplitude in deg for one motor, linear from `extra` at the head to 0."""
    if motor_count < 2:
        raise ValueError("motor_count must be at least 2")
    if not 0 <= motor_index < motor_count:
        raise ValueError(f"motor index {motor_index} out of range")
    return extra * (1.0 - motor_index / (motor_count - 1))


def motor_setpoint(
    motor_index: int,
    motor_count: int,
    t: float,
    params: GaitParams,
    steer: SteeringInput | None = None,
) -> float:
    """Commanded motor angle in deg at time t.

    A traveling sine: each motor lags its head-side neighbor by phase_shift,
    so the wave moves head to tail. The steering bias shifts every setpoint
    by the same amount.
    """
    amp = params.amplitude + amplitude_taper(motor_index, motor_count, params.taper_head_extra)
    phase = 360.0 * t / params.period - motor_index * params.phase_shift
    bias = steer.bias if steer is not None else 0.0
    return amp * math.sin(math.radians(phase)) + bias


def tendon_ramp(t: float, params: GaitParams, ramp_start: float = 0.0) -> GlobalTendonState:
    """Global pulls engaged so far: linear from zero to the preset over one period."""
    s = (t - ramp_start) / params.period
    return params.tendons.scaled(min(max(s, 0.0), 1.0))


def targets_from_offsets(
    t: float,
    params: GaitParams,
    steer: SteeringInput | None,
    spec: RobotSpec,
    offsets: list[tuple[float, float]],
) -> list[JointConfig]:
    """Joint configs from undulation setpoints plus given (vertical, twist) offsets."""
    geom = spec.joint_geometry
    n = spec.joint_count
    configs = []
    for j in range(n):
        alpha = math.radians(motor_setpoint(j, n, t, params, steer))
        lateral = bend_from_motor_angle(alpha, geom)
        vertical, twist = offsets[j]
        configs.append(JointConfig(lateral, vertical, twist))
    return configs


def joint_targets(
    t: float,
    params: GaitParams,
    steer: SteeringInput | None,
    spec: RobotSpec,
    ramp_start: float = 0.0,
) -> list[JointConfig]:
    """Full joint configuration at time t: undulation plus global tendon offsets.

    Motor setpoints go through the inverse tendon map to become lateral bends;
    the ramped global pulls add the shared vertical bend and axial twist.
    """
    offsets = global_tendons_to_joint_offsets(tendon_ramp(t, params, ramp_start), spec)
    return targets_from_offsets(t, params, steer, spec, offsets)
