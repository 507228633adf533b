"""Rigid-chain geometry: per-joint arc transforms, whole-body shape, ground settling.

Conventions: the backbone tangent is local +x, left is +y, up is +z.
A positive lateral bend turns the chain left; a positive vertical bend curves
it upward-concave; a positive axial twist is right-handed about the tangent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tendons import JointGeometry

ARC_SAMPLES = 4     # sub-chords per joint arc
MODULE_SAMPLES = 4  # sub-chords per rigid module

_X = np.array([1.0, 0.0, 0.0])


@dataclass
class RobotSpec:
    """Geometric and inertial description of the module chain.

    module_length is derived from total_length when omitted; when given, it
    overrides total_length so the chain sums up exactly.
    """

    module_count: int = 13
    joint_geometry: JointGeometry = field(default_factory=JointGeometry)
    housing_radius: float = 25.0        # mm, moment arm of the globally routed tendons
    total_mass: float = 2.21            # kg
    total_length: float = 1250.0        # mm
    module_length: float | None = None  # mm
    friction_coefficient: float = 0.3
    gravity: float = 9.81               # m/s^2
    spiral_right_handed: bool = True    # winding direction of the spiral tendons

    def __post_init__(self):
        if self.module_count < 2:
            raise ValueError("module_count must be at least 2")
        span = self.joint_geometry.span()
        if self.module_length is None:
            self.module_length = (
                self.total_length - self.joint_count * span
            ) / self.module_count
        else:
            self.total_length = (
                self.module_count * self.module_length + self.joint_count * span
            )
        for name in ("module_length", "total_length", "housing_radius",
                     "total_mass", "friction_coefficient", "gravity"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        residual = abs(
            self.total_length
            - (self.module_count * self.module_length + self.joint_count * span)
        )
        if residual > 1e-9:
            raise ValueError(f"total_length inconsistent with chain sum by {residual} mm")

    @property
    def joint_count(self) -> int:
        return self.module_count - 1


@dataclass
class JointConfig:
    """Actuated state of one joint, all in rad."""

    lateral_bend: float = 0.0   # + = left
    vertical_bend: float = 0.0  # + = upward-concave
    axial_twist: float = 0.0    # + = right-handed about the backbone

    def __post_init__(self):
        for name in ("lateral_bend", "vertical_bend", "axial_twist"):
            if abs(getattr(self, name)) >= math.pi:
                raise ValueError(f"{name} outside (-pi, pi)")


@dataclass
class BodyShape:
    """World-frame realization of a configuration.

    frames: (module_count, 4, 4) homogeneous pose of each module's proximal end.
    centerline: (P, 3) sampled backbone points in mm, head first.
    """

    frames: np.ndarray
    centerline: np.ndarray
    timestamp: float = 0.0


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1.0 - c
    return np.array([
        [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
        [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
        [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
    ])


def _bend_axis(config: JointConfig) -> tuple[np.ndarray | None, float]:
    """Rotation axis and angle of the combined lateral+vertical bend.

    The lateral component rotates about local +z; the upward-concave vertical
    component rotates about local -y. Both are curvature components of a single
    circular arc, so they combine as one axis-angle.
    """
    wy = -config.vertical_bend
    wz = config.lateral_bend
    angle = math.hypot(wy, wz)
    if angle < 1e-12:
        return None, 0.0
    return np.array([0.0, wy / angle, wz / angle]), angle


def _arc_chord(axis: np.ndarray | None, angle: float, arc_length: float) -> np.ndarray:
    """Tip of a circular arc of given length and central angle, in the arc-start frame."""
    if axis is None:
        return arc_length * _X
    # sin(t)/t and (1-cos(t))/t, the latter via 2 sin^2(t/2) to avoid cancellation
    t1 = math.sin(angle) / angle
    t2 = 2.0 * math.sin(0.5 * angle) ** 2 / angle
    curve_dir = np.cross(axis, _X)  # unit: in-plane direction the arc curves toward
    return arc_length * (t1 * _X + t2 * curve_dir)


def joint_transform(config: JointConfig, geom: JointGeometry) -> np.ndarray:
    """Pose of the distal joint face relative to the proximal face, as 4x4.

    Composition: rigid offset a along the tangent, a constant-curvature arc of
    length l, the axial twist about the exiting tangent, then the distal
    offset a. The zero configuration is a pure translation of l + 2a.
    """
    axis, angle = _bend_axis(config)
    if axis is None:
        rot_arc = np.eye(3)
    else:
        rot_arc = _axis_angle(axis, angle)
    chord = _arc_chord(axis, angle, geom.l)
    rot = rot_arc if config.axial_twist == 0.0 else rot_arc @ _rot_x(config.axial_twist)
    out = np.eye(4)
    out[:3, :3] = rot
    out[:3, 3] = geom.a * _X + chord + rot_arc @ (geom.a * _X)
    return out


def forward_kinematics(
    spec: RobotSpec, configs: list[JointConfig], timestamp: float = 0.0
) -> BodyShape:
    """Compose the chain head to tail; head frame at the origin, identity rotation.

    The centerline samples every rigid module and every joint (offsets, arc at
    ARC_SAMPLES sub-chords) densely enough that no two consecutive samples are
    further apart than one joint arc length.
    """
    if len(configs) != spec.joint_count:
        raise ValueError(
            f"expected {spec.joint_count} joint configs, got {len(configs)}"
        )
    geom = spec.joint_geometry
    frames = np.empty((spec.module_count, 4, 4))
    points = [np.zeros(3)]
    T = np.eye(4)
    for i in range(spec.module_count):
        frames[i] = T
        rot = T[:3, :3]
        pos = T[:3, 3]
        # rigid module, subdivided so sample spacing stays below the arc length
        for k in range(1, MODULE_SAMPLES + 1):
            points.append(pos + rot @ ((k / MODULE_SAMPLES) * spec.module_length * _X))
        T = T.copy()
        T[:3, 3] = pos + rot @ (spec.module_length * _X)
        if i >= spec.joint_count:
            break
        config = configs[i]
        axis, angle = _bend_axis(config)
        arc_rot = T[:3, :3]
        arc_start = T[:3, 3] + arc_rot @ (geom.a * _X)
        points.append(arc_start)
        for k in range(1, ARC_SAMPLES + 1):
            frac = k / ARC_SAMPLES
            chord = _arc_chord(axis, angle * frac, geom.l * frac)
            points.append(arc_start + arc_rot @ chord)
        T = T @ joint_transform(config, geom)
        points.append(T[:3, 3])
    return BodyShape(frames=frames, centerline=np.array(points), timestamp=timestamp)


SETTLE_SPAN = math.radians(100.0)  # tilt search half-range
SETTLE_LEVELS = 6
SETTLE_PASSES = 50  # fixed-point cap; real shapes stop after a few
SETTLE_GAIN = 1e-9  # mm of support-height improvement worth another tilt


def _sample_weights(centerline: np.ndarray) -> np.ndarray:
    """Per-sample mass weights from the polyline segment lengths."""
    seg = np.linalg.norm(np.diff(centerline, axis=0), axis=1)
    w = np.zeros(len(centerline))
    w[:-1] += 0.5 * seg
    w[1:] += 0.5 * seg
    return w / w.sum()


def _support_height(centerline: np.ndarray, w: np.ndarray,
                    pitch: float, roll: float) -> float:
    """Center-of-mass height above the lowest point after tilting, mm."""
    x, y, z = centerline[:, 0], centerline[:, 1], centerline[:, 2]
    sp, cp = math.sin(pitch), math.cos(pitch)
    sr, cr = math.sin(roll), math.cos(roll)
    zp = -sp * x + cp * sr * y + cp * cr * z
    return float(zp @ w - zp.min())


def _resting_tilt(centerline: np.ndarray) -> tuple[float, float]:
    """Pitch and roll that rest the rigid shape on the plane.

    Minimizes the height of the center of mass above the lowest point over
    tilts, refined on a shrinking grid. A tilt is only reported when it
    lowers the center of mass by more than SETTLE_GAIN; otherwise (0, 0) is
    returned, which keeps flat and already settled shapes exactly in place.
    """
    w = _sample_weights(centerline)
    x, y, z = centerline[:, 0], centerline[:, 1], centerline[:, 2]
    cp_, cr_ = 0.0, 0.0
    span = SETTLE_SPAN
    for level in range(SETTLE_LEVELS):
        count = 21 if level == 0 else 9
        pitches = cp_ + np.linspace(-span, span, count)
        rolls = cr_ + np.linspace(-span, span, count)
        sp, cp = np.sin(pitches), np.cos(pitches)
        sr, cr = np.sin(rolls), np.cos(rolls)
        # height row of R_y(pitch) @ R_x(roll): z' = -sp*x + cp*sr*y + cp*cr*z
        zp = (-sp[:, None, None] * x
              + (cp[:, None] * sr[None, :])[:, :, None] * y
              + (cp[:, None] * cr[None, :])[:, :, None] * z)
        height = zp @ w - zp.min(axis=2)
        height += 1e-12 * (pitches[:, None] ** 2 + rolls[None, :] ** 2)
        i, j = np.unravel_index(int(np.argmin(height)), height.shape)
        cp_, cr_ = float(pitches[i]), float(rolls[j])
        span = 2.0 * span / (count - 1)
    if (_support_height(centerline, w, 0.0, 0.0)
            <= _support_height(centerline, w, cp_, cr_) + SETTLE_GAIN):
        return 0.0, 0.0
    return cp_, cr_


def settle_on_ground(shape: BodyShape) -> BodyShape:
    """Rest the shape on the z = 0 plane.

    Rotates about pitch and roll into the gravity-stable orientation (the
    center of mass as low as the support allows), iterating the tilt search
    to its fixed point, then drops the shape so the lowest centerline point
    touches the ground. A planar shape settles flat with no rotation, and
    settling twice changes nothing.
    """
    centerline = shape.centerline.copy()
    rot = None
    for _ in range(SETTLE_PASSES):
        pitch, roll = _resting_tilt(centerline)
        if pitch == 0.0 and roll == 0.0:
            break
        step = _axis_angle(np.array([0.0, 1.0, 0.0]), pitch) @ _rot_x(roll)
        centerline = centerline @ step.T
        rot = step if rot is None else step @ rot
    dz = float(centerline[:, 2].min())
    centerline[:, 2] -= dz
    frames = shape.frames.copy()
    if rot is not None:
        frames[:, :3, :3] = rot @ frames[:, :3, :3]
        frames[:, :3, 3] = frames[:, :3, 3] @ rot.T
    frames[:, 2, 3] -= dz
    return BodyShape(frames=frames, centerline=centerline, timestamp=shape.timestamp)


def shape_velocity(prev: BodyShape, next: BodyShape, dt: float) -> np.ndarray:
    """Per-sample finite-difference velocity (mm/s) of the shape change.

    The mean displacement over all samples (the rigid translation component,
    settling shift included) is removed, leaving deformation about the shape
    centroid.
    """
    if prev.centerline.shape != next.centerline.shape:
        raise ValueError(
            f"sampling mismatch: {prev.centerline.shape} vs {next.centerline.shape}"
        )
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    disp = next.centerline - prev.centerline
    return (disp - disp.mean(axis=0)) / dt


def polyline_length(centerline: np.ndarray) -> float:
    """Arc length of the sampled centerline polyline, mm."""
    return float(np.linalg.norm(np.diff(centerline, axis=0), axis=1).sum())
