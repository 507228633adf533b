"""Tendon actuation model: bend angle <-> motor angle, and the globally routed tendons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .kinematics import RobotSpec

SMALL_BEND = 1e-4    # rad; below this the arc term of the motor-angle map uses its series
THETA_MARGIN = 1e-6  # rad; keep-out from the +/-pi bend singularity
BISECT_TOL = 1e-13   # rad; bracket width at which the inverse map stops


@dataclass
class JointGeometry:
    """Lengths fixing one bending joint's tendon geometry, all in mm.

    a: rigid offset from the motor face to the start of the bending arc
    d: lateral offset of the tendon anchor from the backbone
    l: arc length of the flexible backbone
    r: radius of the motor rotor the tendon winds onto
    """

    a: float = 7.0
    d: float = 10.5
    l: float = 20.0
    r: float = 10.5

    def __post_init__(self):
        for name in ("a", "d", "l", "r"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"joint geometry {name} must be positive")

    def span(self) -> float:
        """Straight-line length of the joint at zero bend: l + 2a."""
        return self.l + 2.0 * self.a


@dataclass
class BendGeometry:
    """Radii of a joint bent at angle theta: backbone arc radius x, the offset
    y = x tan(theta/2), and the tendon-side radius R = x + a cot(theta/2)."""

    x: float
    y: float
    R: float


def bend_geometry(theta: float, geom: JointGeometry) -> BendGeometry:
    if not 0.0 < abs(theta) < math.pi:
        raise ValueError("bend geometry is defined for 0 < |theta| < pi")
    th = abs(theta)
    x = geom.l / th
    half = 0.5 * th
    return BendGeometry(
        x=x,
        y=x * math.tan(half),
        R=x + geom.a / math.tan(half),
    )


def motor_angle_from_bend(theta: float, geom: JointGeometry) -> float:
    """Motor rotation (rad) that bends one joint to angle theta (rad).

    Winding the tendon by r*alpha shortens it to the chord-side length of the
    constant-curvature arc, which gives, for theta > 0,

        alpha = (2a/r)(1 - cos(theta/2)) + (l/r)(1 - (2/theta) sin(theta/2))
                + (2d/r) sin(theta/2)

    Pulling the opposite tendon mirrors the geometry, so the map extends to
    negative bends as an odd function. The (2/theta) sin(theta/2) factor is
    evaluated by series near zero to avoid cancellation.
    """
    if abs(theta) >= math.pi:
        raise ValueError(f"bend angle {theta:.6g} rad outside (-pi, pi)")
    if theta == 0.0:
        return 0.0
    th = abs(theta)
    half = 0.5 * th
    if th < SMALL_BEND:
        arc_term = th * th / 24.0 - th**4 / 1920.0  # 1 - (2/theta) sin(theta/2)
    else:
        arc_term = 1.0 - 2.0 * math.sin(half) / th
    alpha = (
        (2.0 * geom.a / geom.r) * (1.0 - math.cos(half))
        + (geom.l / geom.r) * arc_term
        + (2.0 * geom.d / geom.r) * math.sin(half)
    )
    return math.copysign(alpha, theta)


def motor_angle_limit(geom: JointGeometry) -> float:
    """Largest motor angle (rad) the inverse map accepts, just short of a pi bend."""
    return motor_angle_from_bend(math.pi - THETA_MARGIN, geom)


def bend_from_motor_angle(alpha: float, geom: JointGeometry) -> float:
    """Bend angle (rad) reaching motor angle alpha, by bracketed bisection.

    The forward map is strictly increasing on (0, pi), so bisection on the
    magnitude converges unconditionally; negative angles use odd symmetry.
    Raises ValueError when alpha lies outside the invertible range.
    """
    if alpha == 0.0:
        return 0.0
    limit = motor_angle_limit(geom)
    target = abs(alpha)
    if target > limit:
        raise ValueError(
            f"motor angle {alpha:.9g} rad outside the invertible range "
            f"[{-limit:.9g}, {limit:.9g}] rad"
        )
    c_a = 2.0 * geom.a / geom.r
    c_l = geom.l / geom.r
    c_d = 2.0 * geom.d / geom.r
    sin = math.sin
    cos = math.cos
    lo, hi = 0.0, math.pi - THETA_MARGIN
    while hi - lo > BISECT_TOL:
        th = 0.5 * (lo + hi)
        half = 0.5 * th
        if th < SMALL_BEND:
            arc_term = th * th / 24.0 - th**4 / 1920.0
        else:
            arc_term = 1.0 - 2.0 * sin(half) / th
        value = c_a * (1.0 - cos(half)) + c_l * arc_term + c_d * sin(half)
        if value < target:
            lo = th
        else:
            hi = th
    return math.copysign(0.5 * (lo + hi), alpha)


@dataclass
class GlobalTendonState:
    """Pull displacements (mm) of the three body-length tendon runs."""

    upper_pull: float = 0.0   # back tendons, bend the body upward-concave
    lower_pull: float = 0.0   # abdomen tendons, bend the body downward-concave
    spiral_pull: float = 0.0  # spiral tendons, twist the body axially

    def __post_init__(self):
        if self.upper_pull < 0.0 or self.lower_pull < 0.0 or self.spiral_pull < 0.0:
            raise ValueError("tendon pulls must be non-negative")
        if self.upper_pull > 0.0 and self.lower_pull > 0.0:
            raise ValueError("upper and lower tendons are antagonistic; only one may be pulled")

    def scaled(self, factor: float) -> "GlobalTendonState":
        return GlobalTendonState(
            self.upper_pull * factor,
            self.lower_pull * factor,
            self.spiral_pull * factor,
        )


def global_tendons_to_joint_offsets(
    state: GlobalTendonState, spec: "RobotSpec"
) -> list[tuple[float, float]]:
    """Per-joint (vertical_bend, axial_twist) in rad from the global tendon pulls.

    A pull p acting at moment arm housing_radius commands a total angle
    p / housing_radius, spread evenly over all joints. The body twists against
    the spiral winding direction.
    """
    joints = spec.joint_count
    vertical = (state.upper_pull - state.lower_pull) / spec.housing_radius / joints
    winding = 1.0 if spec.spiral_right_handed else -1.0
    twist = -winding * state.spiral_pull / spec.housing_radius / joints
    return [(vertical, twist)] * joints
