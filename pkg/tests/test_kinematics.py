import math

import numpy as np
import pytest

from snakesim.gait import GaitKind, GaitParams, joint_targets, preset
from snakesim.kinematics import (
    BodyShape,
    JointConfig,
    RobotSpec,
    forward_kinematics,
    joint_transform,
    polyline_length,
    settle_on_ground,
    shape_velocity,
)
from snakesim.tendons import GlobalTendonState, JointGeometry

GEOM = JointGeometry()
SPEC = RobotSpec()


def zero_configs(spec=SPEC):
    return [JointConfig() for _ in range(spec.joint_count)]


def test_spec_defaults_are_consistent():
    assert SPEC.joint_count == 12
    # 13 modules plus 12 straight joints add up to the body length
    assert abs(SPEC.module_length - (1250.0 - 12 * 34.0) / 13.0) < 1e-12
    assert abs(13 * SPEC.module_length + 12 * GEOM.span() - 1250.0) < 1e-9


def test_spec_validation():
    with pytest.raises(ValueError):
        RobotSpec(module_count=1)
    with pytest.raises(ValueError):
        RobotSpec(total_mass=0.0)


def test_module_length_override_recomputes_total():
    spec = RobotSpec(module_count=4, module_length=50.0)
    assert spec.total_length == 4 * 50.0 + 3 * GEOM.span()


def test_joint_config_range():
    with pytest.raises(ValueError):
        JointConfig(lateral_bend=math.pi)
    with pytest.raises(ValueError):
        JointConfig(axial_twist=-3.5)


def test_zero_joint_is_pure_translation():
    T = joint_transform(JointConfig(), GEOM)
    assert np.allclose(T[:3, :3], np.eye(3), atol=1e-15)
    assert np.allclose(T[:3, 3], [GEOM.span(), 0.0, 0.0], atol=1e-15)


def test_lateral_right_angle_matches_arc_chord():
    # constant-curvature oracle: radius x = l/theta, chord offset
    # (x sin(theta), x (1 - cos(theta))) plus the two rigid offsets
    theta = math.pi / 2
    x = GEOM.l / theta
    T = joint_transform(JointConfig(lateral_bend=theta), GEOM)
    tip = [GEOM.a + x * math.sin(theta), x * (1.0 - math.cos(theta)) + GEOM.a, 0.0]
    assert np.allclose(T[:3, 3], tip, atol=1e-9)
    rz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(T[:3, :3], rz, atol=1e-12)


def test_arc_chord_oracle_over_angles():
    for theta in (-2.5, -0.3, 1e-5, 0.7, 3.0):
        T = joint_transform(JointConfig(lateral_bend=theta), GEOM)
        x = GEOM.l / theta
        tip = np.array([
            GEOM.a + x * math.sin(theta) + GEOM.a * math.cos(theta),
            x * (1.0 - math.cos(theta)) + GEOM.a * math.sin(theta),
            0.0,
        ])
        assert np.allclose(T[:3, 3], tip, atol=1e-9)


def test_vertical_bend_lifts_tip():
    T = joint_transform(JointConfig(vertical_bend=math.pi / 2), GEOM)
    assert T[2, 3] > 0.0
    assert abs(T[1, 3]) < 1e-12


def test_pure_twist_does_not_displace():
    T = joint_transform(JointConfig(axial_twist=math.pi / 4), GEOM)
    assert np.allclose(T[:3, 3], [GEOM.span(), 0.0, 0.0], atol=1e-15)
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    assert np.allclose(T[:3, :3], rx, atol=1e-12)


def test_straight_chain():
    shape = forward_kinematics(SPEC, zero_configs())
    assert shape.frames.shape == (13, 4, 4)
    # head frame at the origin, all frames colinear on the x axis
    assert np.allclose(shape.frames[0], np.eye(4), atol=1e-15)
    assert np.max(np.abs(shape.centerline[:, 1:])) < 1e-9
    tip_distance = np.linalg.norm(shape.centerline[-1] - shape.centerline[0])
    assert abs(tip_distance - SPEC.total_length) < 1e-9
    assert abs(polyline_length(shape.centerline) - SPEC.total_length) < 1e-9


def test_four_half_right_angles_turn_around():
    configs = zero_configs()
    for j in range(4):
        configs[j] = JointConfig(lateral_bend=math.pi / 4)
    shape = forward_kinematics(SPEC, configs)
    # module 4 sits past the four bent joints, heading flipped in the plane
    heading = shape.frames[4, :3, :3] @ np.array([1.0, 0.0, 0.0])
    assert np.allclose(heading, [-1.0, 0.0, 0.0], atol=1e-12)


def test_alternating_bends_keep_headings_parallel():
    configs = [JointConfig(lateral_bend=0.5 * (-1.0) ** j)
               for j in range(SPEC.joint_count)]
    shape = forward_kinematics(SPEC, configs)
    assert np.allclose(shape.frames[-1][:3, :3], np.eye(3), atol=1e-9)


def test_changing_a_joint_leaves_proximal_frames_alone():
    configs = zero_configs()
    base = forward_kinematics(SPEC, configs)
    configs[5] = JointConfig(lateral_bend=1.0, vertical_bend=-0.4)
    bent = forward_kinematics(SPEC, configs)
    assert np.array_equal(base.frames[:6], bent.frames[:6])
    assert not np.allclose(base.frames[6], bent.frames[6])


def test_config_count_mismatch():
    with pytest.raises(ValueError):
        forward_kinematics(SPEC, zero_configs()[:-1])


def test_polyline_length_within_one_percent():
    rng = np.random.default_rng(7)
    for _ in range(5):
        configs = [JointConfig(*rng.uniform(-1.0, 1.0, 3))
                   for _ in range(SPEC.joint_count)]
        shape = forward_kinematics(SPEC, configs)
        assert abs(polyline_length(shape.centerline) / SPEC.total_length - 1.0) < 0.01


def test_settle_translates_elevated_straight_shape():
    shape = forward_kinematics(SPEC, zero_configs())
    raised = BodyShape(
        frames=shape.frames.copy(),
        centerline=shape.centerline + np.array([0.0, 0.0, 5.0]),
    )
    raised.frames[:, 2, 3] += 5.0
    settled = settle_on_ground(raised)
    assert np.allclose(settled.centerline, shape.centerline, atol=1e-9)


def test_settle_is_isometric():
    targets = joint_targets(4.0, preset(GaitKind.FORWARD), None, SPEC)
    shape = forward_kinematics(SPEC, targets, 4.0)
    shape.centerline[:, 2] -= 3.0  # start below the plane
    settled = settle_on_ground(shape)
    assert abs(settled.centerline[:, 2].min()) < 1e-9
    before = np.linalg.norm(shape.centerline[:-1] - shape.centerline[1:], axis=1)
    after = np.linalg.norm(settled.centerline[:-1] - settled.centerline[1:], axis=1)
    assert np.allclose(before, after, rtol=0.0, atol=1e-9)


def test_settle_is_idempotent():
    targets = joint_targets(4.0, preset(GaitKind.SIDEWINDING), None, SPEC)
    once = settle_on_ground(forward_kinematics(SPEC, targets, 4.0))
    twice = settle_on_ground(once)
    assert np.array_equal(once.centerline, twice.centerline)
    assert np.array_equal(once.frames, twice.frames)


def test_settle_keeps_planar_shapes_flat():
    targets = joint_targets(0.7, GaitParams(tendons=GlobalTendonState()), None, SPEC)
    shape = forward_kinematics(SPEC, targets, 0.7)
    settled = settle_on_ground(shape)
    assert np.max(np.abs(settled.centerline[:, 2])) < 1e-9


def test_shape_velocity_zero_for_identical_shapes():
    shape = forward_kinematics(SPEC, zero_configs())
    v = shape_velocity(shape, shape, 0.01)
    assert np.array_equal(v, np.zeros_like(shape.centerline))


def test_shape_velocity_removes_rigid_translation():
    shape = forward_kinematics(SPEC, zero_configs())
    moved = BodyShape(
        frames=shape.frames,
        centerline=shape.centerline + np.array([1.0, 0.0, 0.0]),
    )
    v = shape_velocity(shape, moved, 1.0)
    assert np.max(np.abs(v)) < 1e-12


def test_shape_velocity_validation():
    shape = forward_kinematics(SPEC, zero_configs())
    short = BodyShape(frames=shape.frames, centerline=shape.centerline[:-1])
    with pytest.raises(ValueError, match="mismatch"):
        shape_velocity(shape, short, 0.01)
    with pytest.raises(ValueError):
        shape_velocity(shape, shape, 0.0)


def test_shape_velocity_matches_central_difference():
    # forward difference over T/1000 against the centered stencil at the
    # same midpoint; both through the full FK chain
    params = GaitParams(tendons=GlobalTendonState())
    h = params.period / 1000.0
    t = 0.7

    def fk(at):
        return forward_kinematics(SPEC, joint_targets(at, params, None, SPEC), at)

    forward = shape_velocity(fk(t), fk(t + h), h)
    central = shape_velocity(fk(t - 0.5 * h), fk(t + 1.5 * h), 2.0 * h)
    scale = np.max(np.linalg.norm(central, axis=1))
    assert np.max(np.linalg.norm(forward - central, axis=1)) < 0.01 * scale
