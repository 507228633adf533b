import math

import numpy as np
import pytest

from snakesim.gait import GaitKind, preset
from snakesim.teleop import (
    BIAS_CLAMP,
    Command,
    CommandError,
    PARAM_WHITELIST,
    Reset,
    SetBias,
    SetGait,
    SetParam,
    Start,
    Stop,
    TeleopSession,
    command_to_json,
    parse_command,
    replay,
)
from snakesim.tendons import global_tendons_to_joint_offsets

DT = 0.06  # coarse loop keeps these tests quick


def session() -> TeleopSession:
    return TeleopSession(dt=DT)


ALL_COMMANDS = [
    SetBias(7.5),
    SetGait(GaitKind.SIDEWINDING),
    Start(),
    Stop(),
    Reset(),
    SetParam("mu", 0.25),
]


def test_commands_round_trip_through_json():
    for command in ALL_COMMANDS:
        assert parse_command(command_to_json(command)) == command


def test_parse_rejects_malformed_input():
    bad = [
        "stop",
        {"value": 1.0},
        {"type": "warp"},
        {"type": "set_bias"},
        {"type": "set_bias", "value": "left"},
        {"type": "set_bias", "value": math.inf},
        {"type": "set_bias", "value": math.nan},
        {"type": "set_gait", "value": "custom"},
        {"type": "set_gait", "value": "moonwalk"},
        {"type": "set_param", "key": "spec.total_mass_kg", "value": 1.0},
        {"type": "set_param", "key": "mu", "value": "high"},
    ]
    for obj in bad:
        with pytest.raises(CommandError):
            parse_command(obj)


def test_bias_is_clamped_not_rejected():
    sess = session()
    sess.apply_command(SetBias(35.0))
    assert sess.bias == BIAS_CLAMP
    sess.apply_command(SetBias(-100.0))
    assert sess.bias == -BIAS_CLAMP
    sess.apply_command(SetBias(-BIAS_CLAMP))
    assert sess.bias == -BIAS_CLAMP


def test_last_command_in_a_tick_wins():
    sess = session()
    frame = sess.loop_tick([SetBias(5.0), SetBias(-3.0)])
    assert frame.bias == -3.0


def test_stop_freezes_time_and_pose():
    sess = session()
    for _ in range(3):
        sess.loop_tick()
    frame = sess.loop_tick([Stop()])
    frozen = (frame.t, frame.pose.x, frame.pose.y, frame.pose.heading)
    for _ in range(2):
        frame = sess.loop_tick()
    assert (frame.t, frame.pose.x, frame.pose.y, frame.pose.heading) == frozen
    assert frame.seq == 6  # frames keep flowing while paused
    frame = sess.loop_tick([Start()])
    assert frame.t > frozen[0]


def test_reset_restores_start_shape_at_current_pose():
    sess = session()
    for _ in range(5):
        last = sess.loop_tick()
    assert last.t > 0.0
    frame = sess.loop_tick([Reset()])
    assert frame.t == 0.0
    assert np.array_equal(frame.centerline, session().frame().centerline)
    # world pose survives: the robot restarts its gait where it stands
    assert (frame.pose.x, frame.pose.y) == (last.pose.x, last.pose.y)
    assert frame.speed == 0.0


def test_reset_tick_does_not_advance():
    sess = session()
    sess.loop_tick()
    tick_before = sess.tick
    sess.loop_tick([Reset()])
    assert sess.tick == tick_before + 1
    assert sess.gait_time == 0.0


def test_gait_switch_keeps_offsets_continuous():
    sess = session()
    for _ in range(10):  # mid-ramp of the forward preset
        sess.loop_tick()
    before = sess._current_offsets(sess.gait_time)
    sess.apply_command(SetGait(GaitKind.BACKWARD))
    after = sess._current_offsets(sess.gait_time)
    assert after == before
    assert sess.params.kind is GaitKind.BACKWARD


def test_gait_switch_fades_to_new_preset_in_one_period():
    sess = session()
    for _ in range(10):
        sess.loop_tick()
    sess.apply_command(SetGait(GaitKind.BACKWARD))
    ticks_per_period = round(sess.params.period / DT)
    for _ in range(ticks_per_period + 1):
        sess.loop_tick()
    target = global_tendons_to_joint_offsets(
        preset(GaitKind.BACKWARD).tendons, sess.spec)
    assert sess._current_offsets(sess.gait_time) == target


def test_whitelisted_params_apply():
    sess = session()
    values = {
        "gait.amplitude_deg": 45.0,
        "gait.period_s": 2.5,
        "gait.phase_shift_deg": 30.0,
        "gait.taper_deg": 5.0,
        "mu": 0.25,
        "smoothing_eps": 0.2,
        "contact_eps_mm": 1.5,
    }
    assert set(values) == set(PARAM_WHITELIST)
    for key, value in values.items():
        sess.apply_command(SetParam(key, value))
    assert sess.params.amplitude == 45.0
    assert sess.params.period == 2.5
    assert sess.params.phase_shift == 30.0
    assert sess.params.taper_head_extra == 5.0
    assert sess.friction.mu == 0.25
    assert sess.friction.smoothing_eps == 0.2
    assert sess.friction.contact_height_eps == 1.5


def test_out_of_range_param_is_a_command_error():
    sess = session()
    with pytest.raises(CommandError, match="gait.period_s"):
        sess.apply_command(SetParam("gait.period_s", 0.0))
    # session keeps its old value and keeps running
    assert sess.params.period == 3.0
    assert sess.loop_tick().t == DT


def test_speed_needs_one_full_period():
    sess = session()
    ticks_per_period = round(sess.params.period / DT)
    for _ in range(ticks_per_period - 1):
        frame = sess.loop_tick()
        assert frame.speed == 0.0
    for _ in range(3):
        frame = sess.loop_tick()
    assert frame.speed > 0.0


def test_frames_report_contact_indices():
    frame = session().loop_tick()
    assert frame.contacts == sorted(set(frame.contacts))
    assert all(0 <= i < len(frame.centerline) for i in frame.contacts)
    assert len(frame.contacts) > 0


def test_replay_reproduces_live_frames():
    log: list[tuple[int, Command]] = [
        (3, SetBias(8.0)),
        (10, SetGait(GaitKind.SIDEWINDING)),
        (15, SetParam("gait.amplitude_deg", 60.0)),
        (20, Stop()),
        (24, Start()),
        (27, Reset()),
    ]
    by_tick: dict[int, list[Command]] = {}
    for tick, command in log:
        by_tick.setdefault(tick, []).append(command)
    live = session()
    live_frames = [live.loop_tick(by_tick.get(tick, [])) for tick in range(30)]
    replayed = replay(log, 30, session())
    assert len(replayed) == len(live_frames)
    for a, b in zip(live_frames, replayed):
        assert a.to_json() == b.to_json()


def test_session_validates_dt():
    with pytest.raises(ValueError, match="dt"):
        TeleopSession(dt=0.0)
