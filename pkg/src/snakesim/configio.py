"""Flat key=value configs, trajectory CSVs and replay snapshot JSON."""

from __future__ import annotations

import json
from typing import TextIO

from .contact import FrictionParams
from .gait import GaitKind, GaitParams, preset
from .kinematics import RobotSpec
from .runner import SimConfig, TickRow, TRAJECTORY_COLUMNS, TrajectoryRecord
from .tendons import GlobalTendonState, JointGeometry


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


_INT_KEYS = {"module_count", "cycles"}
_BOOL_KEYS = {"spiral_right_handed"}
_ENUM_KEYS = {"gait.kind"}
_FLOAT_KEYS = {
    "module_length_mm",
    "joint.a_mm", "joint.d_mm", "joint.l_mm", "joint.r_mm",
    "housing_radius_mm", "total_mass_kg",
    "mu", "smoothing_eps", "contact_eps_mm",
    "gait.amplitude_deg", "gait.period_s", "gait.phase_shift_deg",
    "gait.taper_deg", "gait.Lu_mm", "gait.Ll_mm", "gait.Lt_mm",
    "dt_s",
}
CONFIG_KEYS = _INT_KEYS | _BOOL_KEYS | _ENUM_KEYS | _FLOAT_KEYS


def default_config(kind: GaitKind = GaitKind.FORWARD, **overrides) -> SimConfig:
    """Robot and friction defaults with the named locomotion preset."""
    return SimConfig(
        spec=RobotSpec(),
        gait=preset(kind),
        friction=FrictionParams(),
        **overrides,
    )


def _parse_value(key: str, raw: str, line_no: int):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            if raw in ("true", "false"):
                return raw == "true"
            raise ValueError(raw)
        if key in _ENUM_KEYS:
            return GaitKind(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {line_no}: bad value {raw!r} for field {key}") from None


def parse_config(text: str) -> SimConfig:
    """Strict parse: every key exactly once, '#' comments and blanks ignored."""
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = (part.strip() for part in body.partition("="))
        if not sep or not key or not raw:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {line_no}: unknown field {key}")
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate field {key}")
        values[key] = _parse_value(key, raw, line_no)
    missing = CONFIG_KEYS - values.keys()
    if missing:
        raise ConfigError(f"missing field {sorted(missing)[0]}")

    geom = JointGeometry(
        a=values["joint.a_mm"], d=values["joint.d_mm"],
        l=values["joint.l_mm"], r=values["joint.r_mm"])
    count = values["module_count"]
    total_length = count * values["module_length_mm"] + (count - 1) * geom.span()
    try:
        spec = RobotSpec(
            module_count=count,
            joint_geometry=geom,
            housing_radius=values["housing_radius_mm"],
            total_mass=values["total_mass_kg"],
            total_length=total_length,
            module_length=values["module_length_mm"],
            friction_coefficient=values["mu"],
            spiral_right_handed=values["spiral_right_handed"],
        )
        gait = GaitParams(
            amplitude=values["gait.amplitude_deg"],
            period=values["gait.period_s"],
            phase_shift=values["gait.phase_shift_deg"],
            taper_head_extra=values["gait.taper_deg"],
            tendons=GlobalTendonState(
                upper_pull=values["gait.Lu_mm"],
                lower_pull=values["gait.Ll_mm"],
                spiral_pull=values["gait.Lt_mm"],
            ),
            kind=values["gait.kind"],
        )
        friction = FrictionParams(
            mu=values["mu"],
            smoothing_eps=values["smoothing_eps"],
            contact_height_eps=values["contact_eps_mm"],
        )
        return SimConfig(
            spec=spec, gait=gait, friction=friction,
            dt=values["dt_s"], cycles=values["cycles"],
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def load_config(path: str) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None


def format_config(config: SimConfig) -> str:
    spec, gait, friction = config.spec, config.gait, config.friction
    geom = spec.joint_geometry

    def fmt(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    pairs = [
        ("module_count", spec.module_count),
        ("module_length_mm", spec.module_length),
        ("joint.a_mm", geom.a),
        ("joint.d_mm", geom.d),
        ("joint.l_mm", geom.l),
        ("joint.r_mm", geom.r),
        ("housing_radius_mm", spec.housing_radius),
        ("total_mass_kg", spec.total_mass),
        ("mu", friction.mu),
        ("smoothing_eps", friction.smoothing_eps),
        ("contact_eps_mm", friction.contact_height_eps),
        ("spiral_right_handed", spec.spiral_right_handed),
        ("gait.kind", gait.kind.value),
        ("gait.amplitude_deg", gait.amplitude),
        ("gait.period_s", gait.period),
        ("gait.phase_shift_deg", gait.phase_shift),
        ("gait.taper_deg", gait.taper_head_extra),
        ("gait.Lu_mm", gait.tendons.upper_pull),
        ("gait.Ll_mm", gait.tendons.lower_pull),
        ("gait.Lt_mm", gait.tendons.spiral_pull),
        ("dt_s", config.dt),
        ("cycles", config.cycles),
    ]
    return "".join(f"{key} = {fmt(value)}\n" for key, value in pairs)


def save_config(config: SimConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_config(config))


def _cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_trajectory_csv(traj: TrajectoryRecord, out: TextIO) -> None:
    """One header line then one row per tick, full float precision."""
    out.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    for row in traj.rows:
        out.write(",".join(_cell(v) for v in row.as_tuple()) + "\n")


def save_trajectory_csv(traj: TrajectoryRecord, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trajectory_csv(traj, fh)


def load_trajectory_csv(path: str, period: float) -> TrajectoryRecord:
    """Rows back from disk; the period is not stored in the CSV, pass it in."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ",".join(TRAJECTORY_COLUMNS):
            raise ConfigError(f"unexpected trajectory header {header!r}")
        rows = []
        for line_no, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != len(TRAJECTORY_COLUMNS):
                raise ConfigError(f"line {line_no}: expected {len(TRAJECTORY_COLUMNS)} fields")
            try:
                rows.append(TickRow(
                    t=float(parts[0]), x=float(parts[1]), y=float(parts[2]),
                    heading=float(parts[3]), vx=float(parts[4]), vy=float(parts[5]),
                    omega=float(parts[6]), contact_count=int(parts[7]),
                    solver_residual=float(parts[8]), solver_iterations=int(parts[9]),
                ))
            except ValueError:
                raise ConfigError(f"line {line_no}: bad numeric field") from None
    if not rows:
        raise ConfigError("trajectory has no rows")
    dt = rows[0].t
    return TrajectoryRecord(dt=dt, period=period, rows=rows)


def save_snapshots_json(traj: TrajectoryRecord, path: str) -> None:
    """One JSON document per episode with per-tick centerlines for replay."""
    if traj.snapshots is None:
        raise ValueError("trajectory was recorded without snapshots")
    doc = {
        "dt": traj.dt,
        "period": traj.period,
        "ticks": [
            {
                "t": row.t,
                "pose": [row.x, row.y, row.heading],
                "contact_count": row.contact_count,
                "centerline": centerline.tolist(),
            }
            for row, centerline in zip(traj.rows, traj.snapshots)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
