"""Fixed-timestep episode loop wiring gait, shape, contacts and pose together."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contact import (
    BodyMotion,
    ContactPoint,
    FrictionParams,
    PlanarPose,
    SolverError,
    advance_pose,
    detect_contacts,
    solve_quasi_static_report,
)
from .gait import GaitParams, SteeringInput, joint_targets
from .kinematics import (
    BodyShape,
    RobotSpec,
    forward_kinematics,
    settle_on_ground,
    shape_velocity,
)

MIN_STEPS_PER_PERIOD = 50

TRAJECTORY_COLUMNS = (
    "t", "x", "y", "heading", "vx", "vy", "omega",
    "contact_count", "solver_residual", "solver_iterations",
)

BiasSchedule = Callable[[float], float]


@dataclass
class SimConfig:
    spec: RobotSpec
    gait: GaitParams
    friction: FrictionParams
    dt: float = 0.01        # s
    cycles: int = 10        # undulation periods per episode
    output: str | None = None

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.dt > self.gait.period / MIN_STEPS_PER_PERIOD:
            raise ValueError(
                f"dt {self.dt} too coarse; need at least {MIN_STEPS_PER_PERIOD} steps per period")
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ValueError("cycles must be an integer >= 1")
        self.cycles = int(self.cycles)

    @property
    def ticks_per_cycle(self) -> int:
        return round(self.gait.period / self.dt)

    @property
    def tick_count(self) -> int:
        return self.cycles * self.ticks_per_cycle


@dataclass
class TickRow:
    """One trajectory sample, written after the tick it describes."""

    t: float
    x: float
    y: float
    heading: float
    vx: float
    vy: float
    omega: float
    contact_count: int
    solver_residual: float
    solver_iterations: int

    def as_tuple(self) -> tuple:
        return (self.t, self.x, self.y, self.heading, self.vx, self.vy,
                self.omega, self.contact_count, self.solver_residual,
                self.solver_iterations)


@dataclass
class TrajectoryRecord:
    dt: float
    period: float
    rows: list[TickRow] = field(default_factory=list)
    snapshots: list[np.ndarray] | None = None  # per-tick body-frame centerlines (S, 3)


@dataclass
class Metrics:
    mean_speed: float               # mm/s over whole cycles, ramp cycle excluded
    heading_drift: float            # deg per cycle
    direction: np.ndarray           # unit 2-vector of net displacement, world frame
    per_cycle_displacement: list[float]  # mm between consecutive cycle boundaries


@dataclass
class SimState:
    tick: int
    pose: PlanarPose
    shape: BodyShape
    motion: BodyMotion
    contacts: list[ContactPoint]
    solver_residual: float = 0.0
    solver_iterations: int = 0


def _steer(bias: float) -> SteeringInput | None:
    return SteeringInput(bias=bias) if bias != 0.0 else None


def initial_state(config: SimConfig, bias: float = 0.0) -> SimState:
    """Settled planar S-shape at t = 0; global pulls start their ramp here."""
    targets = joint_targets(0.0, config.gait, _steer(bias), config.spec)
    shape = settle_on_ground(forward_kinematics(config.spec, targets, 0.0))
    return SimState(
        tick=0,
        pose=PlanarPose(),
        shape=shape,
        motion=BodyMotion(),
        contacts=[],
    )


def step(state: SimState, config: SimConfig, bias: float = 0.0,
         ramp_start: float = 0.0) -> SimState:
    """Advance one tick: targets -> shape -> settle -> offsets -> balance -> pose."""
    tick = state.tick + 1
    t = tick * config.dt
    targets = joint_targets(t, config.gait, _steer(bias), config.spec,
                            ramp_start=ramp_start)
    shape = settle_on_ground(forward_kinematics(config.spec, targets, t))
    velocities = shape_velocity(state.shape, shape, config.dt)
    contacts = detect_contacts(shape, config.spec, config.friction, velocities)
    try:
        report = solve_quasi_static_report(
            contacts, config.friction, config.spec.total_length, state.motion)
    except SolverError as err:
        raise SolverError(f"tick {tick}: {err}", err.residual) from err
    pose = advance_pose(state.pose, report.motion, config.dt)
    return SimState(
        tick=tick,
        pose=pose,
        shape=shape,
        motion=report.motion,
        contacts=contacts,
        solver_residual=report.residual,
        solver_iterations=report.iterations,
    )


def run_episode(config: SimConfig, bias_fn: BiasSchedule | None = None,
                snapshots: bool = False) -> TrajectoryRecord:
    """Run cycles*T/dt ticks from the planar S-shape start, one row per tick."""
    bias_at = bias_fn if bias_fn is not None else lambda t: 0.0
    state = initial_state(config, bias_at(0.0))
    traj = TrajectoryRecord(
        dt=config.dt,
        period=config.gait.period,
        snapshots=[] if snapshots else None,
    )
    for _ in range(config.tick_count):
        t_next = (state.tick + 1) * config.dt
        state = step(state, config, bias_at(t_next))
        traj.rows.append(TickRow(
            t=state.tick * config.dt,
            x=state.pose.x,
            y=state.pose.y,
            heading=state.pose.heading,
            vx=state.motion.vx,
            vy=state.motion.vy,
            omega=state.motion.omega,
            contact_count=len(state.contacts),
            solver_residual=state.solver_residual,
            solver_iterations=state.solver_iterations,
        ))
        if traj.snapshots is not None:
            traj.snapshots.append(state.shape.centerline.copy())
    return traj


def _world_point(row: TickRow, body_xy: np.ndarray) -> np.ndarray:
    ch, sh = math.cos(row.heading), math.sin(row.heading)
    return np.array([
        row.x + ch * body_xy[0] - sh * body_xy[1],
        row.y + sh * body_xy[0] + ch * body_xy[1],
    ])


def _boundary_centroid(traj: TrajectoryRecord, config: SimConfig, cycle: int,
                       bias_at: BiasSchedule) -> np.ndarray:
    """World position of the contact centroid at a cycle boundary."""
    per = round(traj.period / traj.dt)
    row = traj.rows[cycle * per - 1]
    if traj.snapshots is not None:
        centerline = traj.snapshots[cycle * per - 1]
    else:
        targets = joint_targets(row.t, config.gait, _steer(bias_at(row.t)),
                                config.spec)
        centerline = settle_on_ground(
            forward_kinematics(config.spec, targets, row.t)).centerline
    near = centerline[centerline[:, 2] <= config.friction.contact_height_eps]
    return _world_point(row, near[:, :2].mean(axis=0))


def compute_metrics(traj: TrajectoryRecord, config: SimConfig,
                    bias_fn: BiasSchedule | None = None) -> Metrics:
    """Speed and drift over whole cycles after the ramp cycle.

    Measured on the contact-centroid trajectory between cycle boundaries;
    boundary shapes are recomputed from the config unless the record carries
    snapshots.
    """
    per = round(traj.period / traj.dt)
    cycles = len(traj.rows) // per
    if cycles < 2:
        raise ValueError("trajectory too short: metrics need at least 2 full cycles")
    bias_at = bias_fn if bias_fn is not None else lambda t: 0.0
    centroids = [_boundary_centroid(traj, config, c, bias_at)
                 for c in range(1, cycles + 1)]
    net = centroids[-1] - centroids[0]
    span = (cycles - 1) * traj.period
    distance = float(np.linalg.norm(net))
    h0 = traj.rows[per - 1].heading
    h1 = traj.rows[cycles * per - 1].heading
    return Metrics(
        mean_speed=distance / span,
        heading_drift=math.degrees(h1 - h0) / (cycles - 1),
        direction=net / distance if distance > 0.0 else np.zeros(2),
        per_cycle_displacement=[
            float(np.linalg.norm(b - a))
            for a, b in zip(centroids[:-1], centroids[1:])],
    )


def mean_body_axis(traj: TrajectoryRecord) -> np.ndarray:
    """Unit head-to-tail-reversed axis: mean world head minus tail direction.

    Averaged over every tick after the ramp cycle; needs snapshots. Positive
    axial displacement means head-first travel.
    """
    if traj.snapshots is None:
        raise ValueError("mean_body_axis needs a record with snapshots")
    per = round(traj.period / traj.dt)
    if len(traj.rows) <= per:
        raise ValueError("trajectory too short: axis excludes the ramp cycle")
    total = np.zeros(2)
    for row, centerline in zip(traj.rows[per:], traj.snapshots[per:]):
        head = _world_point(row, centerline[0, :2])
        tail = _world_point(row, centerline[-1, :2])
        chord = head - tail
        norm = float(np.linalg.norm(chord))
        if norm > 0.0:
            total += chord / norm
    return total / float(np.linalg.norm(total))
