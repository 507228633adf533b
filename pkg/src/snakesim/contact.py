"""Ground contacts and the quasi-static planar friction balance.

The body is massless at gait timescales: each tick, the rigid planar motion
(vx, vy, omega) is the one where sliding friction over all contacts sums to
zero net force and zero vertical-axis moment. Velocities are in body axes,
positions in mm, forces in N, moments in N mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import BodyShape, RobotSpec

MAX_ITERATIONS = 100
RESIDUAL_RTOL = 1e-6  # of mu * weight (forces) and mu * weight * length (moment)


@dataclass
class FrictionParams:
    mu: float = 0.3
    smoothing_eps: float = 0.1      # mm/s, regularizes |u| near zero
    contact_height_eps: float = 2.0  # mm, samples this close to the ground carry load

    def __post_init__(self):
        for name in ("mu", "smoothing_eps", "contact_height_eps"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ContactPoint:
    """One loaded centerline sample.

    body_velocity_offset is the horizontal shape-change velocity at the
    sample, mm/s; the solver adds the rigid motion on top of it.
    """

    index: int
    position: np.ndarray        # (3,) mm
    normal_load: float          # N
    body_velocity_offset: np.ndarray  # (2,) mm/s


@dataclass
class BodyMotion:
    """Planar rigid velocity about the contact centroid, body axes."""

    vx: float = 0.0     # mm/s
    vy: float = 0.0     # mm/s
    omega: float = 0.0  # rad/s


@dataclass
class PlanarPose:
    x: float = 0.0        # mm
    y: float = 0.0        # mm
    heading: float = 0.0  # rad


class SolverError(RuntimeError):
    """Force balance did not converge; carries the final residual [Fx, Fy, Mz]."""

    def __init__(self, message: str, residual: np.ndarray):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolveReport:
    """Converged motion plus the bookkeeping trajectory rows want."""

    motion: BodyMotion
    residual: float    # max residual relative to mu*weight (forces) and mu*weight*length (moment)
    iterations: int


def detect_contacts(
    shape: BodyShape,
    spec: RobotSpec,
    params: FrictionParams,
    velocities: np.ndarray | None = None,
) -> list[ContactPoint]:
    """Centerline samples within the height threshold, sharing the weight equally.

    velocities, when given, is the per-sample shape velocity array matching the
    centerline; its horizontal components become the contact offsets.
    """
    z = shape.centerline[:, 2]
    idx = np.flatnonzero(z <= params.contact_height_eps)
    if idx.size == 0:
        raise ValueError("no centerline sample near the ground; settle the shape first")
    load = spec.total_mass * spec.gravity / idx.size
    zero = np.zeros(2)
    contacts = []
    for i in idx:
        offset = velocities[i, :2].copy() if velocities is not None else zero.copy()
        contacts.append(ContactPoint(
            index=int(i),
            position=shape.centerline[i].copy(),
            normal_load=load,
            body_velocity_offset=offset,
        ))
    return contacts


def friction_force(u: np.ndarray, load: float, params: FrictionParams) -> np.ndarray:
    """Smoothed Coulomb sliding force for slip velocity u, opposing u.

    The regularization caps |f| at mu*load and keeps the law differentiable
    through u = 0.
    """
    speed_sq = float(u[0] * u[0] + u[1] * u[1])
    factor = params.mu * load / math.sqrt(speed_sq + params.smoothing_eps ** 2)
    return -factor * u


def contact_velocities(contacts: list[ContactPoint], motion: BodyMotion) -> np.ndarray:
    """Slip velocity (K, 2) at each contact: rigid motion about the centroid plus offset."""
    pos = np.array([c.position[:2] for c in contacts])
    rel = pos - pos.mean(axis=0)
    u = np.array([c.body_velocity_offset for c in contacts], dtype=float)
    u[:, 0] += motion.vx - motion.omega * rel[:, 1]
    u[:, 1] += motion.vy + motion.omega * rel[:, 0]
    return u


def equilibrium_residual(
    contacts: list[ContactPoint], params: FrictionParams, motion: BodyMotion
) -> np.ndarray:
    """Net friction [Fx N, Fy N, Mz N mm], moment about the contact centroid."""
    pos = np.array([c.position[:2] for c in contacts])
    rel = pos - pos.mean(axis=0)
    u = contact_velocities(contacts, motion)
    loads = np.array([c.normal_load for c in contacts])
    speed = np.sqrt(np.einsum("ij,ij->i", u, u) + params.smoothing_eps ** 2)
    forces = -(params.mu * loads / speed)[:, None] * u
    net = forces.sum(axis=0)
    moment = float(np.einsum("i,i->", rel[:, 0], forces[:, 1])
                   - np.einsum("i,i->", rel[:, 1], forces[:, 0]))
    return np.array([net[0], net[1], moment])


def solve_quasi_static(
    contacts: list[ContactPoint],
    params: FrictionParams,
    length_scale: float,
    initial: BodyMotion | None = None,
) -> BodyMotion:
    """Rigid motion where the contact friction forces and moment cancel."""
    return solve_quasi_static_report(contacts, params, length_scale, initial).motion


def solve_quasi_static_report(
    contacts: list[ContactPoint],
    params: FrictionParams,
    length_scale: float,
    initial: BodyMotion | None = None,
) -> SolveReport:
    """Rigid motion where the contact friction forces and moment cancel.

    Damped Newton on the 3-residual system with a central-difference Jacobian.
    The damping (a Levenberg-style shift on the normal equations) covers the
    two hard regimes: the near-singular Jacobian where all contacts slide in
    saturation, and degenerate contact sets that constrain no rotation. The
    unknowns are scaled as (vx, vy, omega*length_scale) so one step size
    fits all three.
    """
    if not contacts:
        raise ValueError("need at least one contact")
    rel = np.array([c.position[:2] for c in contacts])
    rel = rel - rel.mean(axis=0)
    loads = np.array([c.normal_load for c in contacts])
    offsets = np.array([c.body_velocity_offset for c in contacts], dtype=float)
    force_scale = params.mu * loads.sum()
    tol = RESIDUAL_RTOL * np.array([force_scale, force_scale, force_scale * length_scale])
    eps_sq = params.smoothing_eps ** 2

    def residual(s: np.ndarray) -> np.ndarray:
        omega = s[2] / length_scale
        ux = offsets[:, 0] + s[0] - omega * rel[:, 1]
        uy = offsets[:, 1] + s[1] + omega * rel[:, 0]
        factor = params.mu * loads / np.sqrt(ux * ux + uy * uy + eps_sq)
        fx = -factor * ux
        fy = -factor * uy
        return np.array([
            fx.sum(), fy.sum(), float(rel[:, 0] @ fy - rel[:, 1] @ fx)]) / tol

    def dissipation_potential(s: np.ndarray) -> float:
        # the residual is exactly the gradient of this smooth concave function,
        # so ascending it makes every damped Newton iteration a sure step
        omega = s[2] / length_scale
        ux = offsets[:, 0] + s[0] - omega * rel[:, 1]
        uy = offsets[:, 1] + s[1] + omega * rel[:, 0]
        return -float(params.mu * loads @ np.sqrt(ux * ux + uy * uy + eps_sq))

    h = 1e-3 * params.smoothing_eps

    def jacobian(s: np.ndarray) -> np.ndarray:
        jac = np.empty((3, 3))
        for j in range(3):
            ds = np.zeros(3)
            ds[j] = h
            jac[:, j] = (residual(s + ds) - residual(s - ds)) / (2.0 * h)
        return jac

    def solved(r: np.ndarray) -> bool:
        return math.hypot(r[0], r[1]) < 1.0 and abs(r[2]) < 1.0

    # seed from whichever candidate already dissipates least: the previous
    # tick's motion (continuity) or all contacts sticking (exact for uniform
    # offsets, the common lifted-cluster case)
    stick = offsets.mean(axis=0)
    candidates = [np.zeros(3), np.array([-stick[0], -stick[1], 0.0])]
    if initial is not None:
        candidates.append(np.array([initial.vx, initial.vy, initial.omega * length_scale]))
    s = max(candidates, key=dissipation_potential)

    def report(s: np.ndarray, r: np.ndarray, iterations: int) -> SolveReport:
        rel = max(math.hypot(r[0], r[1]), abs(float(r[2]))) * RESIDUAL_RTOL
        return SolveReport(
            motion=BodyMotion(float(s[0]), float(s[1]), float(s[2]) / length_scale),
            residual=rel,
            iterations=iterations,
        )

    r = residual(s)
    err = float(np.linalg.norm(r))
    phi = dissipation_potential(s)
    lam = 1e-3
    for iteration in range(MAX_ITERATIONS):
        if solved(r):
            return report(s, r, iteration)
        jac = jacobian(s)
        diag = np.abs(np.diag(jac))
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1.0))
        accepted = False
        for _ in range(40):
            # jac is the (negative definite) Hessian of the potential; the
            # damping keeps the step an ascent direction and blends toward
            # scaled gradient ascent where the landscape is badly conditioned
            try:
                step = np.linalg.solve(jac - lam * np.diag(diag), -r)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jac - lam * np.diag(diag), -r, rcond=None)[0]
            trial = s + step
            r_trial = residual(trial)
            err_trial = float(np.linalg.norm(r_trial))
            phi_trial = dissipation_potential(trial)
            # ascent of the potential is the real acceptance rule; the
            # residual-decrease fallback only polishes once the potential
            # differences fall below float resolution near the optimum
            if phi_trial > phi or (err < 1e3 and err_trial < err):
                s, r, err, phi = trial, r_trial, err_trial, phi_trial
                lam = max(lam / 3.0, 1e-10)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
    if solved(r):
        return report(s, r, MAX_ITERATIONS)
    raise SolverError(
        f"no convergence in {MAX_ITERATIONS} iterations, scaled residual {err:.3e}",
        r * tol)


def advance_pose(pose: PlanarPose, motion: BodyMotion, dt: float) -> PlanarPose:
    """Integrate a constant body-frame twist over dt, exact for circular arcs."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    dx = motion.vx * dt
    dy = motion.vy * dt
    dth = motion.omega * dt
    if abs(dth) < 1e-12:
        bx, by = dx, dy
    else:
        s, c = math.sin(dth) / dth, (1.0 - math.cos(dth)) / dth
        bx = s * dx - c * dy
        by = c * dx + s * dy
    ch, sh = math.cos(pose.heading), math.sin(pose.heading)
    return PlanarPose(
        x=pose.x + ch * bx - sh * by,
        y=pose.y + sh * bx + ch * by,
        heading=pose.heading + dth,
    )
