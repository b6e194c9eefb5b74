"""Deterministic 2D floater physics.

Floaters are chains of particles coupled by compliant distance and bend
constraints, advanced with position-based dynamics (XPBD: each constraint
carries a compliance alpha and an accumulated Lagrange multiplier that is
reset every step).  Vitreous motion is modelled kinematically: a global
two-phase velocity field (saccade kick, then downward settle, each decaying
exponentially) toward which every particle's velocity relaxes with an
exponential drag.  Per-particle drag jitter makes chains shear and spin
while the field accelerates or decelerates.

Neural adaptation is a per-chain visibility scalar in [0, 1]: it decays
toward 0 while the chain's mean speed is below the adaptation threshold and
recovers toward 1 above it.  Chains start fully adapted (alpha = 0), i.e.
invisible until the first eye movement reveals them.

Everything is driven by one seeded numpy generator owned by the state, so a
given (config, seed, event trace) reproduces bit-identical trajectories.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig


class Phase(enum.Enum):
    IDLE = "idle"
    SACCADE = "saccade"
    SETTLING = "settling"


@dataclass
class DriftField:
    phase: Phase = Phase.IDLE
    phase_elapsed: float = 0.0
    saccade_direction: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0]))
    saccade_speed: float = 320.0
    settle_speed: float = 160.0
    tau_saccade: float = 1.0
    tau_settle: float = 3.0
    saccade_duration: float = 3.0
    settle_duration: float = 9.0
    drag_coefficient: float = 20.0


@dataclass
class AdaptationModel:
    speed_threshold: float
    fade_time_constant: float
    recover_time_constant: float
    adaptation_period: float = 0.080


@dataclass
class FloaterChain:
    """A jointed particle chain with per-constraint compliances.

    Arrays are indexed by particle (n), consecutive distance constraint
    (n-1) or interior bend constraint (n-2).  ``rest_angles`` stores the
    unsigned joint angle in [0, pi] at spawn time.
    """

    positions: np.ndarray          # (n, 2)
    prev_positions: np.ndarray     # (n, 2)
    inverse_mass: np.ndarray       # (n,)
    radius: np.ndarray             # (n,)
    drag_scale: np.ndarray         # (n,)
    rest_lengths: np.ndarray       # (n-1,)
    distance_compliance: np.ndarray
    distance_lambda: np.ndarray
    rest_angles: np.ndarray        # (n-2,)
    bend_compliance: np.ndarray
    bend_lambda: np.ndarray
    base_opacity: float
    adaptation_alpha: float = 0.0

    def __len__(self) -> int:
        return len(self.positions)


@dataclass
class SimState:
    time: float
    floaters: list[FloaterChain]
    fluid: DriftField
    rng: np.random.Generator
    config: SimConfig
    adaptation: AdaptationModel


def init_simulation(config: SimConfig) -> SimState:
    """Build the seeded initial state: chains sampled, field idle, t = 0."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    chains = [_spawn_chain(config, rng) for _ in range(config.floater_count)]
    d = config.drift
    fluid = DriftField(
        saccade_speed=d.saccade_speed, settle_speed=d.settle_speed,
        tau_saccade=d.tau_saccade, tau_settle=d.tau_settle,
        saccade_duration=d.saccade_duration, settle_duration=d.settle_duration,
        drag_coefficient=d.drag_coefficient)
    a = config.adaptation
    model = AdaptationModel(
        speed_threshold=config.resolved_speed_threshold(),
        fade_time_constant=a.fade_time_constant,
        recover_time_constant=a.recover_time_constant,
        adaptation_period=a.adaptation_period)
    return SimState(time=0.0, floaters=chains, fluid=fluid, rng=rng,
                    config=config, adaptation=model)


def _spawn_chain(config: SimConfig, rng: np.random.Generator) -> FloaterChain:
    ch = config.chain
    n = int(rng.integers(config.chain_length_range[0],
                         config.chain_length_range[1] + 1))
    start = rng.uniform((0.0, 0.0), (config.canvas_width, config.canvas_height))
    heading = rng.uniform(0.0, 2.0 * math.pi)
    seg_lengths = rng.uniform(*ch.segment_length_range, size=n - 1)
    turns = rng.normal(0.0, ch.turn_stddev, size=max(n - 2, 0))

    pts = np.empty((n, 2))
    pts[0] = start
    angle = heading
    for i in range(n - 1):
        if i > 0:
            angle += turns[i - 1]
        pts[i + 1] = pts[i] + seg_lengths[i] * np.array(
            [math.cos(angle), math.sin(angle)])

    rest_lengths = np.hypot(*(pts[1:] - pts[:-1]).T)
    rest_angles = np.array([
        abs(_signed_angle(pts[i] - pts[i + 1], pts[i + 2] - pts[i + 1]))
        for i in range(n - 2)])
    return FloaterChain(
        positions=pts,
        prev_positions=pts.copy(),
        inverse_mass=np.ones(n),
        radius=rng.uniform(*ch.radius_range, size=n),
        drag_scale=rng.uniform(1.0 - ch.drag_jitter, 1.0 + ch.drag_jitter,
                               size=n),
        rest_lengths=rest_lengths,
        distance_compliance=rng.uniform(*config.compliance_range, size=n - 1),
        distance_lambda=np.zeros(n - 1),
        rest_angles=rest_angles,
        bend_compliance=rng.uniform(*ch.bend_compliance_range,
                                    size=max(n - 2, 0)),
        bend_lambda=np.zeros(max(n - 2, 0)),
        base_opacity=float(rng.uniform(*config.base_opacity_range)),
        adaptation_alpha=0.0)


def _signed_angle(u, v) -> float:
    return math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1])


def trigger_eye_movement(state: SimState,
                         direction: np.ndarray | None = None) -> SimState:
    """Start a saccade: phase resets, direction given or drawn uniformly."""
    if direction is None:
        angle = state.rng.uniform(0.0, 2.0 * math.pi)
        unit = np.array([math.cos(angle), math.sin(angle)])
    else:
        direction = np.asarray(direction, dtype=float)
        norm = float(np.hypot(*direction))
        if norm == 0.0:
            raise ValueError("saccade direction must be non-zero")
        unit = direction / norm
    state.fluid.phase = Phase.SACCADE
    state.fluid.phase_elapsed = 0.0
    state.fluid.saccade_direction = unit
    return state


def field_velocity(fld: DriftField, phase_elapsed: float) -> np.ndarray:
    """Field velocity at a given time since the current phase began."""
    if fld.phase is Phase.IDLE:
        return np.zeros(2)
    if fld.phase is Phase.SACCADE:
        speed = fld.saccade_speed * math.exp(-phase_elapsed / fld.tau_saccade)
        return speed * fld.saccade_direction
    # settling pulls straight down (+y in image coordinates)
    speed = fld.settle_speed * math.exp(-phase_elapsed / fld.tau_settle)
    return np.array([0.0, speed])


def project_distance_constraint(pa, pb, wa: float, wb: float, rest: float,
                                compliance: float, dt: float, lam: float):
    """One XPBD projection of |pa-pb| = rest.

    Returns (delta_a, delta_b, new_lambda) with
    dlambda = (-C - alpha_tilde*lam) / (wa + wb + alpha_tilde),
    alpha_tilde = compliance/dt^2, C = |pa-pb| - rest, and corrections
    w * dlambda along the unit separation vector.  Coincident particles
    are deseparated along +x deterministically (warned, never NaN).
    """
    ax, ay = float(pa[0]), float(pa[1])
    bx, by = float(pb[0]), float(pb[1])
    dx, dy = ax - bx, ay - by
    dist = math.hypot(dx, dy)
    if dist > 0.0:
        nx, ny = dx / dist, dy / dist
    else:
        warnings.warn("coincident particles in distance constraint; "
                      "separating along +x", RuntimeWarning, stacklevel=2)
        nx, ny = 1.0, 0.0
    c = dist - rest
    alpha = compliance / (dt * dt)
    denom = wa + wb + alpha
    if denom <= 0.0:
        raise ValueError("distance constraint needs wa + wb + alpha > 0")
    dlam = (-c - alpha * lam) / denom
    return ((wa * dlam * nx, wa * dlam * ny),
            (-wb * dlam * nx, -wb * dlam * ny),
            lam + dlam)


def project_bend_constraint(p0, p1, p2, w0: float, w1: float, w2: float,
                            rest_angle: float, compliance: float, dt: float,
                            lam: float):
    """One XPBD projection of the unsigned joint angle at p1 toward rest.

    C = |angle(p0-p1, p2-p1)| - rest_angle; gradients are the analytic
    angle derivatives (perpendicular to each arm, scaled by 1/arm length).
    Degenerate arms (zero length) are skipped.
    """
    ux, uy = float(p0[0] - p1[0]), float(p0[1] - p1[1])
    vx, vy = float(p2[0] - p1[0]), float(p2[1] - p1[1])
    lu2 = ux * ux + uy * uy
    lv2 = vx * vx + vy * vy
    if lu2 == 0.0 or lv2 == 0.0:
        return (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), lam
    theta = math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)
    sign = 1.0 if theta >= 0.0 else -1.0
    c = abs(theta) - rest_angle
    # d|theta|/dp0 = sign*(uy,-ux)/|u|^2, d|theta|/dp2 = sign*(-vy,vx)/|v|^2
    g0x, g0y = sign * uy / lu2, -sign * ux / lu2
    g2x, g2y = -sign * vy / lv2, sign * vx / lv2
    g1x, g1y = -(g0x + g2x), -(g0y + g2y)
    alpha = compliance / (dt * dt)
    denom = (w0 * (g0x * g0x + g0y * g0y)
             + w1 * (g1x * g1x + g1y * g1y)
             + w2 * (g2x * g2x + g2y * g2y) + alpha)
    if denom == 0.0:
        return (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), lam
    dlam = (-c - alpha * lam) / denom
    return ((w0 * dlam * g0x, w0 * dlam * g0y),
            (w1 * dlam * g1x, w1 * dlam * g1y),
            (w2 * dlam * g2x, w2 * dlam * g2y),
            lam + dlam)


def update_adaptation(alpha: float, speed: float, model: AdaptationModel,
                      dt: float) -> float:
    """Advance the visibility alpha one dt given the chain's speed."""
    if speed < model.speed_threshold:
        alpha = alpha * math.exp(-dt / model.fade_time_constant)
    else:
        alpha = alpha + (1.0 - alpha) * (
            1.0 - math.exp(-dt / model.recover_time_constant))
    return min(max(alpha, 0.0), 1.0)


def mean_chain_speed(chain: FloaterChain, dt: float) -> float:
    """Mean particle displacement magnitude over the last step, per second."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    deltas = chain.positions - chain.prev_positions
    return float(np.mean(np.hypot(deltas[:, 0], deltas[:, 1]))) / dt


def step(state: SimState, dt: float) -> SimState:
    """Advance the whole state by one dt.

    Order per chain: velocity relaxation toward the field, position
    prediction, Gauss-Seidel XPBD passes (lambdas reset each step),
    adaptation update from the realized mean speed.  Then global time and
    field phase bookkeeping.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    fld = state.fluid
    vf = field_velocity(fld, fld.phase_elapsed)
    vfx, vfy = float(vf[0]), float(vf[1])
    iterations = state.config.solver_iterations
    drag = fld.drag_coefficient

    for chain in state.floaters:
        n = len(chain)
        pos = chain.positions
        prev = chain.prev_positions
        w = chain.inverse_mass
        px = pos[:, 0].tolist()
        py = pos[:, 1].tolist()
        qx = prev[:, 0].tolist()
        qy = prev[:, 1].tolist()
        drag_scale = chain.drag_scale.tolist()
        inv_mass = w.tolist()

        # integrate: relax velocity toward the field, then predict positions
        inv_dt = 1.0 / dt
        for i in range(n):
            if inv_mass[i] == 0.0:
                qx[i], qy[i] = px[i], py[i]
                continue
            vx = (px[i] - qx[i]) * inv_dt
            vy = (py[i] - qy[i]) * inv_dt
            k = 1.0 - math.exp(-drag * drag_scale[i] * dt)
            vx += (vfx - vx) * k
            vy += (vfy - vy) * k
            qx[i], qy[i] = px[i], py[i]
            px[i] += vx * dt
            py[i] += vy * dt

        dist_lam = [0.0] * (n - 1)
        bend_lam = [0.0] * max(n - 2, 0)
        rest_l = chain.rest_lengths.tolist()
        dist_comp = chain.distance_compliance.tolist()
        rest_a = chain.rest_angles.tolist()
        bend_comp = chain.bend_compliance.tolist()

        for _ in range(iterations):
            for i in range(n - 1):
                (dax, day), (dbx, dby), dist_lam[i] = \
                    project_distance_constraint(
                        (px[i], py[i]), (px[i + 1], py[i + 1]),
                        inv_mass[i], inv_mass[i + 1],
                        rest_l[i], dist_comp[i], dt, dist_lam[i])
                px[i] += dax
                py[i] += day
                px[i + 1] += dbx
                py[i + 1] += dby
            for i in range(n - 2):
                d0, d1, d2, bend_lam[i] = project_bend_constraint(
                    (px[i], py[i]), (px[i + 1], py[i + 1]),
                    (px[i + 2], py[i + 2]),
                    inv_mass[i], inv_mass[i + 1], inv_mass[i + 2],
                    rest_a[i], bend_comp[i], dt, bend_lam[i])
                px[i] += d0[0]
                py[i] += d0[1]
                px[i + 1] += d1[0]
                py[i + 1] += d1[1]
                px[i + 2] += d2[0]
                py[i + 2] += d2[1]

        pos[:, 0] = px
        pos[:, 1] = py
        prev[:, 0] = qx
        prev[:, 1] = qy
        chain.distance_lambda[:] = dist_lam
        chain.bend_lambda[:] = bend_lam
        chain.adaptation_alpha = update_adaptation(
            chain.adaptation_alpha, mean_chain_speed(chain, dt),
            state.adaptation, dt)

    state.time += dt
    if fld.phase is not Phase.IDLE:
        fld.phase_elapsed += dt
        if fld.phase is Phase.SACCADE and \
                fld.phase_elapsed >= fld.saccade_duration - 1e-12:
            fld.phase = Phase.SETTLING
            fld.phase_elapsed = max(
                fld.phase_elapsed - fld.saccade_duration, 0.0)
        elif fld.phase is Phase.SETTLING and \
                fld.phase_elapsed >= fld.settle_duration - 1e-12:
            fld.phase = Phase.IDLE
            fld.phase_elapsed = 0.0
    return state


def max_distance_residual(state: SimState) -> float:
    """Largest |current length - rest length| over all distance constraints."""
    worst = 0.0
    for chain in state.floaters:
        seg = chain.positions[1:] - chain.positions[:-1]
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if len(lengths):
            worst = max(worst, float(np.max(np.abs(
                lengths - chain.rest_lengths))))
    return worst
