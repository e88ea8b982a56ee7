"""Observer-controller interconnection and the separation structure.

The combined error state is six-dimensional: the tracking error eta (pose
relative to the reference) and the estimation error eps (estimate relative
to the true pose).  Around a constant-input reference the linearization is
block upper-triangular with the controller loop matrix, the feedback
cross-coupling, and the observer error matrix, so the closed-loop spectrum
is the plain union of the two designs.  Everything here is checked against
finite-difference linearizations of the full nonlinear loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import se2
from .controller import ControllerGains, TrackingError, ctrl_loop_matrix, feedback, tracking_error
from .errors import DivergenceError, GeometryError
from .numerics import jacobian_fd, DEFAULT_FD_STEP
from .observer import ObserverGains, obs_error_matrix, observer_field, state_error
from .robot import LandmarkSet, RobotInput, dynamics, measure, measure_values
from .se2 import GroupElement
from .trajectories import ReferenceTrajectory

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class Scenario:
    """Complete description of one closed-loop run."""

    trajectory: ReferenceTrajectory
    landmarks: LandmarkSet
    controller_gains: ControllerGains
    observer_gains: ObserverGains
    initial_pose: GroupElement
    initial_estimate: GroupElement
    t_end: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        # The feedback is undefined at u_r = 0; catch it before a run starts.
        for k in range(257):
            t = self.t_end * k / 256.0
            if abs(self.trajectory.input(t).u) < 1e-12:
                raise ValueError(f"reference input u vanishes near t={t:.6g}")


@dataclass(frozen=True)
class SimulationResult:
    """Sampled closed-loop run; every series shares the time grid."""

    times: np.ndarray            # (n,)
    poses: np.ndarray            # (n, 3) true state
    estimates: np.ndarray        # (n, 3)
    references: np.ndarray       # (n, 3)
    tracking_errors: np.ndarray  # (n, 3) eta components
    estimation_errors: np.ndarray  # (n, 3) eps components
    inputs: np.ndarray           # (n, 2) applied (u, v)


def simulate(sc: Scenario) -> SimulationResult:
    """Run the coupled plant/observer/controller loop with fixed-step RK4.

    Measurements come from the true state at every stage; the controller
    sees only the estimate.  Aborts with DivergenceError when the state
    leaves a 1e6 box and with GeometryError (timestamped) when the landmark
    geometry degenerates as seen from the estimate.
    """
    traj = sc.trajectory
    lm = sc.landmarks
    kg = sc.controller_gains
    og = sc.observer_gains
    dt = sc.dt

    def rate(t: float, w: tuple) -> tuple:
        g = GroupElement(w[0], w[1], w[2])
        gh = GroupElement(w[3], w[4], w[5])
        g_ref = traj.pose(t)
        ref_inp = traj.input(t)
        eta_hat = tracking_error(g_ref, gh)
        inp = feedback(eta_hat, ref_inp.u, ref_inp.v, kg)
        y = measure_values(g, lm)
        dg = dynamics(g, inp)
        dgh = observer_field(gh, inp, lm, y, og)
        return (dg[0], dg[1], dg[2], dgh[0], dgh[1], dgh[2])

    n_steps = int(math.ceil(sc.t_end / dt - 1e-9))
    grid = [min(i * dt, sc.t_end) for i in range(n_steps)] + [sc.t_end]
    n = len(grid)
    pose_rows = []
    estimate_rows = []
    reference_rows = []
    eta_rows = []
    eps_rows = []
    input_rows = []

    w = (
        sc.initial_pose.x, sc.initial_pose.y, sc.initial_pose.theta,
        sc.initial_estimate.x, sc.initial_estimate.y, sc.initial_estimate.theta,
    )
    for i, t in enumerate(grid):
        g = GroupElement(w[0], w[1], w[2])
        gh = GroupElement(w[3], w[4], w[5])
        g_ref = traj.pose(t)
        eta = tracking_error(g_ref, g)
        eps = state_error(g, gh)
        ref_inp = traj.input(t)
        applied = feedback(tracking_error(g_ref, gh), ref_inp.u, ref_inp.v, kg)
        pose_rows.append(w[0:3])
        estimate_rows.append(w[3:6])
        reference_rows.append(g_ref)
        eta_rows.append(eta)
        eps_rows.append(eps)
        input_rows.append(applied)
        if i == n - 1:
            break
        h = grid[i + 1] - t
        hh = 0.5 * h
        try:
            k1 = rate(t, w)
            w1 = tuple(a + hh * b for a, b in zip(w, k1))
            k2 = rate(t + hh, w1)
            w2 = tuple(a + hh * b for a, b in zip(w, k2))
            k3 = rate(t + hh, w2)
            w3 = tuple(a + h * b for a, b in zip(w, k3))
            k4 = rate(t + h, w3)
        except GeometryError as err:
            raise GeometryError(f"{err} (at t={t:.6g})") from err
        h6 = h / 6.0
        w = tuple(
            a + h6 * (b + 2.0 * (c + d) + e)
            for a, b, c, d, e in zip(w, k1, k2, k3, k4)
        )
        for comp in w:
            if not (math.isfinite(comp) and abs(comp) <= DIVERGENCE_LIMIT):
                raise DivergenceError(grid[i + 1], "closed-loop state diverged")
    return SimulationResult(
        np.asarray(grid),
        np.asarray(pose_rows),
        np.asarray(estimate_rows),
        np.asarray(reference_rows),
        np.asarray(eta_rows),
        np.asarray(eps_rows),
        np.asarray(input_rows),
    )


@dataclass(frozen=True)
class ErrorField:
    """Time-dependent vector field on error coordinates, with its dimension."""

    rate: Callable[[float, np.ndarray], np.ndarray]
    dim: int

    def __call__(self, t: float, w: np.ndarray) -> np.ndarray:
        return self.rate(t, w)


def controller_error_field(
    traj: ReferenceTrajectory,
    gains: ControllerGains,
) -> ErrorField:
    """Tracking-error dynamics under perfect state feedback (no observer)."""

    def rate(t: float, w: np.ndarray) -> np.ndarray:
        g_ref = traj.pose(t)
        ref_inp = traj.input(t)
        g = se2.compose(g_ref, GroupElement(w[0], w[1], w[2]))
        inp = feedback(TrackingError(w[0], w[1], w[2]), ref_inp.u, ref_inp.v, gains)
        dref = dynamics(g_ref, ref_inp)
        dg = dynamics(g, inp)
        return np.asarray(se2.relative_rate(g_ref, dref, g, dg))

    return ErrorField(rate, 3)


def observer_error_field(
    traj: ReferenceTrajectory,
    lm: LandmarkSet,
    gains: ObserverGains,
) -> ErrorField:
    """Estimation-error dynamics with the true state riding the reference."""

    def rate(t: float, w: np.ndarray) -> np.ndarray:
        g = traj.pose(t)
        inp = traj.input(t)
        gh = se2.compose(g, GroupElement(w[0], w[1], w[2]))
        y = measure(g, lm)
        dg = dynamics(g, inp)
        dgh = observer_field(gh, inp, lm, y, gains)
        return np.asarray(se2.relative_rate(g, dg, gh, dgh))

    return ErrorField(rate, 3)


def closed_loop_error_field(
    traj: ReferenceTrajectory,
    lm: LandmarkSet,
    kg: ControllerGains,
    og: ObserverGains,
) -> ErrorField:
    """Joint (eta, eps) dynamics of the full output-feedback loop."""

    def rate(t: float, w: np.ndarray) -> np.ndarray:
        g_ref = traj.pose(t)
        ref_inp = traj.input(t)
        g = se2.compose(g_ref, GroupElement(w[0], w[1], w[2]))
        gh = se2.compose(g, GroupElement(w[3], w[4], w[5]))
        eta_hat = tracking_error(g_ref, gh)
        inp = feedback(eta_hat, ref_inp.u, ref_inp.v, kg)
        y = measure(g, lm)
        dref = dynamics(g_ref, ref_inp)
        dg = dynamics(g, inp)
        dgh = observer_field(gh, inp, lm, y, og)
        deta = se2.relative_rate(g_ref, dref, g, dg)
        deps = se2.relative_rate(g, dg, gh, dgh)
        return np.asarray(deta + deps)

    return ErrorField(rate, 6)


def linearize_error_field(
    field: ErrorField,
    times,
    step: float = DEFAULT_FD_STEP,
) -> list[np.ndarray]:
    """Finite-difference linearization of the field at the origin, per time."""
    mats = []
    for t in times:
        mats.append(jacobian_fd(lambda w, _t=t: field(_t, w), np.zeros(field.dim), step))
    return mats


def time_invariance_probe(
    field: ErrorField,
    times,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """Max pairwise Frobenius deviation between linearizations along the run.

    Near zero exactly when the linearized error dynamics are frozen in time;
    the hallmark of an invariant design around a constant-input reference.
    """
    times = list(times)
    if len(times) < 2:
        raise ValueError("need at least two probe times")
    mats = linearize_error_field(field, times, step)
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            worst = max(worst, float(np.linalg.norm(mats[i] - mats[j])))
    return worst


def separation_matrix(
    u_r: float,
    v_r: float,
    kg: ControllerGains,
    og: ObserverGains,
) -> np.ndarray:
    """Block upper-triangular closed-loop linearization around zero error.

    Diagonal blocks are the controller and observer designs; the coupling
    block (how estimation error leaks into the tracking loop through the
    feedback) is reconstructed numerically from the composed feedback map
    rather than written down symbolically.  Zero matrix when u_r = 0.
    """
    top_left = ctrl_loop_matrix(u_r, v_r, kg)
    bottom_right = obs_error_matrix(u_r, v_r, og)
    if u_r == 0.0:
        cross = np.zeros((3, 3))
    else:
        ref = GroupElement(0.0, 0.0, 0.0)
        dref = dynamics(ref, RobotInput(u_r, v_r))

        def through_estimate(e: np.ndarray) -> np.ndarray:
            # True pose sits on the reference; only the estimate is perturbed.
            inp = feedback(TrackingError(e[0], e[1], e[2]), u_r, v_r, kg)
            dg = dynamics(ref, inp)
            return np.asarray(se2.relative_rate(ref, dref, ref, dg))

        cross = jacobian_fd(through_estimate, np.zeros(3))
    out = np.zeros((6, 6))
    out[:3, :3] = top_left
    out[:3, 3:] = cross
    out[3:, 3:] = bottom_right
    return out
