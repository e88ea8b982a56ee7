"""Rigid-body attitude dynamics and the invariance probe for their tracking error.

A rotating body with left-invariant kinetic energy has velocity dynamics
that never see the attitude directly; attitude enters only through the
applied force model.  Spun about a constant body velocity (a relative
equilibrium plus the matching feedforward), the linearized tracking-error
dynamics are therefore frozen in time exactly when the force model is
attitude-independent.  The probe below measures that drift numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .numerics import jacobian_fd, rk4_step, DEFAULT_FD_STEP

ForceModel = Callable[[np.ndarray, np.ndarray], np.ndarray]

SMALL_ROTATION = 1e-8


def hat(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix with hat(w) @ v = w x v."""
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rotation_exp(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula with a series branch for small rotations."""
    angle = float(np.linalg.norm(w))
    K = hat(w)
    if angle < SMALL_ROTATION:
        return np.eye(3) + K + 0.5 * (K @ K)
    a = math.sin(angle) / angle
    b = (1.0 - math.cos(angle)) / (angle * angle)
    return np.eye(3) + a * K + b * (K @ K)


def inv_right_jacobian(w: np.ndarray) -> np.ndarray:
    """Maps body angular velocity to the rate of exponential coordinates."""
    angle = float(np.linalg.norm(w))
    K = hat(w)
    if angle < 1e-5:
        coeff = 1.0 / 12.0
    else:
        coeff = 1.0 / (angle * angle) - (1.0 + math.cos(angle)) / (
            2.0 * angle * math.sin(angle)
        )
    return np.eye(3) + 0.5 * K + coeff * (K @ K)


def project_rotation(m: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (Frobenius), with the reflection case fixed up."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def orthonormality_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.T @ m - np.eye(3))))


@dataclass(frozen=True, eq=False)
class EpSystem:
    """Rigid body state and model: attitude, body velocity, inertia, force.

    force(attitude, velocity) returns a body-frame torque; None means the
    free body.  The inertia must be symmetric positive definite and the
    attitude a proper rotation.
    """

    attitude: np.ndarray
    velocity: np.ndarray
    inertia: np.ndarray
    force: Optional[ForceModel] = None

    def __post_init__(self):
        att = np.asarray(self.attitude, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        ine = np.asarray(self.inertia, dtype=float)
        object.__setattr__(self, "attitude", att)
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "inertia", ine)
        if att.shape != (3, 3) or orthonormality_defect(att) > 1e-6 or np.linalg.det(att) < 0.0:
            raise ValueError("attitude must be a proper rotation matrix")
        if vel.shape != (3,) or not np.all(np.isfinite(vel)):
            raise ValueError("velocity must be a finite 3-vector")
        if ine.shape != (3, 3) or not np.allclose(ine, ine.T, atol=1e-12):
            raise ValueError("inertia must be symmetric 3x3")
        if np.min(np.linalg.eigvalsh(ine)) <= 0.0:
            raise ValueError("inertia must be positive definite")


def gyroscopic_acceleration(inertia: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Bilinear velocity term I^-1 ((I w) x w) of the rotating body."""
    return np.linalg.solve(inertia, np.cross(inertia @ velocity, velocity))


def ep_dynamics(s: EpSystem, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Attitude and velocity derivatives under control torque u."""
    u = np.asarray(u, dtype=float)
    att_dot = s.attitude @ hat(s.velocity)
    torque = u if s.force is None else s.force(s.attitude, s.velocity) + u
    vel_dot = gyroscopic_acceleration(s.inertia, s.velocity) + np.linalg.solve(
        s.inertia, torque
    )
    return att_dot, vel_dot


def kinetic_energy(s: EpSystem) -> float:
    return 0.5 * float(s.velocity @ s.inertia @ s.velocity)


def integrate_ep(
    s: EpSystem,
    u_fn: Callable[[float], np.ndarray],
    t_end: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step RK4 on (attitude, velocity); attitude is re-projected onto
    the rotation group after every step so the drift stays at roundoff level.

    Returns (times, attitudes (n, 3, 3), velocities (n, 3)).
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")

    def rate(t: float, w: np.ndarray) -> np.ndarray:
        sys_t = EpSystem(
            project_rotation(w[:9].reshape(3, 3)), w[9:], s.inertia, s.force
        )
        att_dot, vel_dot = ep_dynamics(sys_t, u_fn(t))
        return np.concatenate([att_dot.ravel(), vel_dot])

    w = np.concatenate([s.attitude.ravel(), s.velocity])
    times = [0.0]
    attitudes = [s.attitude.copy()]
    velocities = [s.velocity.copy()]
    t = 0.0
    while t < t_end - 1e-12:
        h = min(dt, t_end - t)
        w = rk4_step(rate, t, w, h)
        att = project_rotation(w[:9].reshape(3, 3))
        w[:9] = att.ravel()
        t = t_end if (t + h) >= t_end - 1e-12 else t + h
        times.append(t)
        attitudes.append(att)
        velocities.append(w[9:].copy())
    return np.asarray(times), np.asarray(attitudes), np.asarray(velocities)


def spin_feedforward(s: EpSystem, xi_r: np.ndarray, attitude_r: np.ndarray) -> np.ndarray:
    """Torque holding the body at constant body velocity xi_r at a given attitude."""
    xi_r = np.asarray(xi_r, dtype=float)
    u = -(s.inertia @ gyroscopic_acceleration(s.inertia, xi_r))
    if s.force is not None:
        u = u - s.force(attitude_r, xi_r)
    return u


def error_linearization_drift(
    s: EpSystem,
    xi_r: np.ndarray,
    times,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """Drift of the linearized tracking-error dynamics along a steady spin.

    The reference spins from the system's attitude at constant body velocity
    xi_r under the matching feedforward torque.  The tracking error (relative
    attitude in exponential coordinates, velocity difference) is linearized
    at the origin by central differences at each sample time; the result is
    the max pairwise Frobenius deviation.  Near zero when the force model
    ignores attitude; order one when it does not.
    """
    xi_r = np.asarray(xi_r, dtype=float)
    times = list(times)
    if len(times) < 2:
        raise ValueError("need at least two probe times")
    xi_r_hat = hat(xi_r)

    def error_rate(t: float, w: np.ndarray) -> np.ndarray:
        att_r = s.attitude @ rotation_exp(t * xi_r)
        u_r = spin_feedforward(s, xi_r, att_r)
        eta = rotation_exp(w[:3])
        att = att_r @ eta
        xi = xi_r + w[3:]
        torque = u_r if s.force is None else s.force(att, xi) + u_r
        xi_dot = gyroscopic_acceleration(s.inertia, xi) + np.linalg.solve(
            s.inertia, torque
        )
        # Relative attitude rate in the body frame of eta, then pulled back
        # to exponential coordinates.
        omega_rel = xi - eta.T @ xi_r
        zeta_dot = inv_right_jacobian(w[:3]) @ omega_rel
        return np.concatenate([zeta_dot, xi_dot])

    mats = []
    for t in times:
        mats.append(jacobian_fd(lambda w, _t=t: error_rate(_t, w), np.zeros(6), step))
    worst = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            worst = max(worst, float(np.linalg.norm(mats[i] - mats[j])))
    return worst


def damping_force(coefficients) -> ForceModel:
    """Torque -D xi with positive diagonal D; drains kinetic energy, ignores attitude."""
    d = np.asarray(coefficients, dtype=float)
    if d.shape != (3,) or np.any(d <= 0.0):
        raise ValueError("damping needs three positive coefficients")

    def force(att: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return -d * xi

    return force


def gravity_gradient_force(strength: float, body_axis) -> ForceModel:
    """Pendulum-style torque strength * ((R^T e_z) x axis); depends on attitude."""
    axis = np.asarray(body_axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValueError("body_axis must be nonzero")
    axis = axis / norm
    e_z = np.array([0.0, 0.0, 1.0])

    def force(att: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return strength * np.cross(att.T @ e_z, axis)

    return force
