"""Symmetry-preserving pose observer driven by squared-range outputs.

The correction is built from quantities that do not change when the whole
scene (robot, estimate, landmarks) is rotated and translated together:
landmark positions expressed in the estimated body frame, and the mismatch
between predicted and measured squared ranges.  The payoff is that the
estimation-error dynamics, written in the body frame, are linearized by a
matrix that depends only on the input (u, v) and never on where the robot
actually is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GeometryError
from .robot import LandmarkSet, Measurement, RobotInput
from .se2 import GroupElement

# Reject the correction when the 2x2 Gram matrix of body-frame landmark
# coordinates is this badly conditioned: the inverse is then meaningless.
DEFAULT_MAX_CONDITION = 1e8


@dataclass(frozen=True)
class ObserverGains:
    """Positive observer gains: l1 along-track, l2 cross-track, l3 heading."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"gain {name} must be positive and finite, got {val}")


@dataclass(frozen=True, eq=False)
class BodyFrameLandmarks:
    """Landmark coordinates seen from the estimated pose, one column each."""

    coords: np.ndarray  # shape (2, p)

    def gram(self) -> np.ndarray:
        return self.coords @ self.coords.T

    def condition_number(self) -> float:
        g = self.gram()
        mean = 0.5 * (g[0, 0] + g[1, 1])
        radius = math.hypot(0.5 * (g[0, 0] - g[1, 1]), g[0, 1])
        lo = mean - radius
        if lo <= 0.0:
            return math.inf
        return (mean + radius) / lo


@dataclass(frozen=True)
class ObservationError:
    """Output mismatch plus, for diagnostics, the body-frame state error."""

    eps: tuple[float, ...]
    eps_x: float
    eps_y: float
    eps_theta: float


def body_frame_landmarks(x_hat: GroupElement, lm: LandmarkSet) -> BodyFrameLandmarks:
    """Rotate each landmark offset into the estimated body frame."""
    c = math.cos(x_hat.theta)
    s = math.sin(x_hat.theta)
    cols = np.empty((2, len(lm)))
    for i, (lx, ly) in enumerate(lm.coords):
        dx = lx - x_hat.x
        dy = ly - x_hat.y
        cols[0, i] = dx * c + dy * s
        cols[1, i] = -dx * s + dy * c
    return BodyFrameLandmarks(cols)


def output_error(x_hat: GroupElement, lm: LandmarkSet, y: Measurement) -> np.ndarray:
    """Predicted minus measured squared ranges, one entry per landmark."""
    if len(y) != len(lm):
        raise ValueError(f"measurement length {len(y)} != landmark count {len(lm)}")
    out = np.empty(len(lm))
    for i, (lx, ly) in enumerate(lm.coords):
        out[i] = (x_hat.x - lx) ** 2 + (x_hat.y - ly) ** 2 - y.values[i]
    return out


def state_error(g: GroupElement, x_hat: GroupElement) -> tuple[float, float, float]:
    """Estimate relative to truth, inverse(g) * x_hat, in body-frame components."""
    c = math.cos(g.theta)
    s = math.sin(g.theta)
    dx = x_hat.x - g.x
    dy = x_hat.y - g.y
    dth = x_hat.theta - g.theta
    dth = math.remainder(dth, 2.0 * math.pi)
    if dth <= -math.pi:
        dth += 2.0 * math.pi
    return (dx * c + dy * s, -dx * s + dy * c, dth)


def observation_error(
    g: GroupElement,
    x_hat: GroupElement,
    lm: LandmarkSet,
    y: Measurement,
) -> ObservationError:
    ex, ey, eth = state_error(g, x_hat)
    return ObservationError(tuple(output_error(x_hat, lm, y)), ex, ey, eth)


def _weights(u: float, v: float, gains: ObserverGains) -> np.ndarray:
    # 3x2 weight matrix pairing the two Gram-normalized output directions
    # with the three error components.  The (3, 2) entry must be +u*l3: it
    # makes the heading row of the linearized error system damp e_y, and the
    # opposite sign turns the (e_y, e_theta) block into a saddle.
    au = abs(u)
    return np.array(
        [
            [au * gains.l1, u * v],
            [-u * v, au * gains.l2],
            [0.0, u * gains.l3],
        ]
    )


def gain_matrix(
    bf: BodyFrameLandmarks,
    inp: RobotInput,
    gains: ObserverGains,
    max_condition: float = DEFAULT_MAX_CONDITION,
) -> np.ndarray:
    """Output-injection gain L = -1/2 * W (I I^T)^-1 I, shape (3, p).

    Satisfies L @ (-2 I^T) = W for every estimate and landmark set, which is
    what pins the linearized error dynamics to a constant matrix.

    Raises:
        GeometryError: Gram matrix condition number exceeds max_condition.
    """
    cond = bf.condition_number()
    if not (cond < max_condition):
        raise GeometryError(
            f"body-frame landmark Gram matrix is ill-conditioned: "
            f"condition number {cond:.3e} exceeds {max_condition:.3e}"
        )
    gram_inv = np.linalg.inv(bf.gram())
    return -0.5 * _weights(inp.u, inp.v, gains) @ gram_inv @ bf.coords


def observer_field(
    x_hat: GroupElement,
    inp: RobotInput,
    lm: LandmarkSet,
    y: Measurement | Sequence[float],
    gains: ObserverGains,
    max_condition: float = DEFAULT_MAX_CONDITION,
) -> tuple[float, float, float]:
    """Estimate derivative: model flow plus the body-frame output correction.

    Equals the plain model dynamics whenever the estimate reproduces the
    measurement exactly.  y may be a Measurement or any float sequence.
    Scalar arithmetic throughout: this runs four times per integration step
    inside the closed loop.
    """
    values = y.values if isinstance(y, Measurement) else y
    if len(values) != len(lm):
        raise ValueError(f"measurement length {len(values)} != landmark count {len(lm)}")
    u, v = inp.u, inp.v
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError(f"input has non-finite components: {inp}")
    ct = math.cos(x_hat.theta)
    st = math.sin(x_hat.theta)
    a = b = d = 0.0
    w1 = w2 = 0.0
    for (lx, ly), lam in zip(lm.coords, values):
        dx = lx - x_hat.x
        dy = ly - x_hat.y
        ix = dx * ct + dy * st
        iy = -dx * st + dy * ct
        a += ix * ix
        b += ix * iy
        d += iy * iy
        eps = dx * dx + dy * dy - lam
        w1 += ix * eps
        w2 += iy * eps
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    lo = mean - radius
    cond = math.inf if lo <= 0.0 else (mean + radius) / lo
    if not (cond < max_condition):
        raise GeometryError(
            f"body-frame landmark Gram matrix is ill-conditioned: "
            f"condition number {cond:.3e} exceeds {max_condition:.3e}"
        )
    det = a * d - b * b
    s1 = (d * w1 - b * w2) / det
    s2 = (-b * w1 + a * w2) / det
    # Correction in the estimated body frame: -L @ eps = 1/2 * W @ s.
    au = abs(u)
    c1 = 0.5 * (au * gains.l1 * s1 + u * v * s2)
    c2 = 0.5 * (-u * v * s1 + au * gains.l2 * s2)
    c3 = 0.5 * (u * gains.l3 * s2)
    return (
        u * ct + (c1 * ct - c2 * st),
        u * st + (c1 * st + c2 * ct),
        u * v + c3,
    )


def obs_error_matrix(u: float, v: float, gains: ObserverGains) -> np.ndarray:
    """Linearized body-frame estimation-error dynamics.

    Depends only on u (the steering ratio v cancels against the weight
    matrix), so it is frozen along any constant-input reference.  Eigenvalues
    are -|u| l1 and the roots of s^2 + |u| l2 s + u^2 l3.  Zero when u = 0.
    """
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError(f"input must be finite, got ({u}, {v})")
    au = abs(u)
    return np.array(
        [
            [-au * gains.l1, 0.0, 0.0],
            [0.0, -au * gains.l2, u],
            [0.0, -u * gains.l3, 0.0],
        ]
    )
