"""Fixed-step integration, finite-difference Jacobians, small dense spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError

DEFAULT_FD_STEP = 1e-6

# Dense eigenvalue extraction is only meant for the small matrices that show
# up here (3x3 error systems, 6x6 separation blocks).
MAX_EIG_SIZE = 8

VectorField = Callable[[float, np.ndarray], Sequence[float]]


def rk4_step(field: VectorField, t: float, x: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of size dt."""
    k1 = np.asarray(field(t, x), dtype=float)
    k2 = np.asarray(field(t + 0.5 * dt, x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(field(t + 0.5 * dt, x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(field(t + dt, x + dt * k3), dtype=float)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_rk4(
    field: VectorField,
    x0: Sequence[float],
    t0: float,
    t1: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate xdot = field(t, x) from t0 to t1 with fixed step dt.

    The final step is shortened so the grid lands exactly on t1.  Returns
    (times, states) with states[i] the state at times[i], including t0.

    Raises:
        DivergenceError: the state picked up a NaN/Inf component.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t1 < t0:
        raise ValueError(f"t1 must be >= t0, got [{t0}, {t1}]")
    x = np.asarray(x0, dtype=float)
    times = [t0]
    states = [x]
    t = t0
    while t < t1 - 1e-12 * max(1.0, abs(t1)):
        step = min(dt, t1 - t)
        x = rk4_step(field, t, x, step)
        t = t1 if (t + step) >= t1 - 1e-12 * max(1.0, abs(t1)) else t + step
        if not np.all(np.isfinite(x)):
            raise DivergenceError(t)
        times.append(t)
        states.append(x)
    return np.asarray(times), np.asarray(states)


def jacobian_fd(
    fn: Callable[[np.ndarray], Sequence[float]],
    point: Sequence[float],
    step: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """Central-difference Jacobian of fn at point, one column per coordinate."""
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    p = np.asarray(point, dtype=float)
    cols = []
    for j in range(p.size):
        dp = np.zeros_like(p)
        dp[j] = step
        hi = np.asarray(fn(p + dp), dtype=float)
        lo = np.asarray(fn(p - dp), dtype=float)
        cols.append((hi - lo) / (2.0 * step))
    jac = np.column_stack(cols)
    if not np.all(np.isfinite(jac)):
        raise ValueError("jacobian_fd produced non-finite entries")
    return jac


@dataclass(frozen=True)
class Spectrum:
    """Multiset of eigenvalues, stored sorted by (real, imag) for stable output."""

    values: tuple[complex, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.values, key=lambda z: (z.real, z.imag)))
        object.__setattr__(self, "values", ordered)

    def __len__(self) -> int:
        return len(self.values)

    def max_real(self) -> float:
        return max(z.real for z in self.values)

    def union(self, other: "Spectrum") -> "Spectrum":
        return Spectrum(self.values + other.values)


def eigenvalues(matrix: np.ndarray) -> Spectrum:
    """All eigenvalues (with multiplicity) of a small dense matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if m.shape[0] > MAX_EIG_SIZE:
        raise ValueError(f"matrix size {m.shape[0]} exceeds cap {MAX_EIG_SIZE}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return Spectrum(tuple(complex(z) for z in np.linalg.eigvals(m)))


def spectral_abscissa(matrix: np.ndarray) -> float:
    """Largest real part over the spectrum; negative means asymptotically stable."""
    return eigenvalues(matrix).max_real()


def spectrum_match_distance(a: Spectrum, b: Spectrum) -> float:
    """Greedy minimal-distance multiset matching between two spectra.

    Repeatedly pairs the globally closest remaining eigenvalues and returns
    the largest matched distance.  Spectra must have equal size.
    """
    if len(a) != len(b):
        raise ValueError(f"spectrum sizes differ: {len(a)} vs {len(b)}")
    left = list(a.values)
    right = list(b.values)
    worst = 0.0
    while left:
        best = None
        for i, za in enumerate(left):
            for j, zb in enumerate(right):
                d = abs(za - zb)
                if best is None or d < best[0]:
                    best = (d, i, j)
        worst = max(worst, best[0])
        left.pop(best[1])
        right.pop(best[2])
    return worst
