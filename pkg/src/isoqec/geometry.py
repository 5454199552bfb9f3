"""Real-coordinate and spherical-coordinate views of n-qubit states.

A state with complex amplitudes ``alpha_k = x_{2k} + i x_{2k+1}`` is a point
``(x_0, ..., x_{2d-1})`` on the unit sphere of dimension ``2d - 1``. The
errorless state is always ``|0>``, i.e. ``(1, 0, ..., 0)``.

The array-level helpers accept any leading batch shape; the last axis holds
the ``2d`` real coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    coords: np.ndarray

    def __post_init__(self):
        x = np.array(self.coords, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.size % 2:
            raise ValueError("coords must be a flat vector of even length")
        if abs(float(x @ x) - 1.0) > NORM_TOL * 10:
            raise ValueError(f"state is not unit norm (|x|^2 = {float(x @ x)!r})")
        x.setflags(write=False)
        object.__setattr__(self, "coords", x)

    @property
    def d(self) -> int:
        return self.coords.size // 2

    @property
    def amplitudes(self) -> np.ndarray:
        return self.coords[0::2] + 1j * self.coords[1::2]

    @classmethod
    def basis(cls, k: int, d: int) -> "StateVector":
        """The computational basis state ``|k>`` in a ``d``-dimensional space."""
        if not 0 <= k < d:
            raise ValueError(f"basis index {k} out of range for d={d}")
        x = np.zeros(2 * d)
        x[2 * k] = 1.0
        return cls(x)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex)
        x = np.empty(2 * a.size)
        x[0::2] = a.real
        x[1::2] = a.imag
        return cls(x)

    def __eq__(self, other):
        return isinstance(other, StateVector) and np.array_equal(self.coords, other.coords)

    def __repr__(self):
        return f"StateVector(d={self.d}, coords={self.coords!r})"


@dataclass(frozen=True, eq=False)
class SphericalAngles:
    """Hyperspherical angles ``theta_0 .. theta_{2d-2}``; the last one lives in
    ``[0, 2 pi)``, all others in ``[0, pi]``."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.array(self.theta, dtype=float)
        if t.ndim != 1 or t.size < 1 or t.size % 2 == 0:
            raise ValueError("need an odd number 2d-1 of angles")
        tol = 1e-12
        if np.any(t[:-1] < -tol) or np.any(t[:-1] > math.pi + tol):
            raise ValueError("polar angles must lie in [0, pi]")
        if t[-1] < -tol or t[-1] >= 2 * math.pi + tol:
            raise ValueError("azimuth must lie in [0, 2 pi)")
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)

    @property
    def d(self) -> int:
        return (self.theta.size + 1) // 2


def angles_to_coords(theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    c = np.cos(theta)
    lead = np.ones(theta.shape[:-1] + (1,))
    sines = np.concatenate([lead, np.cumprod(s, axis=-1)], axis=-1)
    x = sines.copy()
    x[..., :-1] *= c
    return x


def coords_to_angles(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    # tail[..., j] = sqrt(sum_{i > j} x_i^2), accumulated from the right
    sq = x * x
    tail = np.sqrt(np.cumsum(sq[..., ::-1], axis=-1)[..., ::-1])
    after = np.concatenate([tail[..., 1:], np.zeros(x.shape[:-1] + (1,))], axis=-1)
    theta = np.arctan2(after[..., : n - 2], x[..., : n - 2])
    last = np.mod(np.arctan2(x[..., n - 1], x[..., n - 2]), 2 * math.pi)
    theta = np.concatenate([theta, last[..., None]], axis=-1)
    # once the remaining vector is exactly zero, the downstream angles are free: pin them to 0
    dead = tail[..., : n - 1] == 0.0
    theta[dead] = 0.0
    return theta


def to_cartesian(angles: SphericalAngles) -> StateVector:
    return StateVector(angles_to_coords(angles.theta))


def to_spherical(state: StateVector) -> SphericalAngles:
    return SphericalAngles(coords_to_angles(state.coords))


def deviation_sq(psi) -> np.ndarray | float:
    """Squared distance ``||Phi - Psi||^2 = 2 - 2 x_0`` from ``|0>``."""
    x = psi.coords if isinstance(psi, StateVector) else np.asarray(psi)
    out = 2.0 - 2.0 * x[..., 0]
    return float(out) if np.ndim(out) == 0 else out


def phase_deviation_sq(psi) -> np.ndarray | float:
    """Squared distance to the closest phase copy of ``|0>``: ``2 - 2|alpha_0|``."""
    x = psi.coords if isinstance(psi, StateVector) else np.asarray(psi)
    out = 2.0 - 2.0 * np.hypot(x[..., 0], x[..., 1])
    return float(out) if np.ndim(out) == 0 else out
