"""Isotropic error densities on the state sphere and an exact sampler.

An isotropic density depends on the disturbed state only through the polar
angle ``theta0`` to ``|0>``, so it is a function ``f(theta0)`` on ``[0, pi]``.
Its polar-angle marginal is ``|S_{2d-2}| f(theta0) sin^(2d-2)(theta0)``;
every expectation in this package is taken against that marginal
(:func:`marginal_moment`), which stays O(1) even when ``d = 2^n`` is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics
from .geometry import StateVector

DEFAULT_GRID = 4096
MAX_CDF_STEP = 1.0 / 256
SAMPLER_NORM_TOL = 1e-6
_GL_NODES, _GL_WEIGHTS = numerics.gauss_legendre(8)


class InvalidDensity(ValueError):
    pass


def _default_points(breakpoints=()) -> tuple[float, ...]:
    # uniform panels plus geometric grading towards both endpoints, where
    # sharply peaked densities (sigma -> 1) put their mass
    uniform = np.linspace(0.0, math.pi, 65)
    graded = (math.pi / 64) * 2.0 ** -np.arange(1, 41)
    pts = np.concatenate([uniform, graded, math.pi - graded, np.asarray(breakpoints, dtype=float)])
    pts = pts[(pts >= 0) & (pts <= math.pi)]
    return tuple(np.unique(pts).tolist())


@dataclass(frozen=True, eq=False)
class IsotropicDensity:
    """Density ``f(theta0)`` of an isotropic error on ``S^(2d-1)``.

    ``density_fn`` and ``log_density_fn`` must accept numpy arrays.
    ``breakpoints`` are places where ``f`` is not smooth; they become panel
    edges for quadrature and grid nodes for the sampler.
    """

    kind: str
    d: int
    density_fn: Callable[[np.ndarray], np.ndarray]
    sigma: float | None = None
    log_density_fn: Callable[[np.ndarray], np.ndarray] | None = None
    breakpoints: tuple[float, ...] = ()
    points: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        object.__setattr__(self, "points", _default_points(self.breakpoints))

    def log_f(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.log_density_fn is not None:
            return self.log_density_fn(theta)
        with np.errstate(divide="ignore"):
            return np.log(self.density_fn(theta))

    def log_marginal(self, theta) -> np.ndarray:
        """Log of the polar-angle marginal ``|S_{2d-2}| f sin^(2d-2)``."""
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            log_sin = np.log(np.sin(theta))
        return numerics.log_sphere_surface(2 * self.d - 2) + self.log_f(theta) + (2 * self.d - 2) * log_sin

    def marginal(self, theta) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_marginal(theta))


def normal_density(sigma: float, d: int) -> IsotropicDensity:
    """The normal error family, ``f ∝ (1 - s^2) / (1 + s^2 - 2 s cos t)^d``."""
    if not 0.0 <= sigma < 1.0:
        raise ValueError(f"sigma must lie in [0, 1), got {sigma}")
    log_coef = numerics.log_double_factorial(2 * d - 2) - d * numerics.LOG_2PI + math.log1p(-sigma * sigma)

    def log_f(theta):
        base = (1.0 - sigma) ** 2 + 4.0 * sigma * np.sin(0.5 * theta) ** 2
        return log_coef - d * np.log(base)

    def f(theta):
        return np.exp(log_f(np.asarray(theta, dtype=float)))

    return IsotropicDensity("normal", d, f, sigma=sigma, log_density_fn=log_f)


def uniform_density(d: int) -> IsotropicDensity:
    log_c = -numerics.log_sphere_surface(2 * d - 1)

    def log_f(theta):
        return np.full(np.shape(theta), log_c)

    def f(theta):
        return np.full(np.shape(theta), math.exp(log_c))

    return IsotropicDensity("uniform", d, f, log_density_fn=log_f)


def custom_density(fn: Callable, d: int, breakpoints=(), log_fn: Callable | None = None) -> IsotropicDensity:
    return IsotropicDensity("custom", d, fn, log_density_fn=log_fn, breakpoints=tuple(breakpoints))


def marginal_moment(density: IsotropicDensity, g: Callable, rel_tol: float = 1e-12) -> float:
    """``E[g(theta0)]`` under the polar-angle marginal."""
    res = numerics.integrate_adaptive(
        lambda t: density.marginal(t) * g(t), 0.0, math.pi, rel_tol, points=density.points
    )
    return res.value


def ebar(density: IsotropicDensity, g: Callable, rel_tol: float = 1e-12) -> float:
    """Raw functional ``int_0^pi f(theta0) g(theta0) dtheta0``.

    Overflows for large ``d``; kept for small-``d`` cross-checks against the
    stabilised :func:`marginal_moment`.
    """
    res = numerics.integrate_adaptive(
        lambda t: density.density_fn(t) * g(t), 0.0, math.pi, rel_tol, points=density.points
    )
    return res.value


def check_normalization(density: IsotropicDensity, rel_tol: float = 1e-12) -> float:
    return abs(1.0 - marginal_moment(density, np.ones_like, rel_tol))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Theta0Sampler:
    """Tabulated inverse CDF of the polar angle.

    The table is kept in ``theta`` (not ``t = cos theta``) so that
    ``sin theta`` stays accurate for states very close to ``|0>``;
    :attr:`cdf_grid` exposes the same table in ``t``.
    """

    density: IsotropicDensity
    theta: np.ndarray
    cdf_theta: np.ndarray
    grid_size: int
    mass: float

    @property
    def cdf_grid(self) -> np.ndarray:
        """``(t, P[cos theta0 <= t])`` rows with ``t`` ascending."""
        t = np.cos(self.theta[::-1])
        return np.column_stack([t, 1.0 - self.cdf_theta[::-1]])

    def _partial(self, i: np.ndarray, theta: np.ndarray) -> np.ndarray:
        lo = self.theta[i]
        half = 0.5 * (theta - lo)
        x = (lo + half)[:, None] + half[:, None] * _GL_NODES[None, :]
        return half * (self.density.marginal(x) @ _GL_WEIGHTS) / self.mass

    def _panel(self, theta: np.ndarray) -> np.ndarray:
        i = np.searchsorted(self.theta, theta, side="right") - 1
        return np.clip(i, 0, self.theta.size - 2)

    def cdf(self, theta) -> np.ndarray:
        """``P[theta0 <= theta]``, exact up to the panel quadrature."""
        theta = np.clip(np.atleast_1d(np.asarray(theta, dtype=float)), 0.0, math.pi)
        i = self._panel(theta)
        return self.cdf_theta[i] + self._partial(i, theta)

    def invert(self, u) -> np.ndarray:
        """Polar angles with ``cdf(theta) = u``: table lookup, then safeguarded Newton."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        i = np.searchsorted(self.cdf_theta, u, side="right") - 1
        i = np.clip(i, 0, self.theta.size - 2)
        lo = self.theta[i].copy()
        hi = self.theta[i + 1].copy()
        c0, c1 = self.cdf_theta[i], self.cdf_theta[i + 1]
        span = np.where(c1 > c0, c1 - c0, 1.0)
        x = lo + (hi - lo) * np.clip((u - c0) / span, 0.0, 1.0)
        for _ in range(60):
            r = c0 + self._partial(i, x) - u
            active = np.abs(r) > 1e-13
            if not np.any(active):
                break
            below = r < 0
            lo = np.where(active & below, x, lo)
            hi = np.where(active & ~below, x, hi)
            q = self.density.marginal(x) / self.mass
            with np.errstate(divide="ignore", invalid="ignore"):
                step = x - r / q
            ok = (q > 0) & (step >= lo) & (step <= hi)
            x = np.where(active, np.where(ok, step, 0.5 * (lo + hi)), x)
        return x

    def sample_theta(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.invert(rng.random(n))


def build_sampler(density: IsotropicDensity, grid_size: int = DEFAULT_GRID) -> Theta0Sampler:
    """Tabulate the polar-angle CDF on an adaptively refined grid."""
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    nodes = np.unique(np.concatenate([np.linspace(0.0, math.pi, grid_size + 1), density.points]))
    for _ in range(60):
        lo, hi = nodes[:-1], nodes[1:]
        inc, err, _ = numerics._gk15(density.marginal, lo, hi)
        bad = (err > 1e-15) | (inc > MAX_CDF_STEP)
        if not np.any(bad):
            break
        nodes = np.unique(np.concatenate([nodes, 0.5 * (lo[bad] + hi[bad])]))
    else:
        raise numerics.NumericalFailure("sampler grid refinement did not settle")
    mass = math.fsum(inc)
    if abs(1.0 - mass) > SAMPLER_NORM_TOL:
        raise InvalidDensity(f"density is not normalised (mass={mass!r})")
    cdf = np.concatenate([[0.0], np.cumsum(inc)]) / mass
    cdf[-1] = 1.0
    return Theta0Sampler(density, nodes, cdf, grid_size, mass)


def sample_states(sampler: Theta0Sampler, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` disturbed states as an ``(n, 2d)`` coordinate array."""
    d = sampler.density.d
    theta = sampler.sample_theta(n, rng)
    v = rng.standard_normal((n, 2 * d - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    x = np.empty((n, 2 * d))
    x[:, 0] = np.cos(theta)
    x[:, 1:] = np.sin(theta)[:, None] * v
    return x


def sample_state(sampler: Theta0Sampler, rng: np.random.Generator) -> StateVector:
    return StateVector(sample_states(sampler, 1, rng)[0])
