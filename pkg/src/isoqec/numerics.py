"""Numeric bedrock: double factorials, Wallis-type integrals, sphere surfaces,
adaptive Gauss-Kronrod quadrature and tolerance-controlled series summation.

Everything that involves ``(2d-3)!!`` or ``(2pi)^(d-1)`` with ``d = 2^n`` is
assembled in log space; those numbers overflow a double long before ``n = 10``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

ABS_FLOOR = 1e-300
EPS = np.finfo(float).eps
# Below this relative tolerance the roundoff floor of a double-precision
# panel sum dominates and convergence cannot be certified.
MIN_REL_TOL = 50 * EPS

LOG_2PI = math.log(2.0 * math.pi)
_EXACT_DF_MAX = 20


class NumericalFailure(ArithmeticError):
    """A numerical routine did not reach its requested tolerance.

    ``estimate`` carries the best value available when the routine gave up.
    """

    def __init__(self, message: str, estimate: float = math.nan, error: float = math.inf):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


# ---------------------------------------------------------------------------
# Log-scaled reals and double factorials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogScaled:
    """A real number stored as ``sign * exp(log_magnitude)``.

    Small double factorials also keep their ``exact`` integer value so that
    integer identities can be checked without rounding.
    """

    sign: int
    log_magnitude: float
    exact: int | None = None

    @classmethod
    def from_float(cls, x: float) -> "LogScaled":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_int(cls, k: int) -> "LogScaled":
        if k == 0:
            return cls(0, -math.inf, 0)
        return cls(1 if k > 0 else -1, math.log(abs(k)), k)

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf

    def __int__(self) -> int:
        if self.exact is None:
            raise ValueError("value is only known in log space")
        return self.exact

    def __mul__(self, other: "LogScaled | float | int") -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_float(float(other))
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
        if self.sign == 0 or other.sign == 0:
            return LogScaled(0, -math.inf, 0 if exact is not None else None)
        return LogScaled(self.sign * other.sign, self.log_magnitude + other.log_magnitude, exact)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogScaled | float | int") -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaled")
        if self.sign == 0:
            return LogScaled(0, -math.inf)
        return LogScaled(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __pow__(self, p: int) -> "LogScaled":
        if self.sign == 0:
            return LogScaled(0, -math.inf)
        sign = self.sign if p % 2 else 1
        return LogScaled(sign, p * self.log_magnitude)


def log_double_factorial(k: int) -> float:
    """Natural log of ``k!!`` with ``(-1)!! = 0!! = 1``."""
    if k < -1:
        raise ValueError(f"double factorial undefined for k={k}")
    if k <= 0:
        return 0.0
    if k % 2 == 0:
        j = k // 2
        return j * math.log(2.0) + math.lgamma(j + 1)
    j = (k + 1) // 2
    return math.lgamma(2 * j + 1) - j * math.log(2.0) - math.lgamma(j + 1)


def double_factorial(k: int) -> LogScaled:
    """``k!!`` for ``k >= -1``; exact for ``k <= 20``, log-scaled beyond."""
    if k < -1:
        raise ValueError(f"double factorial undefined for k={k}")
    if k <= _EXACT_DF_MAX:
        value = 1
        for j in range(k, 0, -2):
            value *= j
        return LogScaled.from_int(value)
    return LogScaled(1, log_double_factorial(k))


def df_ratio(numerator: Iterable[int], denominator: Iterable[int]) -> float:
    """Product of double factorials over product of double factorials."""
    log = sum(log_double_factorial(k) for k in numerator)
    log -= sum(log_double_factorial(k) for k in denominator)
    return math.exp(log)


# ---------------------------------------------------------------------------
# Closed-form integrals
# ---------------------------------------------------------------------------


def wallis_integral(k: int) -> float:
    """Integral of ``sin^k`` over ``[0, pi]``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    r = df_ratio([k - 1], [k])
    return 2.0 * r if k % 2 else math.pi * r


def cos_sin_halfpi_integral(a: int, b: int) -> float:
    """Integral of ``cos^a * sin^b`` over ``[0, pi/2]``."""
    if a < 0 or b < 0:
        raise ValueError("exponents must be >= 0")
    r = df_ratio([a - 1, b - 1], [a + b])
    if a % 2 == 0 and b % 2 == 0:
        return 0.5 * math.pi * r
    return r


KERNEL_KINDS = ("plain", "cos", "sin2d", "cos2")


def kernel_integral(kind: str, d: int, sigma: float) -> float:
    """Closed forms for integrals over ``[0, pi]`` of the Poisson-type kernel
    ``(1 + sigma^2 - 2 sigma cos t)^-d`` against trigonometric weights.

    ========  ============================================
    kind      numerator
    ========  ============================================
    plain     ``sin^(2d-2) t``
    cos       ``cos t * sin^(2d-2) t``
    sin2d     ``sin^(2d) t``
    cos2      ``cos^2 t * sin^(2d-2) t``
    ========  ============================================
    """
    if not 0.0 <= sigma < 1.0:
        raise ValueError(f"sigma must lie in [0, 1), got {sigma}")
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if kind == "sin2d":
        if d < 0:
            raise ValueError("d must be >= 0")
        return df_ratio([2 * d - 1], [2 * d]) * math.pi
    if d < 1:
        raise ValueError("d must be >= 1")
    s2 = sigma * sigma
    if kind == "plain":
        return df_ratio([2 * d - 3], [2 * d - 2]) * math.pi / (1.0 - s2)
    if kind == "cos":
        return df_ratio([2 * d - 3], [2 * d - 2]) * sigma * math.pi / (1.0 - s2)
    return math.pi * df_ratio([2 * d - 3], [2 * d]) * (1.0 + (2 * d - 1) * s2) / (1.0 - s2)


def kernel_integrand(kind: str, d: int, sigma: float) -> Callable[[np.ndarray], np.ndarray]:
    """The explicit integrand matching :func:`kernel_integral`."""
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")

    def f(t):
        s = np.sin(t)
        c = np.cos(t)
        # (1-sigma)^2 + 4 sigma sin^2(t/2) avoids cancellation near t = 0
        base = (1.0 - sigma) ** 2 + 4.0 * sigma * np.sin(0.5 * t) ** 2
        if kind == "sin2d":
            return s ** (2 * d) / base**d
        w = s ** (2 * d - 2) / base**d
        if kind == "cos":
            return c * w
        if kind == "cos2":
            return c * c * w
        return w

    return f


def log_sphere_surface(dim: int) -> float:
    """Log of the surface measure of the unit sphere of dimension ``dim``."""
    if dim < 0:
        raise ValueError("dim must be >= 0")
    if dim == 0:
        return math.log(2.0)
    if dim % 2 == 0:
        d = dim // 2
        return math.log(2.0) + d * LOG_2PI - log_double_factorial(2 * d - 1)
    d = (dim + 1) // 2
    return d * LOG_2PI - log_double_factorial(2 * d - 2)


def sphere_surface(dim: int) -> LogScaled:
    """Surface measure of the unit sphere ``S^dim`` embedded in ``R^(dim+1)``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return LogScaled(1, log_sphere_surface(dim))


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1] and matching weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (xgk[1], xgk[3], xgk[5], xgk[7])
_G_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G_WEIGHTS[7] = _WG[3]
_G_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


class QuadratureResult(NamedTuple):
    value: float
    error_estimate: float
    evaluations: int


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise NumericalFailure("integrand produced non-finite values")
    k = half * (y @ _K_WEIGHTS)
    g = half * (y @ _G_WEIGHTS)
    resabs = np.abs(half) * (np.abs(y) @ _K_WEIGHTS)
    return k, np.abs(k - g), resabs


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    *,
    points: Sequence[float] = (),
    abs_tol: float = ABS_FLOOR,
    max_evals: int = 2_000_000,
) -> QuadratureResult:
    """Integrate a vectorised ``f`` over ``[a, b]`` with Gauss-Kronrod 7/15 panels.

    Panels are bisected until the summed error estimate falls below
    ``max(rel_tol * |I|, abs_tol, 50 eps * int|f|)``; the last term is the
    roundoff floor and only matters for integrals that cancel to (near) zero.
    ``points`` seeds the initial panel edges, which is how callers refine
    a priori around peaks, endpoint layers and discontinuities.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    if rel_tol < MIN_REL_TOL:
        raise NumericalFailure(f"rel_tol={rel_tol:g} is below attainable double precision")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if b < a:
        res = integrate_adaptive(f, b, a, rel_tol, points=points, abs_tol=abs_tol, max_evals=max_evals)
        return QuadratureResult(-res.value, res.error_estimate, res.evaluations)

    edges = np.unique(np.clip(np.asarray([a, *points, b], dtype=float), a, b))
    lo, hi = edges[:-1], edges[1:]
    done_val: list[float] = []
    done_err = 0.0
    done_abs = 0.0
    evals = 0
    while True:
        k, err, resabs = _gk15(f, lo, hi)
        evals += 15 * lo.size
        total = math.fsum(done_val) + math.fsum(k)
        total_err = done_err + float(err.sum())
        total_abs = done_abs + float(resabs.sum())
        target = max(rel_tol * abs(total), abs_tol, 50 * EPS * total_abs)
        if total_err <= target:
            return QuadratureResult(total, total_err, evals)
        if evals >= max_evals:
            raise NumericalFailure(
                f"quadrature did not converge within {max_evals} evaluations",
                estimate=total, error=total_err,
            )
        width = (hi - lo) / (b - a)
        finished = (err <= target * width) | (err <= 50 * EPS * resabs)
        if np.all(finished):
            # every panel is locally fine but the sum is not; split the worst ones anyway
            finished = err < np.max(err) * 0.5
        done_val.extend(k[finished].tolist())
        done_err += float(err[finished].sum())
        done_abs += float(resabs[finished].sum())
        lo_s, hi_s = lo[~finished], hi[~finished]
        mid = 0.5 * (lo_s + hi_s)
        if np.any((mid <= lo_s) | (mid >= hi_s)):
            raise NumericalFailure("panel width underflow", estimate=total, error=total_err)
        lo = np.concatenate([lo_s, mid])
        hi = np.concatenate([mid, hi_s])


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------


class SeriesSum(NamedTuple):
    value: float
    terms: int


def sum_series_detailed(
    term: Callable[[int], float],
    rel_tol: float = 1e-12,
    k_max: int = 20000,
    patience: int = 3,
) -> SeriesSum:
    """Sum ``term(k)`` for ``k = 1, 2, ...`` until ``patience`` consecutive terms
    are each below ``rel_tol`` times the running partial sum."""
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    if rel_tol < MIN_REL_TOL:
        raise NumericalFailure(f"rel_tol={rel_tol!r} is below the roundoff floor {MIN_REL_TOL:.1e}")
    values: list[float] = []
    partial = 0.0
    quiet = 0
    for k in range(1, k_max + 1):
        t = float(term(k))
        if not math.isfinite(t):
            raise NumericalFailure(f"series term {k} is not finite", estimate=math.fsum(values))
        values.append(t)
        partial += t
        if abs(t) <= rel_tol * abs(partial):
            quiet += 1
            if quiet >= patience:
                return SeriesSum(math.fsum(values), k)
        else:
            quiet = 0
    raise NumericalFailure(
        f"series did not converge within k_max={k_max} terms", estimate=math.fsum(values)
    )


def sum_series(term: Callable[[int], float], rel_tol: float = 1e-12, k_max: int = 20000) -> float:
    return sum_series_detailed(term, rel_tol, k_max).value
