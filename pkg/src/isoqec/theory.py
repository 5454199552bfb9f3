"""Closed-form variances and moments for isotropic errors before and after
ideal syndrome correction.

All evaluators work with O(1) marginal moments ``m(g) = E[g(theta0)]``.
The literal prefactor forms, e.g. ``2 - 4 (2pi)^(d-1)/(2d-3)!! * int f cos sin^(2d-2)``,
are equal by ``int f sin^(2d-2) = 1/|S_{2d-2}|`` but over/underflow at
``d = 2^n`` for moderate ``n``. They are kept here as ``*_raw`` functions
and used as an independent cross-check at small ``d``.

Correction variance. With ``t = cos theta0`` and ``B`` the share of the
tangent direction that falls inside the code block, ``P_0 = t^2 + (1-t^2) B``
and ``1 - B ~ Beta(d - d', d' - 1/2)``; expanding ``sqrt(P_0)`` gives

    V_corr = 2 - 2 m(cos) + 2 sum_k R_k m(cos sin^(2k))

    R_k = (2k-3)!! / (2k)!! * E[(1-B)^k]
        = (2k-3)!! (2d-3)!! (2d-2d'+2k-2)!! / ((2k)!! (2d-2d'-2)!! (2d+2k-3)!!)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .codes import CodeParams
from .distributions import IsotropicDensity, ebar, marginal_moment
from .numerics import LOG_2PI, double_factorial, log_double_factorial

QUAD_TOL = 1e-12
SERIES_TOL = 1e-10
K_MAX = 20000
# moments are O(1); below this the folded integrand is pure cancellation noise
ODD_ABS_TOL = 1e-16


def _cos(t):
    return np.cos(t)


def _sin2(t):
    return np.sin(t) ** 2


def _cos2(t):
    return np.cos(t) ** 2


def variance_normal(sigma: float) -> float:
    if not 0.0 <= sigma < 1.0:
        raise ValueError(f"sigma must lie in [0, 1), got {sigma}")
    return 2.0 * (1.0 - sigma)


def variance_disturbed(density: IsotropicDensity, rel_tol: float = QUAD_TOL) -> float:
    """``V(Psi) = 2 - 2 E[cos theta0]``."""
    return 2.0 - 2.0 * marginal_moment(density, _cos, rel_tol)


@dataclass(frozen=True)
class SecondMoments:
    ex0sq: float
    exjsq: float
    ealpha0sq: float
    ealphaksq: float


def second_moments(density: IsotropicDensity, rel_tol: float = QUAD_TOL) -> SecondMoments:
    """``E[x_0^2]``, ``E[x_j^2]`` (j > 0), ``E[|alpha_0|^2]``, ``E[|alpha_k|^2]`` (k > 0)."""
    d = density.d
    ex0sq = marginal_moment(density, _cos2, rel_tol)
    exjsq = marginal_moment(density, _sin2, rel_tol) / (2 * d - 1)
    return SecondMoments(ex0sq, exjsq, ex0sq + exjsq, 2.0 * exjsq)


def fidelity_isotropic(density: IsotropicDensity, rel_tol: float = QUAD_TOL) -> float:
    """``F = sqrt(E[|alpha_0|^2])`` relative to ``|0>``."""
    return math.sqrt(second_moments(density, rel_tol).ealpha0sq)


def _check_code(density: IsotropicDensity, code: CodeParams):
    if density.d != code.d:
        raise ValueError(f"density has d={density.d} but code has d={code.d}")


@dataclass(frozen=True)
class SyndromeExpectations:
    e_p0: float
    e_ps: float


def syndrome_prob_expectations(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = QUAD_TOL
) -> SyndromeExpectations:
    """``E[P_0]`` and the common value of ``E[P_s]`` for ``s > 0``."""
    _check_code(density, code)
    d, dl = code.d, code.d_logical
    msin2 = marginal_moment(density, _sin2, rel_tol)
    e_p0 = 1.0 - 2.0 * (d - dl) / (2 * d - 1) * msin2
    e_ps = 2.0 * dl / (2 * d - 1) * msin2
    total = e_p0 + (code.d_syndrome - 1) * e_ps
    if abs(total - 1.0) > 1e-10:
        raise numerics.NumericalFailure(f"syndrome expectations sum to {total!r}")
    return SyndromeExpectations(e_p0, e_ps)


def log_series_coefficient(d: int, d_logical: int, k: int) -> float:
    """``log R_k``; ``-inf`` when ``d = d'`` (the trivial code)."""
    a = d - d_logical
    if a == 0:
        return -math.inf
    return (
        log_double_factorial(2 * k - 3)
        + log_double_factorial(2 * d - 3)
        + log_double_factorial(2 * a + 2 * k - 2)
        - log_double_factorial(2 * k)
        - log_double_factorial(2 * a - 2)
        - log_double_factorial(2 * d + 2 * k - 3)
    )


def _folded_points(density: IsotropicDensity) -> list[float]:
    half = math.pi / 2
    pts = np.asarray(density.points)
    return sorted(set(pts[pts <= half].tolist()) | set((math.pi - pts[pts >= half]).tolist()))


def odd_moment(density: IsotropicDensity, k: int, rel_tol: float = QUAD_TOL) -> float:
    """``E[cos theta0 sin^(2k) theta0]``, folded onto ``[0, pi/2]``.

    The integrand is odd about ``pi/2``, so folding pairs each ``theta`` with
    ``pi - theta`` and integrates ``cos sin^2k (q(theta) - q(pi - theta))``.
    The sign of the result is then the sign of the density difference, and a
    symmetric density gives exactly zero.
    """
    d = density.d
    log_s = numerics.log_sphere_surface(2 * d - 2)

    def g(t):
        s = np.sin(t)
        with np.errstate(divide="ignore", under="ignore"):
            log_w = log_s + (2 * d - 2) * np.log(s)
            diff = np.exp(log_w + density.log_f(t)) - np.exp(log_w + density.log_f(math.pi - t))
        return np.cos(t) * s ** (2 * k) * diff

    res = numerics.integrate_adaptive(
        g, 0.0, math.pi / 2, rel_tol, points=_folded_points(density), abs_tol=ODD_ABS_TOL
    )
    return res.value


def _gap_series(density: IsotropicDensity, d_logical: int, rel_tol: float, quad_tol: float, k_max: int):
    d = density.d

    def term(k: int) -> float:
        log_r = log_series_coefficient(d, d_logical, k)
        if log_r == -math.inf:
            return 0.0
        return math.exp(log_r) * odd_moment(density, k, quad_tol)

    return numerics.sum_series_detailed(term, rel_tol, k_max)


def variance_gap(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = SERIES_TOL,
    quad_tol: float = QUAD_TOL, k_max: int = K_MAX,
) -> float:
    """``V(corrected) - V(disturbed)`` from the series itself, not a difference."""
    _check_code(density, code)
    return 2.0 * _gap_series(density, code.d_logical, rel_tol, quad_tol, k_max).value


def variance_corrected(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = SERIES_TOL,
    quad_tol: float = QUAD_TOL, k_max: int = K_MAX,
) -> float:
    _check_code(density, code)
    series = _gap_series(density, code.d_logical, rel_tol, quad_tol, k_max).value
    return 2.0 - 2.0 * marginal_moment(density, _cos, quad_tol) + 2.0 * series


@dataclass(frozen=True)
class BranchExpectations:
    e1: float
    e2: float
    e3: float
    e4: float


def branch_expectations(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = SERIES_TOL,
    quad_tol: float = QUAD_TOL, k_max: int = K_MAX,
) -> BranchExpectations:
    """Expected angle products behind the branch deviations.

    ``e1 = E[1 - P_0]``, ``e2 = E[1 - P_0 - P_1]``, ``e3 = 0`` by odd symmetry
    and ``e4 = E[cos theta0 sqrt(P_0)]``.
    """
    _check_code(density, code)
    d, dl = code.d, code.d_logical
    msin2 = marginal_moment(density, _sin2, quad_tol)
    e1 = 2.0 * (d - dl) / (2 * d - 1) * msin2
    e2 = 2.0 * (d - 2 * dl) / (2 * d - 1) * msin2
    series = _gap_series(density, dl, rel_tol, quad_tol, k_max).value
    e4 = marginal_moment(density, _cos, quad_tol) - series
    return BranchExpectations(e1, e2, 0.0, e4)


@dataclass(frozen=True)
class TheoryReport:
    v_disturbed: float
    v_corrected: float
    gap: float
    series_terms_used: int
    e_p0: float
    e_ps: float
    tolerances: dict = field(default_factory=dict)


def theory_report(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = SERIES_TOL,
    quad_tol: float = QUAD_TOL, k_max: int = K_MAX,
) -> TheoryReport:
    _check_code(density, code)
    v_psi = variance_disturbed(density, quad_tol)
    series = _gap_series(density, code.d_logical, rel_tol, quad_tol, k_max)
    gap = 2.0 * series.value
    v_corr = v_psi + gap
    probs = syndrome_prob_expectations(density, code, quad_tol)
    return TheoryReport(
        v_psi, v_corr, gap, series.terms, probs.e_p0, probs.e_ps,
        {"series_rel_tol": rel_tol, "quad_rel_tol": quad_tol, "k_max": k_max},
    )


# ---------------------------------------------------------------------------
# Literal prefactor forms (small d only)
# ---------------------------------------------------------------------------


def _two_pi_pow(p: int) -> numerics.LogScaled:
    return numerics.LogScaled(1, p * LOG_2PI)


def _sin_pow(p: int):
    return lambda t: np.sin(t) ** p


def variance_disturbed_raw(density: IsotropicDensity, rel_tol: float = QUAD_TOL) -> float:
    d = density.d
    pref = 4 * _two_pi_pow(d - 1) / double_factorial(2 * d - 3)
    e = ebar(density, lambda t: np.cos(t) * np.sin(t) ** (2 * d - 2), rel_tol)
    return 2.0 - float(pref * e)


def second_moments_raw(density: IsotropicDensity, rel_tol: float = QUAD_TOL) -> SecondMoments:
    d = density.d
    a = float(2 * _two_pi_pow(d - 1) / double_factorial(2 * d - 3))
    b = float(2 * _two_pi_pow(d - 1) / double_factorial(2 * d - 1))
    ebar_c2 = ebar(density, lambda t: np.cos(t) ** 2 * np.sin(t) ** (2 * d - 2), rel_tol)
    ebar_s2d = ebar(density, _sin_pow(2 * d), rel_tol)
    ex0sq = a * ebar_c2
    exjsq = b * ebar_s2d
    return SecondMoments(ex0sq, exjsq, a * (ebar_c2 + ebar_s2d / (2 * d - 1)), 2 * exjsq)


def syndrome_prob_expectations_raw(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = QUAD_TOL
) -> SyndromeExpectations:
    _check_code(density, code)
    d, dl = code.d, code.d_logical
    pref = float(4 * _two_pi_pow(d - 1) / double_factorial(2 * d - 1))
    e = ebar(density, _sin_pow(2 * d), rel_tol)
    return SyndromeExpectations(1.0 - pref * (d - dl) * e, pref * dl * e)


def variance_corrected_raw(
    density: IsotropicDensity, code: CodeParams, rel_tol: float = SERIES_TOL,
    quad_tol: float = QUAD_TOL, k_max: int = K_MAX,
) -> float:
    """Correction variance from the literal double-factorial prefactors,
    integrating the raw density against ``cos sin^(2d+2k-2)`` on ``[0, pi]``."""
    _check_code(density, code)
    d, dl = code.d, code.d_logical
    outer = 4 * _two_pi_pow(d - 1) / double_factorial(2 * d - 2 * dl - 2)

    def term(k: int) -> float:
        coef = (
            double_factorial(2 * k - 3) * double_factorial(2 * d - 2 * dl + 2 * k - 2)
            / (double_factorial(2 * k) * double_factorial(2 * d + 2 * k - 3))
        )
        e = ebar(density, lambda t: np.cos(t) * np.sin(t) ** (2 * d + 2 * k - 2), quad_tol)
        return float(outer * coef * e)

    series = numerics.sum_series(term, rel_tol, k_max)
    return variance_disturbed_raw(density, quad_tol) + series
