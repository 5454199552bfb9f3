"""Seeded Monte Carlo estimators for the quantities in :mod:`isoqec.theory`.

Samples are generated in fixed-size chunks. Chunk ``i`` draws from its own
stream ``SeedSequence(seed, spawn_key=(i,))`` and results are concatenated in
chunk order, so estimates are bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import codes, theory
from .codes import CodeParams
from .distributions import IsotropicDensity, Theta0Sampler, build_sampler, normal_density, sample_states

CHUNK = 1 << 14
MIN_SAMPLES = 100
MIN_HITS = 100
SE_BAND = 3.0

StateSource = Callable[[np.random.Generator, int], np.ndarray]


class InsufficientSamples(RuntimeError):
    pass


@dataclass(frozen=True)
class EstimateReport:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    estimator: str = "sampled"

    def within(self, target: float, k: float = SE_BAND) -> bool:
        return abs(self.mean - target) <= k * self.std_error


@dataclass(frozen=True)
class UniformityReport:
    syndrome: int
    n_hits: int
    moment1: EstimateReport
    moment2: EstimateReport
    target2: float
    histogram_pvalue: float | None = None

    @property
    def passed(self) -> bool:
        return self.moment1.within(0.0) and self.moment2.within(self.target2)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ISOQEC_THREADS", "1")))
    except ValueError:
        return 1


def as_source(obj) -> StateSource:
    """Turn a density, a prepared sampler or a ``(rng, n) -> states`` callable into a state source."""
    if isinstance(obj, IsotropicDensity):
        obj = build_sampler(obj)
    if isinstance(obj, Theta0Sampler):
        sampler = obj
        return lambda rng, n: sample_states(sampler, n, rng)
    if callable(obj):
        return obj
    raise TypeError(f"cannot sample states from {type(obj).__name__}")


def chunk_layout(n_samples: int) -> list[int]:
    full, rest = divmod(n_samples, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def run_chunks(work: Callable[[np.random.Generator, int], tuple], n_samples: int, seed: int,
               threads: int | None = None) -> tuple[np.ndarray, ...]:
    """Run ``work(rng, size)`` over every chunk and concatenate its outputs in chunk order."""
    sizes = chunk_layout(n_samples)
    jobs = [(np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,))), size)
            for i, size in enumerate(sizes)]
    threads = threads or default_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: work(*job), jobs))
    else:
        parts = [work(*job) for job in jobs]
    return tuple(np.concatenate(cols) for cols in zip(*parts))


def estimate(values: np.ndarray, seed: int, estimator: str = "sampled") -> EstimateReport:
    n = values.size
    return EstimateReport(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)), n, seed, estimator)


def _check_n(n_samples: int):
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")


def _check_dim(states: np.ndarray, code: CodeParams):
    if states.shape[-1] != 2 * code.d:
        raise ValueError(f"source produced d={states.shape[-1] // 2}, code needs d={code.d}")


# ---------------------------------------------------------------------------
# Per-sample quantities
# ---------------------------------------------------------------------------


def branch_leads(x: np.ndarray, code: CodeParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-branch probabilities ``P_s`` and the real part of each block's first amplitude."""
    b = codes.blocks(x, code)
    return np.einsum("...sj,...sj->...s", b, b), b[..., 0]


def rb_corrected_deviation(x: np.ndarray, code: CodeParams) -> np.ndarray:
    """``sum_s P_s ||Phi - corrected_s||^2 = sum_s (2 P_s - 2 lead_s sqrt(P_s))``."""
    p, lead = branch_leads(x, code)
    return np.sum(2.0 * p - 2.0 * lead * np.sqrt(p), axis=-1)


def sampled_corrected(x: np.ndarray, code: CodeParams, rng: np.random.Generator):
    """Measure one syndrome per state; returns (syndromes, corrected leading coordinate)."""
    p, lead = branch_leads(x, code)
    s = codes.draw_syndromes(p, rng)
    rows = np.arange(x.shape[0])
    return s, lead[rows, s] / np.sqrt(p[rows, s])


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def mc_variance_disturbed(density, n_samples: int, seed: int, threads: int | None = None) -> EstimateReport:
    _check_n(n_samples)
    source = as_source(density)
    (dev,) = run_chunks(lambda rng, n: (2.0 - 2.0 * source(rng, n)[:, 0],), n_samples, seed, threads)
    return estimate(dev, seed)


def mc_quantum_variance(density, n_samples: int, seed: int, threads: int | None = None) -> EstimateReport:
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        return (2.0 - 2.0 * np.hypot(x[:, 0], x[:, 1]),)

    (dev,) = run_chunks(work, n_samples, seed, threads)
    return estimate(dev, seed)


def mc_variance_corrected(density, code: CodeParams, n_samples: int, seed: int,
                          estimator: str = "rao_blackwell", threads: int | None = None) -> EstimateReport:
    """Unbiased estimate of the corrected-state variance.

    ``sampled`` measures one syndrome per disturbed state; ``rao_blackwell``
    averages the deviation of every branch weighted by its exact probability.
    """
    _check_n(n_samples)
    if estimator not in ("sampled", "rao_blackwell"):
        raise ValueError(f"unknown estimator {estimator!r}")
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        if estimator == "rao_blackwell":
            return (rb_corrected_deviation(x, code),)
        _, lead = sampled_corrected(x, code, rng)
        return (2.0 - 2.0 * lead,)

    (dev,) = run_chunks(work, n_samples, seed, threads)
    return estimate(dev, seed, estimator)


def mc_gap(density, code: CodeParams, n_samples: int, seed: int, threads: int | None = None) -> EstimateReport:
    """Paired estimate of ``V(corrected) - V(disturbed)`` on common samples."""
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        return (rb_corrected_deviation(x, code) - (2.0 - 2.0 * x[:, 0]),)

    (gap,) = run_chunks(work, n_samples, seed, threads)
    return estimate(gap, seed, "rao_blackwell")


def mc_syndrome_probs(density, code: CodeParams, n_samples: int, seed: int,
                      threads: int | None = None) -> list[EstimateReport]:
    """Per-syndrome mean of the exact branch probability ``P_s``."""
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        return (codes.branch_probabilities(x, code),)

    (p,) = run_chunks(work, n_samples, seed, threads)
    return [estimate(p[:, s], seed, "rao_blackwell") for s in range(code.d_syndrome)]


def mc_syndrome_frequencies(density, code: CodeParams, n_samples: int, seed: int,
                            threads: int | None = None) -> list[EstimateReport]:
    """Empirical frequency of each measured syndrome."""
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        s, _ = sampled_corrected(x, code, rng)
        return (s,)

    (s,) = run_chunks(work, n_samples, seed, threads)
    return [estimate((s == k).astype(float), seed) for k in range(code.d_syndrome)]


def mc_branch_contributions(density, code: CodeParams, n_samples: int, seed: int,
                            threads: int | None = None) -> tuple[EstimateReport, list[EstimateReport]]:
    """Sampled corrected variance together with each syndrome's share of it.

    The share of branch ``s`` is the mean of ``1[syndrome = s] * deviation``,
    so the shares add up to the total sample by sample.
    """
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        s, lead = sampled_corrected(x, code, rng)
        return s, 2.0 - 2.0 * lead

    s, dev = run_chunks(work, n_samples, seed, threads)
    shares = [estimate(np.where(s == k, dev, 0.0), seed) for k in range(code.d_syndrome)]
    return estimate(dev, seed), shares


def mc_uniformity_test(density, code: CodeParams, syndrome: int, n_samples: int = 10**6, seed: int = 0,
                       histogram: bool = False, bins: int = 20, threads: int | None = None) -> UniformityReport:
    """Check that states corrected after detecting ``syndrome > 0`` are uniform on
    the code sphere, through the first two moments of their leading coordinate."""
    if not 0 < syndrome < code.d_syndrome:
        raise ValueError(f"syndrome must satisfy 0 < s < {code.d_syndrome}, got {syndrome}")
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        s, lead = sampled_corrected(x, code, rng)
        return (lead[s == syndrome],)

    (c,) = run_chunks(work, n_samples, seed, threads)
    if c.size < MIN_HITS:
        raise InsufficientSamples(f"only {c.size} of {n_samples} samples measured syndrome {syndrome}")
    pvalue = None
    if histogram:
        from scipy import stats

        a = code.d_logical - 0.5
        edges = stats.beta(a, a).ppf(np.linspace(0.0, 1.0, bins + 1)) * 2.0 - 1.0
        counts, _ = np.histogram(c, bins=edges)
        pvalue = float(stats.chisquare(counts).pvalue)
    return UniformityReport(
        syndrome, int(c.size), estimate(c, seed), estimate(c * c, seed), 1.0 / (2 * code.d_logical), pvalue
    )


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "sigma", "n", "m", "v_psi_theory", "v_psi_mc", "v_psi_se", "v_corr_theory", "v_corr_mc",
    "v_corr_se", "gap_theory", "e_p0_theory", "e_p0_mc", "status",
)


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    n: int
    m: int
    v_psi_theory: float = math.nan
    v_psi_mc: float = math.nan
    v_psi_se: float = math.nan
    v_corr_theory: float = math.nan
    v_corr_mc: float = math.nan
    v_corr_se: float = math.nan
    gap_theory: float = math.nan
    e_p0_theory: float = math.nan
    e_p0_mc: float = math.nan
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def paired_pass(density, code: CodeParams, n_samples: int, seed: int, threads: int | None = None):
    """Disturbed deviation, Rao-Blackwellised corrected deviation and ``P_0`` on common samples."""
    _check_n(n_samples)
    source = as_source(density)

    def work(rng, n):
        x = source(rng, n)
        _check_dim(x, code)
        return 2.0 - 2.0 * x[:, 0], rb_corrected_deviation(x, code), codes.branch_probabilities(x, code)[:, 0]

    return run_chunks(work, n_samples, seed, threads)


def sweep(sigma_list: Sequence[float], code_list: Sequence[CodeParams], n_samples: int, seed: int,
          rel_tol: float = theory.SERIES_TOL, threads: int | None = None) -> list[SweepRow]:
    """Theory and Monte Carlo side by side for every (sigma, code) pair.

    A row whose computation fails carries the error message in ``status``
    and NaN elsewhere; the sweep carries on.
    """
    if not sigma_list or not code_list:
        raise ValueError("sigma and code lists must be non-empty")
    rows = []
    index = 0
    for code in code_list:
        for sigma in sigma_list:
            row_seed = seed + index
            index += 1
            try:
                density = normal_density(sigma, code.d)
                rep = theory.theory_report(density, code, rel_tol=rel_tol)
                dev, corr, p0 = paired_pass(density, code, n_samples, row_seed, threads)
                v_psi = estimate(dev, row_seed)
                v_corr = estimate(corr, row_seed, "rao_blackwell")
                rows.append(SweepRow(
                    sigma, code.n, code.m, rep.v_disturbed, v_psi.mean, v_psi.std_error,
                    rep.v_corrected, v_corr.mean, v_corr.std_error, rep.gap, rep.e_p0, float(np.mean(p0)),
                ))
            except (ArithmeticError, ValueError, RuntimeError) as exc:
                rows.append(SweepRow(sigma, code.n, code.m, status=f"error: {exc}"))
    return rows
