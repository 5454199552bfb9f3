import numpy as np
import pytest

from isoqec import experiments as ex
from isoqec.codes import CodeParams, embed_logical
from isoqec.distributions import build_sampler, normal_density
from isoqec.geometry import StateVector

CODE = CodeParams(3, 1)


@pytest.fixture(scope="module")
def sampler():
    return build_sampler(normal_density(0.6, CODE.d))


def test_chunk_layout():
    assert ex.chunk_layout(ex.CHUNK * 2 + 5) == [ex.CHUNK, ex.CHUNK, 5]
    assert ex.chunk_layout(ex.CHUNK) == [ex.CHUNK]


def test_results_do_not_depend_on_thread_count(sampler):
    a = ex.mc_variance_corrected(sampler, CODE, 50_000, seed=3, threads=1)
    b = ex.mc_variance_corrected(sampler, CODE, 50_000, seed=3, threads=4)
    assert a == b
    assert ex.mc_syndrome_frequencies(sampler, CODE, 40_000, 5, threads=1) == \
        ex.mc_syndrome_frequencies(sampler, CODE, 40_000, 5, threads=3)


def test_seeds_give_different_streams(sampler):
    assert ex.mc_variance_disturbed(sampler, 1000, 1).mean != ex.mc_variance_disturbed(sampler, 1000, 2).mean


def test_rao_blackwell_agrees_with_sampled_and_is_tighter(sampler):
    rb = ex.mc_variance_corrected(sampler, CODE, 100_000, seed=8, estimator="rao_blackwell")
    sm = ex.mc_variance_corrected(sampler, CODE, 100_000, seed=9, estimator="sampled")
    assert abs(rb.mean - sm.mean) <= 3 * np.hypot(rb.std_error, sm.std_error)
    assert rb.std_error <= sm.std_error
    assert rb.estimator == "rao_blackwell"


def test_unknown_estimator_rejected(sampler):
    with pytest.raises(ValueError):
        ex.mc_variance_corrected(sampler, CODE, 1000, 0, estimator="bogus")


def test_too_few_samples_rejected(sampler):
    with pytest.raises(ValueError):
        ex.mc_variance_disturbed(sampler, 10, 0)


def test_perfectly_correctable_source_has_zero_corrected_variance():
    # every sample is E_s|0> for a fixed s > 0, so correction restores |0> exactly
    psi = embed_logical(StateVector.basis(0, CODE.d_logical), 2, CODE).coords
    source = lambda rng, n: np.tile(psi, (n, 1))
    assert ex.mc_variance_corrected(source, CODE, 1000, 0).mean == 0.0
    assert ex.mc_variance_corrected(source, CODE, 1000, 0, estimator="sampled").mean == 0.0
    assert ex.mc_variance_disturbed(source, 1000, 0).mean == 2.0


def test_uniformity_test_reports_missing_syndrome():
    psi = embed_logical(StateVector.basis(0, CODE.d_logical), 1, CODE).coords
    source = lambda rng, n: np.tile(psi, (n, 1))
    with pytest.raises(ex.InsufficientSamples):
        ex.mc_uniformity_test(source, CODE, syndrome=3, n_samples=5000)
    with pytest.raises(ValueError):
        ex.mc_uniformity_test(source, CODE, syndrome=0, n_samples=5000)


def test_source_dimension_checked():
    with pytest.raises(ValueError):
        ex.mc_variance_corrected(build_sampler(normal_density(0.5, 4)), CODE, 1000, 0)


def test_branch_shares_add_up(sampler):
    total, shares = ex.mc_branch_contributions(sampler, CODE, 50_000, seed=4)
    assert sum(s.mean for s in shares) == pytest.approx(total.mean, rel=1e-12)
    rb = ex.mc_variance_corrected(sampler, CODE, 50_000, seed=5)
    assert abs(total.mean - rb.mean) <= 3 * np.hypot(total.std_error, rb.std_error)


def test_syndrome_frequencies_track_branch_probabilities(sampler):
    freq = ex.mc_syndrome_frequencies(sampler, CODE, 100_000, seed=6)
    probs = ex.mc_syndrome_probs(sampler, CODE, 100_000, seed=6)
    assert sum(f.mean for f in freq) == pytest.approx(1.0, abs=1e-12)
    for f, p in zip(freq, probs):
        assert abs(f.mean - p.mean) <= 3 * np.hypot(f.std_error, p.std_error)


def test_paired_gap_is_tighter_than_unpaired(sampler):
    gap = ex.mc_gap(sampler, CODE, 50_000, seed=2)
    v_psi = ex.mc_variance_disturbed(sampler, 50_000, seed=2)
    v_corr = ex.mc_variance_corrected(sampler, CODE, 50_000, seed=2)
    assert gap.mean == pytest.approx(v_corr.mean - v_psi.mean, abs=1e-12)
    assert gap.std_error < np.hypot(v_psi.std_error, v_corr.std_error)


def test_uniformity_histogram_option(sampler):
    rep = ex.mc_uniformity_test(sampler, CODE, 1, n_samples=100_000, seed=1, histogram=True)
    assert rep.histogram_pvalue is not None and 0.0 <= rep.histogram_pvalue <= 1.0
    assert rep.target2 == 0.25


def test_sweep_rows_and_error_capture():
    rows = ex.sweep([0.0, 0.5], [CodeParams(2, 1)], 2000, seed=0)
    assert [r.sigma for r in rows] == [0.0, 0.5]
    assert all(r.ok for r in rows)
    assert rows[0].gap_theory == 0.0 and rows[1].gap_theory > 0
    bad = ex.sweep([0.5], [CodeParams(2, 1)], 2000, seed=0, rel_tol=1e-30)
    assert not bad[0].ok and bad[0].status != "ok"
