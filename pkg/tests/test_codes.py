import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoqec import codes
from isoqec.codes import CodeParams
from isoqec.experiments import rb_corrected_deviation
from isoqec.geometry import StateVector, coords_to_angles

from conftest import random_states

CODES = [CodeParams(2, 1), CodeParams(3, 1), CodeParams(3, 2), CodeParams(4, 2)]


def test_dimensions():
    c = CodeParams(4, 1)
    assert (c.d, c.d_logical, c.d_syndrome) == (16, 2, 8)
    assert c.block(3) == slice(12, 16)
    with pytest.raises(ValueError):
        c.block(8)


@pytest.mark.parametrize("text", ["5,5", "2,3", "0,0", "3", "a,b", "3,1,1"])
def test_parse_rejects_bad_specs(text):
    with pytest.raises(ValueError):
        CodeParams.parse(text)


def test_trivial_code_needs_opt_in():
    with pytest.raises(ValueError):
        CodeParams(2, 2)
    assert CodeParams(2, 2, allow_trivial=True).d_syndrome == 1


@pytest.mark.parametrize("code", CODES, ids=str)
def test_syndrome_probabilities_form_a_simplex(code, rng):
    p = codes.branch_probabilities(random_states(rng, 10_000, code.d), code)
    assert np.all(p >= 0)
    assert np.max(np.abs(p.sum(axis=1) - 1.0)) <= 1e-12


@pytest.mark.parametrize("code", CODES, ids=str)
def test_no_error_probability_from_angles(code, rng):
    # P_0 = 1 - prod_{j < 2d'} sin^2 theta_j in hyperspherical angles
    x = random_states(rng, 10_000, code.d)
    theta = coords_to_angles(x)
    expected = 1.0 - np.prod(np.sin(theta[:, : 2 * code.d_logical]) ** 2, axis=1)
    p0 = codes.branch_probabilities(x, code)[:, 0]
    assert np.max(np.abs(p0 - expected)) <= 1e-10


@pytest.mark.parametrize("code", CODES, ids=str)
def test_branch_deviation_identity(code, rng):
    # P_s ||Phi - corrected_s||^2 = 2 P_s - 2 x_{s,0} sqrt(P_s), summed over branches
    x = random_states(rng, 10_000, code.d)
    direct = np.zeros(x.shape[0])
    for i in range(x.shape[0]):
        for out in codes.correct_all_branches(StateVector(x[i]), code):
            if not out.empty:
                direct[i] += out.probability * (2.0 - 2.0 * out.corrected.coords[0])
    assert np.max(np.abs(direct - rb_corrected_deviation(x, code))) <= 1e-10


@given(st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_embedded_logical_state_is_recovered(s, seed):
    code = CodeParams(3, 1)
    rng = np.random.default_rng(seed)
    logical = StateVector(random_states(rng, 1, code.d_logical)[0])
    psi = codes.embed_logical(logical, s, code)
    probs = codes.syndrome_probabilities(psi, code)
    assert probs[s] == pytest.approx(1.0, abs=1e-14)
    out = codes.measure_and_correct(psi, code, rng)
    assert out.syndrome == s
    np.testing.assert_allclose(out.corrected.coords, logical.coords, atol=1e-14)


def test_zero_probability_branches_are_empty():
    code = CodeParams(2, 1)
    out = codes.correct_all_branches(StateVector.basis(0, 4), code)
    assert not out[0].empty and out[1].empty and out[1].probability == 0.0


def test_embed_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        codes.embed_logical(StateVector.basis(0, 4), 0, CodeParams(3, 1))


def test_measurement_follows_born_rule(rng):
    code = CodeParams(3, 1)
    x = np.zeros(16)
    x[0], x[4], x[13] = np.sqrt([0.5, 0.3, 0.2])
    psi = StateVector(x)
    n = 20_000
    counts = np.bincount([codes.measure_and_correct(psi, code, rng).syndrome for _ in range(n)], minlength=4)
    freq = counts / n
    expected = np.array([0.5, 0.3, 0.0, 0.2])
    se = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(freq - expected) <= 4 * se + 1e-12)
    assert counts[2] == 0


def test_draw_syndromes_never_picks_empty_rows():
    probs = np.tile([0.0, 1.0, 0.0], (1000, 1))
    assert np.all(codes.draw_syndromes(probs, np.random.default_rng(1)) == 1)
