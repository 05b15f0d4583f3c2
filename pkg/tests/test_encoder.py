import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from magnon.analysis import inverse_participation_ratio, probability_profile
from magnon.chain import ChainConfig
from magnon.encoder import (
    EncodingSubspace,
    coefficients,
    diffusion_eigenvalue,
    diffusion_matrix,
    expected_diffusion_rate,
    generate_packet_pair,
    max_diffusion_state,
    measured_diffusion_rate,
    min_diffusion_state,
    sin2_matrix,
)
from magnon.rotor import RESONANCE_HBAR, RotorState

SUB = EncodingSubspace(101, 201)
R3 = np.sqrt(3)


def test_five_state_coefficients():
    beta = coefficients(max_diffusion_state(SUB), SUB)
    printed = {0: 0.577, 2: -0.5, -2: -0.5, 4: 0.289, -4: 0.289}
    closed = {0: 1 / R3, 2: -0.5, -2: -0.5, 4: 1 / (2 * R3), -4: 1 / (2 * R3)}
    for o in SUB.offsets:
        assert abs(beta[o] - printed[o]) < 1e-3
        assert abs(beta[o] - closed[o]) < 1e-12


def test_three_state_case():
    sub = EncodingSubspace(101, 201, (-2, 0, 2))
    beta = coefficients(max_diffusion_state(sub), sub)
    assert beta[0] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert beta[2] == pytest.approx(-0.5, abs=1e-12)


def test_min_state_and_orthogonality():
    lo = min_diffusion_state(SUB)
    hi = max_diffusion_state(SUB)
    b = coefficients(lo, SUB)
    expected = np.sin(np.arange(1, 6) * np.pi / 6)
    expected /= np.linalg.norm(expected)
    assert np.allclose([b[o] for o in SUB.offsets], expected, atol=1e-12)
    assert abs(np.vdot(lo.amplitudes, hi.amplitudes)) < 1e-12


def test_spectrum_closed_form():
    w = np.linalg.eigvalsh(diffusion_matrix(SUB))
    j = np.arange(1, 6)
    assert np.allclose(np.sort(w), np.sort(0.5 - 0.5 * np.cos(j * np.pi / 6)), atol=1e-14)
    ratio = diffusion_eigenvalue(SUB) / diffusion_eigenvalue(SUB, largest=False)
    assert ratio == pytest.approx((0.5 + R3 / 4) / (0.5 - R3 / 4), rel=1e-12)


@given(st.floats(0.1, 50))
def test_eigenvectors_independent_of_scale(A):
    D = diffusion_matrix(SUB, A)
    w, v = np.linalg.eigh(D)
    top = v[:, -1] * np.sign(v[2, -1])
    b = coefficients(max_diffusion_state(SUB), SUB)
    assert np.allclose(top, [b[o] for o in SUB.offsets], atol=1e-10)


def test_identity_shift_does_not_change_state():
    D = diffusion_matrix(SUB) + 3 * np.eye(5)
    v = np.linalg.eigh(D)[1][:, -1]
    b = coefficients(max_diffusion_state(SUB), SUB)
    assert abs(abs(np.dot(v, [b[o] for o in SUB.offsets])) - 1) < 1e-12


def test_guards():
    with pytest.raises(ValueError, match="m >= 3"):
        EncodingSubspace(4, 201)
    with pytest.raises(ValueError):
        EncodingSubspace(199, 201)
    with pytest.raises(ValueError):
        EncodingSubspace(50, 201, (-1, 0, 1))
    with pytest.raises(ValueError):
        EncodingSubspace(50, 201, (2, 0))


def test_single_site_is_degenerate_free():
    sub = EncodingSubspace(50, 201, (0,))
    assert coefficients(max_diffusion_state(sub), sub) == {0: 1.0}


def test_degenerate_spectrum_rejected():
    # two disconnected sites share the same diagonal entry
    sub = EncodingSubspace(50, 201, (0, 4))
    with pytest.raises(ValueError, match="degenerate"):
        max_diffusion_state(sub)


def test_sin2_matrix_against_quadrature():
    size = 6
    D = sin2_matrix(size)

    def basis(m, th):
        return 1 / np.sqrt(2 * np.pi) if m == 0 else np.cos(m * th) / np.sqrt(np.pi)

    for m in range(size):
        for n in range(size):
            val = quad(lambda th: basis(m, th) * np.sin(th) ** 2 * basis(n, th), 0, 2 * np.pi)[0]
            assert abs(D[m, n] - val) < 1e-12


@pytest.mark.parametrize("make", [max_diffusion_state, min_diffusion_state])
def test_measured_rate_matches_expectation(make):
    sub = EncodingSubspace(40, 254)
    rs = RotorState.from_chain(make(sub), 256)
    b = measured_diffusion_rate(rs, 0.25, 60)
    assert abs(b / expected_diffusion_rate(rs, 0.25) - 1) <= 0.02


def test_expected_rate_scaling():
    rs = RotorState.from_chain(max_diffusion_state(EncodingSubspace(40, 254)), 256)
    e = expected_diffusion_rate(rs, 0.25)
    assert e == pytest.approx(0.5 * RESONANCE_HBAR ** 2 * 0.25 ** 2 * diffusion_eigenvalue(SUB), rel=1e-12)


def test_measured_rate_detects_truncation_edge():
    rs = RotorState.from_levels(40, {30: 1.0})
    with pytest.raises(RuntimeError):
        measured_diffusion_rate(rs, 5.0, 60)


def test_generate_packet_pair():
    cfg = ChainConfig(N=201)
    assert np.array_equal(generate_packet_pair(cfg, SUB, 0.0).amplitudes, max_diffusion_state(SUB).amplitudes)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        psi = generate_packet_pair(cfg, SUB, cfg.time(15.0))
    p = probability_profile(psi).probabilities
    assert np.abs(p - p[::-1]).max() < 1e-12
    with pytest.warns(RuntimeWarning):
        generate_packet_pair(cfg, EncodingSubspace(30, 201), cfg.time(30.0))


def test_max_state_spreads_less_than_single_site():
    cfg = ChainConfig(N=201)
    psi = generate_packet_pair(cfg, SUB, cfg.time(15.0))
    single = generate_packet_pair(cfg, EncodingSubspace(101, 201, (0,)), cfg.time(15.0))
    ipr_pair = inverse_participation_ratio(probability_profile(psi))
    ipr_single = inverse_participation_ratio(probability_profile(single))
    assert ipr_pair > ipr_single
