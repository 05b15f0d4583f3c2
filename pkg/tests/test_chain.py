import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from magnon.chain import (
    ChainConfig,
    ExcitationState,
    Propagator,
    align_global_phase,
    apply_step,
    bessel_kernel,
    build_single_excitation_hamiltonian,
    free_propagator,
    kick_operator,
    kick_phases,
    load_snapshot,
    save_snapshot,
    spectral_decomposition,
)
from magnon.oracle import full_hamiltonian, sector_indices


def projected(N, J=1.0, B=0.0):
    Hf = full_hamiltonian(N, J, B).toarray()
    idx = sector_indices(N)
    return Hf[np.ix_(idx, idx)]


@pytest.mark.parametrize("N", [2, 3, 4, 7])
@pytest.mark.parametrize("J", [1.0, 0.7])
def test_hamiltonian_matches_projected_pauli_sum(N, J):
    H = build_single_excitation_hamiltonian(ChainConfig(N=N, J=J))
    const = sum(H.dropped_constants.values())
    assert np.allclose(H.matrix + const * np.eye(N), projected(N, J), atol=1e-13)


def test_hamiltonian_n4_entries():
    H = build_single_excitation_hamiltonian(ChainConfig(N=4)).matrix
    expected = np.array([[-1, -1, 0, 0], [-1, 0, -1, 0], [0, -1, 0, -1], [0, 0, -1, -1]], float)
    assert np.array_equal(H, expected)


def test_field_only_shifts_constant():
    cfg = ChainConfig(N=5, B=0.3)
    H = build_single_excitation_hamiltonian(cfg)
    H0 = build_single_excitation_hamiltonian(ChainConfig(N=5))
    assert np.array_equal(H.matrix, H0.matrix)
    shift = np.diag(projected(5, 1.0, 0.3) - projected(5, 1.0, 0.0))
    assert np.allclose(shift, shift[0])


def test_uncoupled_chain_is_zero_and_identity():
    cfg = ChainConfig(N=6, J=0.0)
    H = build_single_excitation_hamiltonian(cfg)
    assert not H.matrix.any()
    assert np.allclose(free_propagator(H, 3.0).matrix, np.eye(6))
    with pytest.raises(ValueError):
        cfg.time(1.0)


@pytest.mark.parametrize("N", [2, 5, 30, 201])
def test_spectrum_matches_cosine_basis(N):
    H = build_single_excitation_hamiltonian(ChainConfig(N=N))
    sd = spectral_decomposition(H)
    q = np.pi * np.arange(N) / N
    assert np.allclose(np.sort(sd.eigenvalues), np.sort(-2 * np.cos(q)), atol=1e-12)
    m = np.arange(1, N + 1)
    for j in (0, 1, N // 2, N - 1):
        vec = np.cos(q[j] * (m - 0.5))
        vec /= np.linalg.norm(vec)
        assert np.allclose(H.matrix @ vec, -2 * np.cos(q[j]) * vec, atol=1e-12)
    assert sd.orthonormality_error() < 1e-12
    assert sd.reconstruction_error(H.matrix) < 1e-12


def test_free_propagator_unitary_and_semigroup():
    cfg = ChainConfig(N=40)
    H = build_single_excitation_hamiltonian(cfg)
    V1 = free_propagator(H, 0.3)
    V2 = free_propagator(H, 0.6)
    assert V1.unitarity_error() < 1e-12
    assert np.abs((V1 @ V1).matrix - V2.matrix).max() < 1e-12
    assert np.allclose(free_propagator(H, 0.0).matrix, np.eye(40))


def test_free_propagator_bulk_diagonal_is_bessel_j0():
    cfg = ChainConfig(N=201)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    assert abs(V.matrix[100, 100] - jv(0, 0.25)) < 1e-12
    assert abs(V.matrix[100, 100] - 0.98444) < 1e-5


def test_bessel_kernel_entries():
    K = bessel_kernel(201, 0.25)
    assert K.kind == "bessel-approx"
    assert abs(K.matrix[100, 101] - 1j * jv(1, 0.25)) < 1e-15
    assert abs(K.matrix[100, 101] - 0.12402j) < 1e-5
    assert abs(K.matrix[101, 100] - 1j * jv(1, 0.25)) < 1e-15  # i^{-1} J_{-1} = i J_1


def test_bessel_kernel_matches_bulk(golden_dir):
    bound = json.loads((golden_dir / "thresholds.json").read_text())["thresholds"]["bessel_bulk_deviation"]["bound"]
    cfg = ChainConfig(N=201)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0).matrix
    K = bessel_kernel(201, 0.25).matrix
    blk = slice(50, 151)
    assert np.abs(V[blk, blk] - K[blk, blk]).max() <= bound


def test_kick_phases_examples():
    cfg = ChainConfig(N=201)
    U0 = kick_operator(0.0, cfg)
    assert np.array_equal(U0.matrix, np.eye(201))
    stag = kick_phases(2 * np.pi, 101, 201)
    n = np.arange(1, 202)
    assert np.array_equal(stag, (-1.0) ** (n - 101))
    assert np.array_equal(kick_phases(4 * np.pi, 101, 201), np.ones(201))
    p = kick_phases(0.5, 101, 201)
    assert abs(p[100] - 1) == 0
    assert abs(p[101] - np.exp(-0.25j)) < 1e-15


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_kick_additivity(a, b):
    pa, pb, pab = kick_phases(a, 5, 11), kick_phases(b, 5, 11), kick_phases(a + b, 5, 11)
    assert np.abs(pa * pb - pab).max() < 1e-9


def test_kick_window_restricts_support():
    p = kick_phases(0.7, 10, 20, window=(5, 15))
    n = np.arange(1, 21)
    outside = (n < 5) | (n > 15)
    assert np.all(p[outside] == 1)
    assert np.allclose(p[~outside], np.exp(-0.35j * (n[~outside] - 10) ** 2))


def test_apply_step_is_kick_then_free():
    cfg = ChainConfig(N=12)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    U = kick_operator(0.5, cfg)
    psi = ExcitationState.basis(12, 4)
    out = apply_step(psi, V, U)
    assert np.allclose(out.amplitudes, V.matrix @ (U.matrix @ psi.amplitudes))
    with pytest.raises(ValueError):
        apply_step(ExcitationState.basis(11, 4), V, U)


def test_norm_conserved_over_many_steps():
    cfg = ChainConfig(N=101)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    U = kick_operator(0.5, cfg)
    psi = ExcitationState.basis(101, 51)
    for _ in range(1000):
        psi = apply_step(psi, V, U)
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-12


def test_state_validation():
    with pytest.raises(ValueError):
        ExcitationState(np.array([1.0, 1.0]))
    s = ExcitationState.from_amplitudes([3, 4j])
    assert abs(s.norm - 1) < 1e-15
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0
    with pytest.raises(ValueError):
        ChainConfig(N=10, n0=2.5)
    with pytest.raises(ValueError):
        ChainConfig(N=1)
    with pytest.raises(ValueError):
        Propagator(np.ones((2, 3)), "product")


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    s = ExcitationState.from_amplitudes(rng.normal(size=9) + 1j * rng.normal(size=9))
    path = save_snapshot(s, tmp_path / "s.json")
    assert np.array_equal(load_snapshot(path).amplitudes, s.amplitudes)
    doc = json.loads(path.read_text())
    doc["N"] = 8
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_snapshot(path)


def test_align_global_phase():
    a = np.array([1, 1j, 0.5]) / np.sqrt(2.25)
    b = np.exp(1.3j) * a
    assert np.allclose(align_global_phase(a, b), a, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 0.1),
       st.lists(st.floats(-2, 2), min_size=0, max_size=6))
def test_reflection_symmetry(half, kicks):
    N, m0 = 41, 21
    amps = np.zeros(N, complex)
    amps[m0 - 1] = 0.3
    for i, a in enumerate(half, start=1):
        amps[m0 - 1 - i] = amps[m0 - 1 + i] = a
    psi = ExcitationState.from_amplitudes(amps)
    cfg = ChainConfig(N=N, n0=m0)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    for C in kicks:
        psi = apply_step(psi, V, kick_operator(C, cfg))
    psi = free_propagator(build_single_excitation_hamiltonian(cfg), 2.3) @ psi
    p = np.abs(psi.amplitudes) ** 2
    assert np.abs(p - p[::-1]).max() < 1e-12


def worst_light_cone_leakage(duration, N=201, m0=101):
    """Largest probability outside the cone over all states on m0 +- 4."""
    cfg = ChainConfig(N=N)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.time(duration)).matrix
    d = np.abs(np.arange(1, N + 1) - m0)
    block = V[np.ix_(d > 4 + math.ceil(duration) + 5, d <= 4)]
    return np.linalg.norm(block, 2) ** 2


@pytest.mark.parametrize("duration", [1.0, 3.0, 5.0, 7.0])
def test_light_cone(duration):
    assert worst_light_cone_leakage(duration) <= 1e-6


@pytest.mark.parametrize("duration", [10.0, 15.0])
def test_light_cone_fixed_margin_breaks_at_long_times(duration):
    # the Bessel front widens like (2Jt)^(1/3), so a fixed 5-site margin
    # eventually lets more than 1e-6 through
    assert worst_light_cone_leakage(duration) > 1e-6
