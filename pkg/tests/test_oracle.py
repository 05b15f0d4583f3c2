import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnon.chain import ChainConfig, ExcitationState, align_global_phase
from magnon.control import KickSchedule, run_schedule
from magnon.experiments import free_evolve
from magnon.oracle import (
    brute_force_evolve,
    brute_force_run_schedule,
    embed,
    full_hamiltonian,
    project,
    sector_indices,
)


def random_state(N, rng):
    return ExcitationState.from_amplitudes(rng.normal(size=N) + 1j * rng.normal(size=N))


def deviation(a, b):
    return float(np.abs(a.amplitudes - align_global_phase(a.amplitudes, b.amplitudes)).max())


def test_sector_indices_single_up_spin():
    idx = sector_indices(4)
    assert list(idx) == [8, 4, 2, 1]
    assert all(bin(i).count("1") == 1 for i in idx)


def test_hamiltonian_hermitian_and_conserves_magnetization():
    H = full_hamiltonian(5, 1.0, 0.2).toarray()
    assert np.allclose(H, H.conj().T)
    pop = np.array([bin(i).count("1") for i in range(32)])
    off = H[np.not_equal.outer(pop, pop)]
    assert np.all(off == 0)


def test_embed_project_roundtrip():
    rng = np.random.default_rng(3)
    s = random_state(6, rng)
    out, leak = project(embed(s), 6)
    assert leak == 0
    assert np.abs(out.amplitudes - s.amplitudes).max() < 1e-15


def test_size_guard():
    with pytest.raises(ValueError):
        brute_force_evolve(13, 1.0, 0.1, ExcitationState.basis(13, 1))


@pytest.mark.parametrize("N", [2, 8, 10])
def test_free_evolution_agrees(N):
    rng = np.random.default_rng(N)
    cfg = ChainConfig(N=N)
    s = random_state(N, rng)
    out, leak = brute_force_evolve(N, 1.0, cfg.time(3.0), s, return_leakage=True)
    assert leak < 1e-12
    assert deviation(free_evolve(cfg, s, 3.0), out) < 1e-10


def test_field_changes_only_global_phase():
    rng = np.random.default_rng(11)
    s = random_state(7, rng)
    a = brute_force_evolve(7, 1.0, 1.3, s, B=0.0)
    b = brute_force_evolve(7, 1.0, 1.3, s, B=0.8)
    assert deviation(a, b) < 1e-12
    assert abs(np.vdot(a.amplitudes, b.amplitudes)) > 1 - 1e-12


@settings(max_examples=12, deadline=None)
@given(
    N=st.sampled_from([8, 10]),
    entries=st.lists(st.floats(-2 * np.pi, 4 * np.pi, allow_nan=False), min_size=1, max_size=20),
    n0=st.integers(1, 8),
    convention=st.sampled_from(["kick-then-free", "symmetric-half-step"]),
    seed=st.integers(0, 2**16),
)
def test_random_schedules_agree(N, entries, n0, convention, seed):
    cfg = ChainConfig(N=N, n0=n0)
    s = random_state(N, np.random.default_rng(seed))
    sched = KickSchedule(tuple(entries), convention=convention)
    fast, _ = run_schedule(s, cfg, sched)
    slow = brute_force_run_schedule(cfg, s, sched.entries, convention)
    assert deviation(fast, slow) < 1e-10
