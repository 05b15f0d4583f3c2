"""Few-spin encoding states that extremize the resonant diffusion rate.

The diffusion operator is A sin^2(theta) in the rotor picture.  In the cosine
basis sin^2 = 1/2 - cos(2 theta)/2 is tridiagonal with step 2 in m, which is
what ``diffusion_matrix`` builds on the chosen sites.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chain import ChainConfig, ExcitationState, build_single_excitation_hamiltonian, free_propagator
from .rotor import RESONANCE_HBAR, RotorState, resonance_propagator

MIN_SITE = 3
DEGENERACY_GAP = 1e-12
DEFAULT_OFFSETS = (-4, -2, 0, 2, 4)


@dataclass(frozen=True)
class EncodingSubspace:
    m0: int
    N: int
    offsets: tuple[int, ...] = DEFAULT_OFFSETS

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        if not offs:
            raise ValueError("offsets must be non-empty")
        if any(o % 2 for o in offs):
            raise ValueError(f"offsets must be even, got {offs}")
        if list(offs) != sorted(set(offs)):
            raise ValueError(f"offsets must be sorted and distinct, got {offs}")
        object.__setattr__(self, "offsets", offs)
        if self.m0 + offs[0] < MIN_SITE:
            raise ValueError(
                f"lowest encoding site {self.m0 + offs[0]} violates the m >= {MIN_SITE} guard"
            )
        if self.m0 + offs[-1] > self.N - 2:
            raise ValueError(
                f"highest encoding site {self.m0 + offs[-1]} exceeds N - 2 = {self.N - 2}"
            )

    @property
    def sites(self) -> list[int]:
        return [self.m0 + o for o in self.offsets]


def diffusion_matrix(subspace: EncodingSubspace, A: float = 1.0) -> np.ndarray:
    sites = np.array(subspace.sites)
    if sites.min() < MIN_SITE:
        raise ValueError(f"sites below m = {MIN_SITE} couple to |0>")
    gap = np.abs(np.subtract.outer(sites, sites))
    D = np.where(gap == 0, 0.5, 0.0) + np.where(gap == 2, -0.25, 0.0)
    return A * D


def _extremal_state(subspace: EncodingSubspace, largest: bool) -> tuple[ExcitationState, float]:
    D = diffusion_matrix(subspace)
    w, v = np.linalg.eigh(D)
    pick = -1 if largest else 0
    if w.size > 1:
        neighbour = -2 if largest else 1
        if abs(w[pick] - w[neighbour]) < DEGENERACY_GAP:
            raise ValueError("extremal diffusion eigenvalue is degenerate; no unique encoding")
    vec = v[:, pick]
    # fix sign: coefficient nearest m0 is positive
    order = np.argsort([abs(o) for o in subspace.offsets], kind="stable")
    lead = next(i for i in order if abs(vec[i]) > 1e-8)
    vec = vec * np.sign(vec[lead])
    state = ExcitationState.from_sites(subspace.N, dict(zip(subspace.sites, vec)))
    return state, float(w[pick])


def max_diffusion_state(subspace: EncodingSubspace) -> ExcitationState:
    return _extremal_state(subspace, largest=True)[0]


def min_diffusion_state(subspace: EncodingSubspace) -> ExcitationState:
    return _extremal_state(subspace, largest=False)[0]


def diffusion_eigenvalue(subspace: EncodingSubspace, largest: bool = True) -> float:
    return _extremal_state(subspace, largest)[1]


def coefficients(state: ExcitationState, subspace: EncodingSubspace) -> dict[int, float]:
    """beta_{offset} table of an encoding state, keyed by offset."""
    return {o: state[subspace.m0 + o].real for o in subspace.offsets}


def sin2_matrix(size: int) -> np.ndarray:
    """sin^2(theta) in the normalized cosine basis, including |0> and |1>."""
    D = np.zeros((size, size))
    m = np.arange(size)
    D[m, m] = 0.5
    D[1, 1] = 0.25  # cos(m+n)theta term survives for m = n = 1
    off = m[:-2]
    D[off, off + 2] = D[off + 2, off] = -0.25
    D[0, 2] = D[2, 0] = -0.25 * np.sqrt(2)
    return D


def expected_diffusion_rate(state: RotorState, k: float, hbar_eff: float = RESONANCE_HBAR) -> float:
    """<state| A sin^2(theta) |state> with A = hbar^2 k^2 / 2."""
    c = state.coefficients
    A = 0.5 * hbar_eff ** 2 * k ** 2
    return float(A * np.vdot(c, sin2_matrix(c.size) @ c).real)


def measured_diffusion_rate(
    state: RotorState,
    k: float,
    steps: int,
    hbar_eff: float = RESONANCE_HBAR,
    edge_tol: float = 1e-12,
) -> float:
    """Fit E(t) = <(hbar m)^2 / 2> to a + b t^2 over resonant kicks; return b."""
    size = state.size
    v = resonance_propagator(k, size)
    E = 0.5 * (hbar_eff * np.arange(size)) ** 2
    c = state.coefficients
    energies = [float(np.vdot(c, E * c).real)]
    for _ in range(steps):
        c = v @ c
        if float(np.sum(np.abs(c[-16:]) ** 2)) > edge_tol:
            raise RuntimeError("wavefunction reached the rotor truncation edge; increase size")
        energies.append(float(np.vdot(c, E * c).real))
    t = np.arange(steps + 1, dtype=float)
    design = np.column_stack([np.ones_like(t), t ** 2])
    (_, b), *_ = np.linalg.lstsq(design, np.array(energies), rcond=None)
    return float(b)


def generate_packet_pair(
    cfg: ChainConfig,
    subspace: EncodingSubspace,
    t1: float,
    allow_reflection: bool = False,
    margin: int = 10,
) -> ExcitationState:
    """Freely evolve the max-diffusion encoding for time t1 (physical units)."""
    if subspace.N != cfg.N:
        raise ValueError("subspace and chain disagree on N")
    psi0 = max_diffusion_state(subspace)
    if t1 == 0:
        return psi0
    H = build_single_excitation_hamiltonian(cfg)
    psi = free_propagator(H, t1) @ psi0
    edge = np.abs(psi.amplitudes[:margin]) ** 2
    edge = float(edge.sum() + np.sum(np.abs(psi.amplitudes[-margin:]) ** 2))
    if edge > 1e-6 and not allow_reflection:
        warnings.warn(
            f"{edge:.2e} of the probability lies within {margin} sites of a chain end",
            RuntimeWarning,
            stacklevel=2,
        )
    return psi
