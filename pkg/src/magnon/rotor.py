"""Delta-kicked rotor in its even (cosine) sector.

Basis states are |0> = 1/sqrt(2 pi) and |m> = cos(m theta)/sqrt(pi) for
m >= 1, so the rotor index m lines up with chain site m.  Keeping |0> in the
basis makes the truncated one-period matrices unitary and composable; chain
states only ever populate m >= 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import jv

from .chain import ExcitationState, Propagator

_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])
RESONANCE_HBAR = 4 * np.pi


def min_size(k: float) -> int:
    """Smallest truncation keeping Bessel tails of v(k) below 1e-14."""
    return int(np.ceil(8 * (abs(k) + 10)))


@dataclass(frozen=True)
class RotorParams:
    k: float
    hbar_eff: float = RESONANCE_HBAR
    n_tilde0: int = 0
    size: int | None = None

    def __post_init__(self):
        if self.size is None:
            object.__setattr__(self, "size", min_size(self.k))
        if self.size < min_size(self.k):
            raise ValueError(
                f"size={self.size} too small for k={self.k}; need >= {min_size(self.k)}"
            )
        if int(self.n_tilde0) != self.n_tilde0:
            raise ValueError("n_tilde0 must be an integer")


@dataclass(frozen=True, eq=False)
class RotorState:
    coefficients: np.ndarray  # index m = 0..size-1

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if abs(np.vdot(c, c).real - 1) > 1e-12:
            raise ValueError("rotor state is not normalized")
        object.__setattr__(self, "coefficients", c)

    @property
    def size(self) -> int:
        return self.coefficients.size

    @classmethod
    def from_chain(cls, state: ExcitationState, size: int) -> RotorState:
        """Embed chain site m as rotor level m."""
        if size <= state.N:
            raise ValueError(f"rotor size {size} must exceed chain length {state.N}")
        c = np.zeros(size, dtype=complex)
        c[1:state.N + 1] = state.amplitudes
        return cls(c)

    @classmethod
    def from_levels(cls, size: int, coefficients: dict[int, complex]) -> RotorState:
        c = np.zeros(size, dtype=complex)
        for m, a in coefficients.items():
            c[m] = a
        return cls(c / np.linalg.norm(c))


def _levels(size: int) -> np.ndarray:
    return np.arange(size)


def rotor_kick_u(hbar_eff: float, n_tilde0: int, size: int) -> np.ndarray:
    """Diagonal of u(hbar) = exp[-i (hbar/2) (n - n_tilde0)^2].

    Multiples of 2*pi in hbar are applied as exact signs.
    """
    if int(n_tilde0) != n_tilde0:
        raise ValueError("n_tilde0 must be an integer")
    k2 = (_levels(size) - int(n_tilde0)) ** 2
    q = int(round(hbar_eff / (2 * np.pi)))
    r = hbar_eff - 2 * np.pi * q
    sign = np.where((q * k2) % 2 == 0, 1.0, -1.0)
    return sign * np.exp(-0.5j * r * k2)


def rotor_free_v_exact(k: float, size: int) -> np.ndarray:
    """<m| exp(i k cos theta) |n> in the normalized cosine basis.

    For m, n >= 1 this is i^(m-n) J_(m-n)(k) + i^(m+n) J_(m+n)(k); rows and
    columns touching |0> carry an extra 1/sqrt(2).
    """
    m = _levels(size)
    d = np.subtract.outer(m, m)
    s = np.add.outer(m, m)
    V = _I_POWERS[d % 4] * jv(d, k) + _I_POWERS[s % 4] * jv(s, k)
    c = np.ones(size)
    c[0] = 1 / np.sqrt(2)
    return c[:, None] * V * c[None, :]


def resonance_propagator(k: float, size: int) -> np.ndarray:
    """One period at hbar_eff = 4 pi, where the free-rotation factor is trivial."""
    return rotor_free_v_exact(k, size)


def parity_identity_residual(k: float, size: int) -> float:
    """max |v(k) - u(2 pi) v(-k) u(2 pi)| with the parabola centred at 0."""
    u = rotor_kick_u(2 * np.pi, 0, size)
    lhs = rotor_free_v_exact(k, size)
    rhs = u[:, None] * rotor_free_v_exact(-k, size) * u[None, :]
    return float(np.abs(lhs - rhs).max())


def mapping_residual(chainV: Propagator | np.ndarray, rotorV: np.ndarray, bulk_window: tuple[int, int]) -> float:
    """Largest chain/rotor propagator mismatch over sites lo..hi (inclusive)."""
    P = chainV.matrix if isinstance(chainV, Propagator) else np.asarray(chainV)
    lo, hi = bulk_window
    if not (1 <= lo <= hi <= P.shape[0]) or hi >= rotorV.shape[0]:
        raise ValueError(f"window {bulk_window} outside chain ({P.shape[0]}) or rotor ({rotorV.shape[0]})")
    chain_block = P[lo - 1:hi, lo - 1:hi]
    rotor_block = rotorV[lo:hi + 1, lo:hi + 1]
    return float(np.abs(chain_block - rotor_block).max())


class Trajectory(NamedTuple):
    theta: np.ndarray
    p: np.ndarray


def classical_standard_map(K_cl: float, theta0, p0, steps: int) -> Trajectory:
    """Iterate p <- p + K sin(theta), theta <- theta + p (mod 2 pi).

    ``theta0``/``p0`` may be arrays of initial conditions; the returned arrays
    have a leading axis of length steps + 1.
    """
    theta = np.asarray(theta0, dtype=float) % (2 * np.pi)
    p = np.asarray(p0, dtype=float) * np.ones_like(theta)
    thetas = np.empty((steps + 1,) + theta.shape)
    ps = np.empty_like(thetas)
    thetas[0], ps[0] = theta, p
    for j in range(1, steps + 1):
        p = p + K_cl * np.sin(theta)
        theta = (theta + p) % (2 * np.pi)
        thetas[j], ps[j] = theta, p
    return Trajectory(thetas, ps)


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    """Single-orbit export with columns step,theta,p."""
    path = Path(path)
    if traj.theta.ndim != 1:
        raise ValueError("CSV export takes a single trajectory")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "theta", "p"])
        for j, (th, p) in enumerate(zip(traj.theta, traj.p)):
            w.writerow([j, f"{th:.17e}", f"{p:.17e}"])
    return path


def rechester_white_rate(K_cl: float) -> float:
    """Momentum diffusion per step of the chaotic standard map.

    Quasilinear K^2/2 with the leading Bessel correlation corrections.
    """
    J1, J2, J3 = jv(1, K_cl), jv(2, K_cl), jv(3, K_cl)
    return 0.5 * K_cl ** 2 * (1 - 2 * J2 - 2 * J1 ** 2 + 2 * J2 ** 2 + 2 * J3 ** 2)
