"""Open Heisenberg chain restricted to one flipped spin.

Sites are 1-based in every public signature; arrays are 0-based internally,
so site ``m`` lives at index ``m - 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

UNITARITY_TOL = 1e-12
NORM_TOL = 1e-12
SNAPSHOT_VERSION = 1

# i**l for l mod 4, kept exact
_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


class InvariantAlarm(RuntimeError):
    """A conserved quantity drifted beyond its tolerance during a run."""


@dataclass(frozen=True)
class ChainConfig:
    N: int
    J: float = 1.0
    T0: float = 0.125
    n0: int | None = None
    B: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if self.n0 is None:
            object.__setattr__(self, "n0", (self.N + 1) // 2)
        if int(self.n0) != self.n0:
            raise ValueError(f"n0 must be an integer site, got {self.n0}")
        if not 1 <= self.n0 <= self.N:
            raise ValueError(f"n0={self.n0} outside [1, {self.N}]")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "n0", int(self.n0))

    @property
    def kick_strength(self) -> float:
        """Dimensionless 2*J*T0, the Bessel argument of one free period."""
        return 2.0 * self.J * self.T0

    def time(self, scaled: float) -> float:
        """Convert a dimensionless 2Jt value into physical time t."""
        if self.J == 0:
            raise ValueError("2Jt is undefined for an uncoupled chain (J = 0)")
        return scaled / (2.0 * self.J)

    def to_dict(self) -> dict:
        return {"N": self.N, "J": self.J, "T0": self.T0, "n0": self.n0, "B": self.B}


@dataclass(frozen=True, eq=False)  # array fields: compare explicitly
class ExcitationState:
    """Normalized amplitudes a_m = <m|psi> over sites m = 1..N."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("amplitudes must be a 1-D vector of length >= 2")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: sum |a|^2 = {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> ExcitationState:
        a = np.asarray(amplitudes, dtype=complex)
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(a)

    @classmethod
    def basis(cls, N: int, m: int) -> ExcitationState:
        if not 1 <= m <= N:
            raise ValueError(f"site {m} outside [1, {N}]")
        a = np.zeros(N, dtype=complex)
        a[m - 1] = 1.0
        return cls(a)

    @classmethod
    def from_sites(cls, N: int, coefficients: dict[int, complex]) -> ExcitationState:
        a = np.zeros(N, dtype=complex)
        for m, c in coefficients.items():
            if not 1 <= m <= N:
                raise ValueError(f"site {m} outside [1, {N}]")
            a[m - 1] = c
        return cls.from_amplitudes(a)

    @property
    def N(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __getitem__(self, m: int) -> complex:
        return complex(self.amplitudes[m - 1])


@dataclass(frozen=True, eq=False)
class Propagator:
    matrix: np.ndarray
    kind: str  # free-step | kick | product | bessel-approx

    KINDS = ("free-step", "kick", "product", "bessel-approx")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown propagator kind {self.kind!r}")
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("propagator must be a square matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    def unitarity_error(self) -> float:
        P = self.matrix
        return float(np.abs(P.conj().T @ P - np.eye(self.N)).max())

    def __matmul__(self, other):
        if isinstance(other, Propagator):
            _check_dims(self.N, other.N)
            return Propagator(self.matrix @ other.matrix, "product")
        if isinstance(other, ExcitationState):
            _check_dims(self.N, other.N)
            return ExcitationState(self.matrix @ other.amplitudes)
        return NotImplemented


def _polish_unitary(U: np.ndarray, iterations: int = 2) -> np.ndarray:
    """Newton-Schulz steps toward the nearest unitary, in extended precision.

    The eigenvector error leaves a systematic ~1e-15 non-unitarity that adds
    up over thousands of steps; two iterations remove it to rounding level.
    """
    X = U.astype(np.clongdouble)
    eye = np.eye(U.shape[0])
    for _ in range(iterations):
        X = X @ (3 * eye - X.conj().T @ X) / 2
    return X.astype(complex)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def propagator_matrix(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return _polish_unitary((v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T)

    def reconstruction_error(self, H: np.ndarray) -> float:
        v = self.eigenvectors
        return float(np.abs((v * self.eigenvalues) @ v.conj().T - H).max())

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())


@dataclass(frozen=True, eq=False)
class ChainHamiltonian:
    """Single-excitation block H1 with the sector constants it omits.

    ``dropped_constants`` maps term name to the energy offset removed from
    every diagonal entry; adding them back gives the exact sector block.
    """

    matrix: np.ndarray
    config: ChainConfig
    dropped_constants: dict = field(default_factory=dict)

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        H = self.matrix
        w, v = eigh_tridiagonal(np.diag(H).copy(), np.diag(H, 1).copy())
        return SpectralDecomposition(w, v)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


def build_single_excitation_hamiltonian(cfg: ChainConfig) -> ChainHamiltonian:
    N, J = cfg.N, cfg.J
    H = np.zeros((N, N))
    idx = np.arange(N - 1)
    H[idx, idx + 1] = H[idx + 1, idx] = -J
    # a flipped spin at an end breaks one bond instead of two
    H[0, 0] += -J
    H[-1, -1] += -J
    dropped = {"zz": -J * (N - 5) / 2.0, "field": -cfg.B * (2 - N)}
    H.setflags(write=False)
    return ChainHamiltonian(H, cfg, dropped)


def spectral_decomposition(H: ChainHamiltonian | np.ndarray) -> SpectralDecomposition:
    if isinstance(H, ChainHamiltonian):
        return H.spectrum
    w, v = np.linalg.eigh(np.asarray(H))
    return SpectralDecomposition(w, v)


def free_propagator(H1: ChainHamiltonian | np.ndarray, t: float) -> Propagator:
    """exp(-i H1 t) with hbar = 1."""
    return Propagator(spectral_decomposition(H1).propagator_matrix(t), "free-step")


def bessel_kernel(N: int, x: float) -> Propagator:
    """Infinite-chain kernel i^(m-n) J_(m-n)(x) truncated to N sites."""
    d = np.subtract.outer(np.arange(N), np.arange(N))
    K = _I_POWERS[d % 4] * jv(d, x)
    return Propagator(K, "bessel-approx")


def kick_phases(C: float, n0: int, N: int, window: tuple[int, int] | None = None) -> np.ndarray:
    """Diagonal of the parabolic kick exp[-i (C/2) (n - n0)^2].

    The nearest multiple of 2*pi in C is applied as an exact sign
    (-1)^(q k^2), so C = 2*pi staggers and C = 4*pi is the identity with no
    rounding. ``window`` restricts the kick to sites lo..hi inclusive.
    """
    k = np.arange(1, N + 1) - n0
    k2 = k * k
    q = int(round(C / (2 * np.pi)))
    r = C - 2 * np.pi * q
    sign = np.where((q * k2) % 2 == 0, 1.0, -1.0)
    phases = sign * np.exp(-0.5j * r * k2)
    if window is not None:
        lo, hi = window
        if not 1 <= lo <= hi <= N:
            raise ValueError(f"kick window {window} outside [1, {N}]")
        outside = np.ones(N, dtype=bool)
        outside[lo - 1:hi] = False
        phases[outside] = 1.0
    return phases


def kick_operator(C: float, cfg: ChainConfig, window: tuple[int, int] | None = None) -> Propagator:
    return Propagator(np.diag(kick_phases(C, cfg.n0, cfg.N, window)), "kick")


def apply_step(state: ExcitationState, V: Propagator, U: Propagator) -> ExcitationState:
    """One period: kick U first, then free evolution V."""
    _check_dims(state.N, V.N)
    _check_dims(state.N, U.N)
    if U.kind == "kick":
        psi = np.diag(U.matrix) * state.amplitudes
    else:
        psi = U.matrix @ state.amplitudes
    return ExcitationState(V.matrix @ psi)


def align_global_phase(reference: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Return ``other`` times the phase that best matches ``reference``."""
    overlap = np.vdot(other, reference)
    if abs(overlap) == 0:
        return other
    return other * (overlap / abs(overlap))


def save_snapshot(state: ExcitationState, path: str | Path) -> Path:
    path = Path(path)
    doc = {
        "version": SNAPSHOT_VERSION,
        "N": state.N,
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes],
    }
    try:
        path.write_text(json.dumps(doc, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
    return path


def load_snapshot(path: str | Path) -> ExcitationState:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {doc.get('version')!r}")
    N = doc["N"]
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    if amps.size != N:
        raise ValueError(f"{path}: expected {N} amplitudes, found {amps.size}")
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1) > NORM_TOL:
        raise ValueError(f"{path}: snapshot norm {norm!r} is not 1")
    return ExcitationState(amps)


def _check_dims(a: int, b: int):
    if a != b:
        raise ValueError(f"dimension mismatch: {a} vs {b}")
