"""Kick schedules, their execution, and the stop/relaunch sequence.

Two bookkeeping conventions are supported:

``kick-then-free``
    every entry is one period: kick, then a free step of length T0.
``symmetric-half-step``
    free steps sit only *between* consecutive kicks (L kicks, L - 1 steps).

For the stop/relaunch schedule the ordered product equals V**s in the chain
bulk with s = 1 under ``kick-then-free`` and s = 0 under
``symmetric-half-step`` (see ``RESIDUAL_FREE_STEPS``).
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .chain import (
    ChainConfig,
    ExcitationState,
    InvariantAlarm,
    Propagator,
    build_single_excitation_hamiltonian,
    free_propagator,
    kick_phases,
)

CONVENTIONS = ("kick-then-free", "symmetric-half-step")
RESIDUAL_FREE_STEPS = {"kick-then-free": 1, "symmetric-half-step": 0}
NORM_ALARM = 1e-9
CHAOS_BORDER = 0.97


@dataclass(frozen=True)
class KickSchedule:
    entries: tuple[float, ...]
    n0: int | None = None
    T0: float | None = None
    convention: str = "kick-then-free"
    window: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(c) for c in self.entries))
        if len(self.entries) < 1:
            raise ValueError("a schedule needs at least one kick")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        if self.n0 is not None and int(self.n0) != self.n0:
            raise ValueError("n0 must be an integer site")

    def __len__(self):
        return len(self.entries)

    def bind(self, cfg: ChainConfig) -> ChainConfig:
        """Chain config with this schedule's n0/T0 applied where set."""
        changes = {}
        if self.n0 is not None:
            changes["n0"] = int(self.n0)
        if self.T0 is not None:
            changes["T0"] = self.T0
        return replace(cfg, **changes) if changes else cfg

    def to_dict(self) -> dict:
        doc = {"convention": self.convention, "T0": self.T0, "n0": self.n0, "entries": list(self.entries)}
        if self.window is not None:
            doc["window"] = list(self.window)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> KickSchedule:
        extra = set(doc) - {"convention", "T0", "n0", "entries", "window"}
        if extra:
            raise ValueError(f"unknown schedule keys: {sorted(extra)}")
        window = tuple(doc["window"]) if doc.get("window") is not None else None
        return cls(
            entries=tuple(doc["entries"]),
            n0=doc.get("n0"),
            T0=doc.get("T0"),
            convention=doc.get("convention", "kick-then-free"),
            window=window,
        )


def save_schedule(schedule: KickSchedule, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(schedule.to_dict(), indent=2) + "\n")
    return path


def load_schedule(path: str | Path) -> KickSchedule:
    return KickSchedule.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class StoppingParams:
    C: float
    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be an integer >= 1, got {self.M}")

    @property
    def C_prime(self) -> float:
        return self.C + 4 * np.pi

    def check_regime(self, cfg: ChainConfig) -> float:
        """Classical chaos parameter |2 J T0 C|; warns past the KAM border."""
        chaos = abs(cfg.kick_strength * self.C)
        if chaos > CHAOS_BORDER:
            warnings.warn(
                f"|2 J T0 C| = {chaos:.3f} exceeds {CHAOS_BORDER}; KAM barriers are broken",
                RuntimeWarning,
                stacklevel=2,
            )
        return chaos


def table1_schedule(p: StoppingParams, **kw) -> KickSchedule:
    C, M = p.C, p.M
    entries = [C / 2 + 2 * np.pi] + [C] * (M - 1) + [2 * np.pi] + [-C] * (M - 1) + [-C / 2]
    return KickSchedule(tuple(entries), **kw)


def naive_schedule(C: float, count: int, **kw) -> KickSchedule:
    if count < 1:
        raise ValueError("count must be >= 1")
    return KickSchedule((C,) * count, **kw)


def reversed_J_step(cfg: ChainConfig) -> Propagator:
    """U(2 pi) V(2 J T0) U(2 pi): a free step with the hopping sign flipped.

    Exact away from the ends; the edge diagonal does not change sign.
    """
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    S = kick_phases(2 * np.pi, cfg.n0, cfg.N)
    return Propagator(S[:, None] * V.matrix * S[None, :], "product")


class _Stepper:
    """Kick and free-step factors for one chain, reused across entries."""

    def __init__(self, cfg: ChainConfig, window=None):
        self.cfg = cfg
        self.window = window
        self.H = build_single_excitation_hamiltonian(cfg)
        self.V = free_propagator(self.H, cfg.T0).matrix
        self._kicks: dict[float, np.ndarray] = {}

    def kick(self, C: float) -> np.ndarray:
        if C not in self._kicks:
            self._kicks[C] = kick_phases(C, self.cfg.n0, self.cfg.N, self.window)
        return self._kicks[C]


def run_schedule(
    state: ExcitationState,
    cfg: ChainConfig,
    schedule: KickSchedule,
    capture_at=(),
) -> tuple[ExcitationState, dict[int, ExcitationState]]:
    """Apply every entry of ``schedule``; capture the state after kick j.

    Under ``kick-then-free`` the capture after entry j includes its free step.
    """
    cfg = schedule.bind(cfg)
    if state.N != cfg.N:
        raise ValueError(f"state has {state.N} sites, chain has {cfg.N}")
    steps = _Stepper(cfg, schedule.window)
    wanted = set(int(j) for j in capture_at)
    bad = [j for j in wanted if not 1 <= j <= len(schedule)]
    if bad:
        raise ValueError(f"capture indices {bad} outside 1..{len(schedule)}")
    psi = np.array(state.amplitudes)
    captures = {}
    for j, C in enumerate(schedule.entries, start=1):
        if schedule.convention == "symmetric-half-step" and j > 1:
            psi = steps.V @ psi
        psi = steps.kick(C) * psi
        if schedule.convention == "kick-then-free":
            psi = steps.V @ psi
        if j in wanted:
            captures[j] = _checked(psi, j)
    return _checked(psi, len(schedule)), captures


def _checked(psi: np.ndarray, j: int) -> ExcitationState:
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if drift > NORM_ALARM:
        raise InvariantAlarm(f"norm drift {drift:.3e} after kick {j}")
    if drift > 1e-12:
        psi = psi / np.linalg.norm(psi)
    return ExcitationState(psi)


def sequence_operator(cfg: ChainConfig, schedule: KickSchedule) -> Propagator:
    """Ordered product of all kick and free-step unitaries of ``schedule``."""
    cfg = schedule.bind(cfg)
    if cfg.N > 256:
        raise ValueError("dense sequence products are limited to N <= 256")
    steps = _Stepper(cfg, schedule.window)
    P = np.eye(cfg.N, dtype=complex)
    for j, C in enumerate(schedule.entries, start=1):
        if schedule.convention == "symmetric-half-step" and j > 1:
            P = steps.V @ P
        P = steps.kick(C)[:, None] * P
        if schedule.convention == "kick-then-free":
            P = steps.V @ P
    return Propagator(P, "product")


@dataclass(frozen=True)
class IdentityCheck:
    s: int
    residual: float  # full operator, after global-phase alignment
    bulk_residual: float
    bulk_window: tuple[int, int]
    phase: float


def _phase_aligned_residual(P: np.ndarray, R: np.ndarray) -> tuple[float, float]:
    tr = np.vdot(R, P)  # sum conj(R) * P
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    return float(np.abs(P - phase * R).max()), float(np.angle(phase))


def sequence_identity_residual(
    cfg: ChainConfig,
    schedule: KickSchedule,
    bulk_margin: int | None = None,
) -> IdentityCheck:
    """Compare the schedule product with V**s for s in {0, 1}.

    ``residual`` is the max elementwise deviation over the whole operator
    after removing a global phase; ``bulk_residual`` ignores ``bulk_margin``
    sites at each end (default: one light cone of the whole sequence plus 10).
    """
    cfg_b = schedule.bind(cfg)
    P = sequence_operator(cfg_b, schedule).matrix
    V = free_propagator(build_single_excitation_hamiltonian(cfg_b), cfg_b.T0).matrix
    if bulk_margin is None:
        bulk_margin = math.ceil(cfg_b.kick_strength * len(schedule)) + 10
    lo, hi = bulk_margin, cfg_b.N - bulk_margin
    if lo >= hi:
        raise ValueError("chain too short for the requested bulk margin")
    block = slice(lo, hi)
    best = None
    for s, R in ((0, np.eye(cfg_b.N)), (1, V)):
        full, phase = _phase_aligned_residual(P, R)
        bulk, _ = _phase_aligned_residual(P[block, block], R[block, block])
        cand = IdentityCheck(s, full, bulk, (lo + 1, hi), phase)
        if best is None or (cand.bulk_residual, cand.residual) < (best.bulk_residual, best.residual):
            best = cand
    return best


# -- timelines ---------------------------------------------------------------

@dataclass(frozen=True)
class Free:
    """Free evolution for a dimensionless duration 2Jt."""

    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("free duration must be >= 0")


@dataclass(frozen=True)
class Kicks:
    schedule: KickSchedule
    capture_at: tuple[int, ...] = ()
    label: str = "kick"


@dataclass(frozen=True)
class Capture:
    label: str


@dataclass(frozen=True)
class ExperimentTimeline:
    cfg: ChainConfig
    initial: ExcitationState
    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for seg in self.segments:
            if not isinstance(seg, (Free, Kicks, Capture)):
                raise TypeError(f"unknown timeline segment {seg!r}")
        if self.initial.N != self.cfg.N:
            raise ValueError("initial state does not match chain length")


@dataclass(frozen=True)
class CaptureRecord:
    label: str
    time: float  # dimensionless 2Jt elapsed, free and kicked time alike
    kicks: int  # kicks applied so far
    state: ExcitationState


@dataclass
class RunRecord:
    cfg: ChainConfig
    initial: ExcitationState
    captures: list[CaptureRecord] = field(default_factory=list)
    final: ExcitationState | None = None

    def capture(self, label: str) -> CaptureRecord:
        for c in self.captures:
            if c.label == label:
                return c
        raise KeyError(label)


def run_timeline(timeline: ExperimentTimeline) -> RunRecord:
    cfg = timeline.cfg
    H = build_single_excitation_hamiltonian(cfg)
    record = RunRecord(cfg, timeline.initial)
    psi = timeline.initial
    clock = 0.0
    kicks = 0
    for seg in timeline.segments:
        if isinstance(seg, Free):
            if seg.duration:
                psi = free_propagator(H, cfg.time(seg.duration)) @ psi
            clock += seg.duration
        elif isinstance(seg, Capture):
            record.captures.append(CaptureRecord(seg.label, clock, kicks, psi))
        else:
            sched_cfg = seg.schedule.bind(cfg)
            start_clock = clock
            kick_then_free = seg.schedule.convention == "kick-then-free"
            n_free = len(seg.schedule) if kick_then_free else len(seg.schedule) - 1
            psi, caps = run_schedule(psi, cfg, seg.schedule, seg.capture_at)
            per_step = sched_cfg.kick_strength
            for j in sorted(caps):
                steps_done = j if kick_then_free else j - 1
                record.captures.append(
                    CaptureRecord(f"{seg.label}{j}", start_clock + steps_done * per_step, kicks + j, caps[j])
                )
            clock = start_clock + n_free * per_step
            kicks += len(seg.schedule)
    record.final = psi
    return record
