"""Observables of site-probability profiles and plain-file export."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import ExcitationState

MANIFEST_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class Profile:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 1 or (p < 0).any():
            raise ValueError("profile must be a non-negative vector")
        if abs(p.sum() - 1) > 1e-12:
            raise ValueError(f"profile sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def N(self) -> int:
        return self.probabilities.size

    @property
    def sites(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def __getitem__(self, m: int) -> float:
        return float(self.probabilities[m - 1])


@dataclass(frozen=True)
class Packet:
    peak_site: int
    peak_probability: float
    centroid: float
    width: float  # rms about the centroid over the support
    support: tuple[int, int]  # inclusive site range


@dataclass(frozen=True)
class PacketSummary:
    packets: tuple[Packet, ...]
    background_max: float
    peak_separation: int | None  # sites strictly between the two highest peaks

    @property
    def peaks(self) -> list[tuple[int, float]]:
        return [(p.peak_site, p.peak_probability) for p in self.packets]

    @property
    def centroids(self) -> list[float]:
        return [p.centroid for p in self.packets]

    @property
    def widths(self) -> list[float]:
        return [p.width for p in self.packets]

    def to_dict(self) -> dict:
        return {
            "packets": [
                {
                    "peak_site": p.peak_site,
                    "peak_probability": p.peak_probability,
                    "centroid": p.centroid,
                    "width": p.width,
                    "support": list(p.support),
                }
                for p in self.packets
            ],
            "background_max": self.background_max,
            "peak_separation": self.peak_separation,
        }


def probability_profile(state: ExcitationState) -> Profile:
    return Profile(np.abs(state.amplitudes) ** 2)


def fidelity(a: ExcitationState, b: ExcitationState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.N != b.N:
        raise ValueError(f"dimension mismatch: {a.N} vs {b.N}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def inverse_participation_ratio(profile: Profile) -> float:
    return float(np.sum(profile.probabilities ** 2))


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive 0-based index ranges of consecutive True entries."""
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts, stops))


def packet_summary(profile: Profile, threshold_fraction: float = 0.1, merge_radius: int = 3) -> PacketSummary:
    """Split a profile into packets of contiguous above-threshold support.

    A packet's peak is the largest probability in its support. Packets whose
    peaks are fewer than ``merge_radius`` sites apart are merged.
    """
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    p = profile.probabilities
    above = p >= threshold_fraction * p.max()
    groups = []
    for lo, hi in _runs(above):
        peak = lo + int(np.argmax(p[lo:hi + 1]))
        if groups and peak - groups[-1][2] < merge_radius:
            plo, _, ppeak = groups[-1]
            groups[-1] = (plo, hi, peak if p[peak] > p[ppeak] else ppeak)
        else:
            groups.append((lo, hi, peak))

    packets = []
    for lo, hi, peak in groups:
        w = p[lo:hi + 1]
        sites = np.arange(lo + 1, hi + 2)
        c = float(sites @ w / w.sum())
        width = float(np.sqrt(((sites - c) ** 2) @ w / w.sum()))
        packets.append(Packet(int(peak) + 1, float(p[peak]), c, width, (int(lo) + 1, int(hi) + 1)))

    background = 0.0
    if len(groups) >= 2:
        gap = np.zeros(p.size, dtype=bool)
        gap[groups[0][1] + 1:groups[-1][0]] = True
        for lo, hi, _ in groups:
            gap[lo:hi + 1] = False
        if gap.any():
            background = float(p[gap].max())

    separation = None
    if len(packets) >= 2:
        top = sorted(packets, key=lambda q: q.peak_probability, reverse=True)[:2]
        separation = int(abs(top[0].peak_site - top[1].peak_site)) - 1
    return PacketSummary(tuple(packets), background, separation)


def half_chain_centroids(profile: Profile, split_site: int) -> tuple[float, float]:
    """Centroids of the probability left and right of ``split_site``."""
    p, m = profile.probabilities, profile.sites
    left, right = m < split_site, m > split_site
    return (
        float(m[left] @ p[left] / p[left].sum()),
        float(m[right] @ p[right] / p[right].sum()),
    )


def centroid_track(record, split_site: int | None = None):
    """Per-capture packet centroids of a run record.

    With ``split_site`` the two centroids are taken over each side of that
    site, which stays well defined when a packet fragments; the result is an
    array of shape (captures, 2). Otherwise a list of per-capture centroid
    lists from ``packet_summary`` is returned.
    """
    profiles = [probability_profile(c.state) for c in record.captures]
    if split_site is not None:
        return np.array([half_chain_centroids(pr, split_site) for pr in profiles])
    return [packet_summary(pr).centroids for pr in profiles]


# -- export ------------------------------------------------------------------

def write_profile_csv(profile: Profile, path: str | Path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["site", "probability"])
            for m, pm in zip(profile.sites, profile.probabilities):
                w.writerow([int(m), f"{pm:.17e}"])
    except OSError as exc:
        raise OSError(f"cannot write profile {path}: {exc}") from exc
    return path


def read_profile_csv(path: str | Path) -> np.ndarray:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["probability"]) for r in rows])


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"{type(x).__name__} is not JSON serializable")


def write_manifest(manifest: dict, path: str | Path) -> Path:
    path = Path(path)
    doc = {"schema_version": MANIFEST_SCHEMA_VERSION, **manifest}
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write manifest {path}: {exc}") from exc
    return path


def export(obj, path: str | Path, format: str | None = None):
    """Write a Profile as CSV, a dict as a JSON manifest, or a RunRecord as
    one CSV per capture plus ``manifest.json`` inside directory ``path``."""
    path = Path(path)
    if isinstance(obj, Profile):
        if format not in (None, "csv"):
            raise ValueError("profiles export as csv only")
        return write_profile_csv(obj, path)
    if isinstance(obj, dict):
        return write_manifest(obj, path)
    if hasattr(obj, "captures"):
        return export_run(obj, path, format or "csv")
    raise TypeError(f"cannot export {type(obj).__name__}")


def export_run(record, directory: str | Path, format: str = "csv", extra: dict | None = None) -> dict:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    captures = []
    for cap in record.captures:
        prof = probability_profile(cap.state)
        entry = {
            "label": cap.label,
            "time_2Jt": cap.time,
            "kicks": cap.kicks,
            "packets": packet_summary(prof).to_dict(),
        }
        if format == "csv":
            name = f"profile_{cap.label}.csv"
            write_profile_csv(prof, directory / name)
            entry["profile"] = name
        else:
            entry["probabilities"] = [float(x) for x in prof.probabilities]
        captures.append(entry)
    manifest = {"chain": record.cfg.to_dict(), "captures": captures, **(extra or {})}
    write_manifest(manifest, directory / "manifest.json")
    return manifest
