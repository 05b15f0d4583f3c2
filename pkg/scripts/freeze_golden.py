"""Freeze golden profiles and self-calibrated bounds into tests/golden/.

Run once after a validated build; the regression tests compare against
these files at 1e-12. Re-running overwrites them, so only do it on purpose.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from magnon import experiments as ex
from magnon.analysis import fidelity, packet_summary, probability_profile, write_profile_csv
from magnon.chain import ChainConfig, bessel_kernel, build_single_excitation_hamiltonian, free_propagator
from magnon.control import reversed_J_step
from magnon.rotor import classical_standard_map

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def freeze_profiles(out: Path) -> dict:
    runs = {
        "fig1a": ex.run_figure("1a"),
        "fig1b": ex.run_figure("1b"),
        "fig2": ex.run_figure("2"),
        "fig3": ex.run_figure("3"),
    }
    files = {}
    for name, run in runs.items():
        for label in run.golden_labels:
            path = out / f"{name}_{label}.csv"
            write_profile_csv(probability_profile(run.record.capture(label).state), path)
            files[f"{name}_{label}"] = path.name
    return files, runs


def measure_bounds(runs) -> dict:
    cfg = ChainConfig(N=201, T0=0.125)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0).matrix
    B = bessel_kernel(201, cfg.kick_strength).matrix
    block = slice(50, 151)
    bessel_dev = float(np.abs(V[block, block] - B[block, block]).max())

    t1 = runs["fig1a"].record.capture("t1").state
    R = reversed_J_step(cfg)
    Vp = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.T0)
    psi = t1
    for _ in range(60):
        psi = Vp @ psi
    for _ in range(60):
        psi = R @ psi
    echo = fidelity(t1, psi)

    th, p0 = np.meshgrid(np.linspace(0, 2 * np.pi, 41)[:-1], np.linspace(-np.pi, np.pi, 41))
    traj = classical_standard_map(0.125, th.ravel(), p0.ravel(), 10000)
    excursion = float(np.abs(traj.p - traj.p[0]).max())

    s1a = packet_summary(probability_profile(t1))
    return {
        "bessel_bulk_deviation": {"measured": bessel_dev, "bound": 1e-6},
        "echo_fidelity_p60": {"measured": echo, "bound": 0.999},
        "standard_map_K0.125_excursion": {"measured": excursion, "bound": 1.4},
        "fig1a_background_max": {
            "measured": s1a.background_max,
            "peak": max(p for _, p in s1a.peaks),
            "bound": 0.005,
        },
        "fig2_stop_displacement": {"measured": runs["fig2"].metrics["stop_displacement"], "bound": 2.0},
        "fig3_stop_displacement": {"measured": runs["fig3"].metrics["stop_displacement"], "bound": 2.0},
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=GOLDEN)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    files, runs = freeze_profiles(args.out)
    bounds = measure_bounds(runs)
    doc = {"profiles": files, "tolerance": 1e-12, "thresholds": bounds}
    (args.out / "thresholds.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    for k, v in bounds.items():
        print(f"{k:34s} measured={v['measured']:.6g} bound={v['bound']}")


if __name__ == "__main__":
    main()
