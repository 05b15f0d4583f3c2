"""Worst-case probability outside the m0 +- (4 + ceil(2Jt) + 5) cone."""
import argparse
import math

import numpy as np

from magnon.chain import ChainConfig, build_single_excitation_hamiltonian, free_propagator


def leakage(t, N=201, m0=101):
    cfg = ChainConfig(N=N)
    V = free_propagator(build_single_excitation_hamiltonian(cfg), cfg.time(t)).matrix
    d = np.abs(np.arange(1, N + 1) - m0)
    return np.linalg.norm(V[np.ix_(d > 9 + math.ceil(t), d <= 4)], 2) ** 2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--times", type=float, nargs="+", default=[1, 2, 3, 5, 7, 8, 10, 15, 30])
    args = ap.parse_args(argv)
    for t in args.times:
        v = leakage(t)
        print(f"2Jt = {t:5g}  leakage = {v:.3e}  {'ok' if v <= 1e-6 else 'above 1e-6'}")


if __name__ == "__main__":
    main()
