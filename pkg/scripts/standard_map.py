"""Classical standard map: momentum diffusion and KAM confinement.

Writes one trajectory as CSV when --csv is given.
"""
import argparse

import numpy as np

from magnon.rotor import classical_standard_map, rechester_white_rate, write_trajectory_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=float, nargs="+", default=[0.125, 0.5, 0.97, 2.0, 5.0, 10.0])
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--orbits", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print("K        D_measured   K^2/2      Rechester-White")
    for K in args.K:
        tr = classical_standard_map(K, rng.uniform(0, 2 * np.pi, args.orbits), 0.0, args.steps)
        D = np.var(tr.p[-1] - tr.p[0]) / args.steps
        print(f"{K:<8g} {D:<12.4g} {K * K / 2:<10.4g} {rechester_white_rate(K):.4g}")
    if args.csv:
        write_trajectory_csv(classical_standard_map(args.K[-1], 0.5, 0.0, args.steps), args.csv)


if __name__ == "__main__":
    main()
