"""Naive stopping: packet displacement over 200 kicks versus kick period.

Shorter periods (smaller 2 J T0) pin the packets more tightly.
"""
import argparse
from dataclasses import replace

from magnon import experiments as ex


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--strengths", type=float, nargs="+", default=[1.0, 0.5, 0.25, 0.125, 0.0625])
    args = ap.parse_args(argv)
    print("2JT0      displacement  relaunch_fidelity")
    for k in args.strengths:
        run = ex.figure_2(replace(ex.PRESETS["2"], kick_strength=k))
        print(f"{k:<9g} {run.metrics['stop_displacement']:<13.4f} {run.metrics['relaunch_fidelity']:.4f}")


if __name__ == "__main__":
    main()
