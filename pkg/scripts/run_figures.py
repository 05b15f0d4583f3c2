"""Run the four figure presets and export profiles plus manifests."""
import argparse
import json
from pathlib import Path

from magnon import experiments as ex
from magnon.analysis import export_run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs/figures"))
    ap.add_argument("figures", nargs="*", default=sorted(ex.PRESETS))
    args = ap.parse_args(argv)
    for which in args.figures:
        run = ex.run_figure(which)
        export_run(run.record, args.out / f"fig{which}", "csv",
                   {"figure": which, "parameters": run.params.to_dict(), "metrics": run.metrics})
        headline = {k: v for k, v in run.metrics.items() if k != "centroids"}
        print(f"fig {which}: {json.dumps(headline, default=float)}")


if __name__ == "__main__":
    main()
