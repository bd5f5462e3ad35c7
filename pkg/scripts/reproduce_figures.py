"""Write the curve bundles of the three reference figures and print their checks."""

import argparse
from pathlib import Path

from phaserelax.cli import write_figure
from phaserelax.figures import FIGURES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures_out")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in FIGURES.items():
        fig = build()
        write_figure(out, fig)
        for check in fig.checks:
            print(check.line())
        for key, value in fig.metrics.items():
            print(f"  {key} = {value}")


if __name__ == "__main__":
    main()
