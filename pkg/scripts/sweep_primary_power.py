"""Outage vs primary power for N = 1, 2, with and without the direct link.

Writes one CSV per relay count and prints the closed-form MRC curve.
"""

import argparse
import csv
import io
from pathlib import Path

from cogrelay.cli import parse_sweep, run_sweep

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--closed-form-only", action="store_true", help="skip quadrature and Monte Carlo")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = {}
    for n in (1, 2):
        text = (CONFIGS / f"power_sweep_n{n}.sweep").read_text()
        if args.closed_form_only:
            text = text.replace("engines = closed_form, quadrature, monte_carlo", "engines = closed_form")
        table = run_sweep(parse_sweep(text), workers=args.workers)
        (out_dir / f"power_sweep_n{n}.csv").write_text(table)
        for row in csv.DictReader(io.StringIO(table)):
            if row["engine"] == "closed_form":
                curves[(n, row["curve"], float(row["axis_value"]))] = float(row["outage"])

    print(f"{'P_PT dB':>8} {'N=1 MRC':>12} {'N=1 relay':>12} {'N=2 MRC':>12} {'N=2 relay':>12}")
    for p in sorted({k[2] for k in curves}):
        cols = [curves[(n, c, p)] for n in (1, 2) for c in ("mrc_with_direct", "relay_only")]
        print(f"{p:8.0f} " + " ".join(f"{v:12.6g}" for v in cols))
    print(f"CSV written to {out_dir}/power_sweep_n1.csv and {out_dir}/power_sweep_n2.csv")


if __name__ == "__main__":
    main()
