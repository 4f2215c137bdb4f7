"""Outage vs the primary outage threshold lambda_p for P_pk = 10 and 15 dB.

Reports where the outage floor begins (both secondary powers peak-limited).
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
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for pk in (10, 15):
        table = run_sweep(parse_sweep((CONFIGS / f"lambda_sweep_pk{pk}.sweep").read_text()))
        (out_dir / f"lambda_sweep_pk{pk}.csv").write_text(table)
        rows = list(csv.DictReader(io.StringIO(table)))
        onset = next(
            (r for r in rows if r["st_binding"] == "peak" and r["sr_binding"] == "peak"), None
        )
        print(f"P_pk = {pk} dB")
        for r in rows[::7]:
            print(f"  lambda_p = {float(r['axis_value']):.2f}  outage = {float(r['outage']):.6g}  ({r['st_binding']})")
        if onset:
            print(f"  floor from lambda_p = {float(onset['axis_value']):.2f} at outage {float(onset['outage']):.6g}")
        else:
            print("  no floor on this grid")


if __name__ == "__main__":
    main()
