#!/usr/bin/env python3
"""Write benchmark series as `t,y` CSVs (t = 1-based time index).

Sources that can be installed from PyPI are fetched automatically:

  motorcycle  MASS::mcycle via `pydataset` or `rdatasets`; for repeated
              time stamps the first recorded acceleration is kept, leaving
              94 rows of raw measurements.
  nile        datasets::Nile via statsmodels (100 rows).

Brent crude (N=100), Canada CO2 (N=215) and EUR-USD (N=200) are not on
PyPI. Export them yourself (TCPD: brent_spot, co2_canada; R priceR for
EUR-USD) and pass them through `--from-csv NAME PATH VALUE_COLUMN`.
"""

import argparse
import csv
import pathlib
import sys


def write_series(path, values):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "y"])
        for i, v in enumerate(values, start=1):
            w.writerow([i, repr(float(v))])
    print(f"wrote {path} ({len(values)} rows)")


def load_mcycle():
    try:
        from pydataset import data
        return data("mcycle")
    except Exception:
        pass
    import rdatasets
    return rdatasets.data("MASS", "mcycle")


def motorcycle():
    df = load_mcycle()
    grouped = df.groupby("times", sort=True)["accel"].first()
    return list(grouped.values)


def nile():
    import statsmodels.datasets.nile as n
    return list(n.load_pandas().data["volume"].values)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="data", help="output directory")
    ap.add_argument("--from-csv", nargs=3, action="append", default=[],
                    metavar=("NAME", "PATH", "COLUMN"),
                    help="convert a local CSV column into NAME.csv")
    args = ap.parse_args()
    out = pathlib.Path(args.out)

    failures = 0
    for name, fn in (("motorcycle", motorcycle), ("nile", nile)):
        try:
            write_series(out / f"{name}.csv", fn())
        except Exception as e:  # missing optional package
            print(f"skipped {name}: {e}", file=sys.stderr)
            failures += 1

    for name, path, column in args.from_csv:
        with open(path, newline="") as f:
            values = [float(row[column]) for row in csv.DictReader(f)]
        write_series(out / f"{name}.csv", values)

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
