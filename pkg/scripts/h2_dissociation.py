#!/usr/bin/env python3
"""Reproduce the H2 dissociation spectrum experiment.

Runs the 26-point sweep manifest, writes results/h2_sweep.csv, and prints
a per-bond-length error summary against exact diagonalization.
"""

import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qpvqe.cli import run_cli  # noqa: E402

HERE = os.path.dirname(__file__)
MANIFEST = os.path.join(HERE, "..", "data", "manifests", "h2.sweep")
OUT_DIR = os.path.join(HERE, "..", "results")


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    out_csv = os.path.join(OUT_DIR, "h2_sweep.csv")
    code = run_cli(["sweep", "--manifest", MANIFEST, "--jobs", "2",
                    "--out", out_csv])
    if code != 0:
        return code
    rows = list(csv.DictReader(open(out_csv)))
    print(f"{'R (A)':>6} {'max |err| (mHa)':>16} {'min fidelity':>13}"
          f" {'bound (mHa)':>12}")
    labels = sorted({r["label"] for r in rows}, key=float)
    for label in labels:
        group = [r for r in rows if r["label"] == label]
        err = max(float(r["abs_err_ha"]) for r in group) * 1e3
        fid = min(float(r["fidelity"]) for r in group)
        bound = float(group[0]["bound"]) * 1e3
        print(f"{label:>6} {err:16.6f} {fid:13.9f} {bound:12.6f}")
    print(f"\nwrote {out_csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
