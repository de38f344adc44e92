"""Dump time-domain Morse kernels for a few (beta, gamma) pairs as CSV.

Each file has columns t, re, im, abs at unit peak period spacing, suitable
for plotting the family's range of morphologies.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from element_analysis.morse import MorseParams, morse_table, peak_frequency

PAIRS = [(3, 1), (1.5, 2), (3, 2), (6, 2), (6, 3), (12, 3)]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("kernels"))
    ap.add_argument("--periods", type=float, default=3.0, help="half-width in peak periods")
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for beta, gamma in PAIRS:
        p = MorseParams(beta, gamma)
        half = args.periods * 2 * np.pi / peak_frequency(p)
        t = np.linspace(-half, half, 801)
        psi = morse_table(p)(t)
        psi /= np.abs(psi).max()
        path = args.out_dir / f"morse_b{beta:g}_g{gamma:g}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re", "im", "abs"])
            w.writerows(zip(t, psi.real, psi.imag, np.abs(psi)))
        print(f"wrote {path}")
