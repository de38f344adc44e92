"""Regenerate the bundled synthetic proxy series."""

import argparse
from pathlib import Path

from element_analysis.sample import write_proxy_csv

DEFAULT = Path(__file__).resolve().parents[1] / "src" / "element_analysis" / "data" / "e10yri_proxy.csv"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output", type=Path, default=DEFAULT)
    args = ap.parse_args()
    write_proxy_csv(args.output, args.seed)
    print(f"wrote {args.output}")
