"""False-alarm rate of the significance threshold on pure white noise.

Counts the fraction of noise-only series yielding at least one significant
event, for both noise methods, against the configured alpha.
"""

import argparse
import time

import numpy as np
from scipy.stats import binom

from element_analysis.config import AnalysisConfig
from element_analysis.cwt import TimeSeries
from element_analysis.pipeline import detect_events, transform

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()
    lo, hi = binom.interval(0.95, args.trials, args.alpha)
    for method in ("monte-carlo", "analytic-white"):
        cfg = AnalysisConfig(alpha=args.alpha, noise_method=method, apply_filter=False)
        start = time.perf_counter()
        hits = 0
        for j in range(args.trials):
            x = TimeSeries(np.random.default_rng([7, j]).standard_normal(args.n))
            events, noise, _ = detect_events(transform(x, cfg), cfg)
            hits += bool(events)
        print(f"{method:15s} {hits}/{args.trials} series with events (95% interval [{lo:g}, {hi:g}]), "
              f"quantile {noise.quantile:.3f}, {time.perf_counter() - start:.1f} s")
