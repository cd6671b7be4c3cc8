"""Crawling speed against actuation frequency on the wood preset."""

from __future__ import annotations

import argparse
import dataclasses
from pathlib import Path

import numpy as np

from hairclip import analysis, simulation as sim


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--freqs", default="0.5,1,1.5,2,2.5,3", help="comma-separated Hz")
    ap.add_argument("--duration", type=float, default=8.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/frequency_sweep.csv")
    args = ap.parse_args()

    freqs = [float(f) for f in args.freqs.split(",")]
    base = sim.RobotConfig()
    entries = [sim.SuiteEntry(f"wood-{f:g}Hz", dataclasses.replace(base, frequency=f), duration=args.duration)
               for f in freqs]
    rows = sim.experiment_suite(entries, workers=args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(sim.write_suite_csv(rows))

    good = [r for r in rows if r.error is None]
    for r in rows:
        print(f"{r.label:>12}  {r.speed_mm_s:8.2f} mm/s  {r.speed_bl_s:6.3f} BL/s  air {r.air_frac:.3f}"
              + (f"  ERROR {r.error}" if r.error else ""))
    slope, intercept, r2 = analysis.linear_fit_r2([r.freq_hz for r in good], [r.speed_mm_s for r in good])
    stride = np.mean([r.speed_mm_s / r.freq_hz for r in good])
    print(f"speed = {slope:.2f} mm/s/Hz * f + {intercept:.2f} mm/s, R2 = {r2:.4f}; mean stride {stride:.1f} mm")


if __name__ == "__main__":
    main()
