"""Tip-angle and barrier surfaces over (l, D), plus the budget-constrained optimum.

Writes one sweep CSV per convention and prints where the optimizer lands.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from hairclip import design
from hairclip.mechanics import Convention


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/design", help="output directory")
    ap.add_argument("--budget-mJ", type=float, default=50.0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for conv in Convention:
        grid = design.DesignGrid(convention=conv)
        points = design.sweep(grid, workers=args.workers)
        (out / f"sweep_{conv.value}.csv").write_text(design.write_csv(points))
        ok = [p for p in points if p.ok]
        print(f"[{conv.value}] {len(ok)}/{len(points)} nodes; "
              f"psi_l {min(p.psi_l for p in ok):.4f}..{max(p.psi_l for p in ok):.4f} rad, "
              f"U_barr {min(p.U_barr for p in ok) * 1e3:.2f}..{max(p.U_barr for p in ok) * 1e3:.2f} mJ")
        try:
            res = design.optimize(design.DesignObjective(budget=args.budget_mJ * 1e-3), grid, workers=args.workers)
        except design.InfeasibleError as exc:
            print(f"  optimize: {exc}")
            continue
        b = res.best
        print(f"  best under {args.budget_mJ:g} mJ: l = {b.l * 1e3:.3f} mm, D = {b.D * 1e3:.3f} mm, "
              f"psi_l = {b.psi_l:.4f} rad, U_barr = {b.U_barr * 1e3:.2f} mJ "
              f"(budget active: {res.budget_active}, {res.evaluations} evaluations)")


if __name__ == "__main__":
    main()
