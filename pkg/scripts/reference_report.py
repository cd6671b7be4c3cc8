"""Reference-chassis numbers under both stiffness conventions, side by side."""

from __future__ import annotations

import argparse
import json

from hairclip import analysis, mechanics as m

K_VALUES = {"K1": 0.0205, "K2": 0.2186, "K3": 0.0848}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    rows = {}
    for conv in m.Convention:
        rep = m.analyze_design(m.PETG, m.REFERENCE_GEOMETRY, conv)
        rows[conv.value] = {
            "EI_eta_N_m2": rep.section.EI_eta,
            "C_N_m2": rep.section.C,
            "P_cr_N": rep.solution.P_cr,
            "A1": rep.solution.A1,
            "psi_l_rad": rep.solution.psi_l,
            "U_barr_mJ": rep.U_barr * 1e3,
            "t_star_ms": rep.t_star * 1e3,
        }
    deflections = {k: analysis.static_deflection(0.072, K) for k, K in K_VALUES.items()}

    if args.json:
        print(json.dumps({"conventions": rows, "static_deflection_mm": deflections}, indent=2, sort_keys=True))
        return
    keys = list(next(iter(rows.values())))
    print(f"{'quantity':<14}" + "".join(f"{c:>16}" for c in rows))
    for k in keys:
        print(f"{k:<14}" + "".join(f"{rows[c][k]:>16.6g}" for c in rows))
    print()
    print("static deflection at 72 g: " + ", ".join(f"{k} {v:.2f} mm" for k, v in deflections.items()))


if __name__ == "__main__":
    main()
