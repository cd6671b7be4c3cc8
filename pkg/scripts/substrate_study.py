"""Speed on each substrate preset, the gait modes, and the friction-symmetry checks."""

from __future__ import annotations

import argparse
import dataclasses

from hairclip import simulation as sim


def run(label: str, cfg: sim.RobotConfig, duration: float) -> float:
    tr = sim.run_gait(cfg, duration)
    v = tr.mean_speed
    air = float((~(tr.contact_fore | tr.contact_hind)).mean())
    print(f"{label:>22}  {v * 1e3:8.2f} mm/s  {v / cfg.body_length:6.3f} BL/s  air {air:.3f}  "
          f"audit {tr.audit_error():.1e}")
    return v


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration", type=float, default=5.0)
    args = ap.parse_args()
    base = sim.RobotConfig()

    print("substrates (2 Hz, symmetric gallop)")
    speeds = {name: run(name, dataclasses.replace(base, substrate=s), args.duration)
              for name, s in sim.SUBSTRATES.items()}
    print(f"concrete / wood speed ratio: {speeds['concrete'] / speeds['wood']:+.3f}")

    print("\nfriction symmetry")
    run("isotropic mu = 0.5", dataclasses.replace(base, substrate=sim.SubstrateFriction("iso", 0.5, 0.5)),
        args.duration)
    run("wood, swapped", dataclasses.replace(base, substrate=base.substrate.swapped()), args.duration)

    print("\ngait modes")
    run("gallop 72 g", base, args.duration)
    run("rear-only 72 g", dataclasses.replace(base, mode=sim.GaitMode.REAR_ONLY), args.duration)
    run("tethered gallop 41 g", dataclasses.replace(base, total_mass=0.041), args.duration)


if __name__ == "__main__":
    main()
