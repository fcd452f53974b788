"""EE against circuit power, EE against antenna count, and transmit power against antenna count.

Writes one CSV per curve; plotting is left to whatever tool reads them.
"""

import argparse
import pathlib

from mimo_noma_ee.cli import SWEEP_COLUMNS, sweep_rows, to_csv
from mimo_noma_ee.config import SystemConfig
from mimo_noma_ee.experiments import DEFAULT_GRIDS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = SystemConfig()

    pc = sweep_rows(cfg, "P_c", DEFAULT_GRIDS["P_c"], args.trials, scale=1e-6)
    (args.out / "ee_vs_pc.csv").write_text(to_csv(SWEEP_COLUMNS, pc))

    # M sweep serves both the EE curve and the transmit power curve
    m = sweep_rows(cfg, "M", DEFAULT_GRIDS["M"], args.trials, scale=1e-6)
    (args.out / "ee_vs_m.csv").write_text(to_csv(SWEEP_COLUMNS, m))
    power = [{"M": r["axis_value"], "power_dbm": r["power_consumed_dbm_mean"]} for r in m]
    (args.out / "power_vs_m.csv").write_text(to_csv(["M", "power_dbm"], power))

    for r in pc:
        print(f"P_c {r['axis_value']:>4g} dBm  EE {r['ee_proposed_mean']:.4f} Mbit/J")
    for r in m:
        print(f"M {int(r['axis_value']):>4d}  EE {r['ee_proposed_mean']:.4f} Mbit/J  "
              f"power {r['power_consumed_dbm_mean']:.2f} dBm")


if __name__ == "__main__":
    main()
