"""Critical outer radius of an axial annulus versus atom angle.

Prints b*(theta) next to the published table and, with --sweep, a finer
theta grid up to the angle where the intermediate window disappears.
"""

import argparse
import math

import numpy as np

from cpring import analysis as an


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sweep", type=int, default=0, metavar="N",
                    help="also print N angles between 0 and the intermediate limit")
    ap.add_argument("--xtol", type=float, default=1e-8)
    args = ap.parse_args()

    table, _ = an.PUBLISHED["table_outer_radius"]
    print(f"{'theta_deg':>10} {'b_star':>12} {'published':>10}")
    for deg, quoted in table.items():
        b = an.critical_outer_radius(math.radians(deg), xtol=args.xtol)
        print(f"{deg:10.3f} {b:12.8f} {quoted:10.4f}")

    if args.sweep:
        limit = math.degrees(an.critical_angles().intermediate)
        print(f"\nsweep up to {limit:.5f} deg")
        for deg in np.linspace(0.0, limit, args.sweep, endpoint=False):
            b = an.critical_outer_radius(math.radians(deg), xtol=args.xtol)
            print(f"{deg:10.4f} {b:12.8f}")


if __name__ == "__main__":
    main()
