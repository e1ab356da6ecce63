"""Write the energy-vs-height and Delta-E-vs-height tables.

By default the tables go to the package's golden directory, which is what the
test suite compares against.  Only rerun into that directory after a
deliberate numerical change.
"""

import argparse
from pathlib import Path

from cpring import figures

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "src" / "cpring" / "golden"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=GOLDEN_DIR)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for name, rows in (("energy_curves", figures.energy_curves()),
                       ("delta_e_curves", figures.delta_e_curves())):
        path = args.out_dir / figures.GOLDEN_FILES[name]
        path.write_text(figures.to_csv(rows))
        print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main()
