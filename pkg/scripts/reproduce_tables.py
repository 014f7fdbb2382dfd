"""Print observed and expected columns for every built-in table, with each check."""

import argparse

from lerchkit.estimate import FitConfig
from lerchkit.reproduce import TABLES, compare


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--refit", action="store_true", help="refit the Lerch model by minimum X2")
    parser.add_argument("--starts", type=int, default=32)
    args = parser.parse_args()

    cfg = FitConfig(multistart_count=args.starts)
    failed = 0
    for table in TABLES:
        comp = compare(table, refit=args.refit, cfg=cfg)
        kinds = list(comp.columns)
        print(f"\n== {table}")
        print("count  observed  " + "  ".join(f"{k:>20}" for k in kinds))
        for i, (x, obs) in enumerate(zip(comp.counts, comp.observed)):
            print(f"{x:5d}  {obs:8g}  " + "  ".join(f"{comp.columns[k][i]:20.6f}" for k in kinds))
        for c in comp.checks:
            mark = "ok  " if c.passed else "FAIL"
            print(f"  {mark} {c.label:<26} {c.value:.6g} vs {c.reference:.6g} (tol {c.tolerance:g}, {c.kind})")
        failed += not comp.passed
    print(f"\n{len(TABLES) - failed}/{len(TABLES)} tables within tolerance")


if __name__ == "__main__":
    main()
