"""Fit every built-in dataset by each estimation method and tabulate the results."""

import argparse
import time

from lerchkit import BUILTIN_NAMES, FitConfig, builtin, fit, pearson_chi2
from lerchkit.errors import LerchError
from lerchkit.estimate import METHODS, ssd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--starts", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--methods", nargs="+", default=list(METHODS), choices=METHODS)
    args = parser.parse_args()

    header = f"{'dataset':<14}{'method':<9}{'z':>13}{'s':>13}{'v':>13}{'X2':>11}{'SSD':>11}{'conv':>6}{'sec':>7}"
    print(header)
    print("-" * len(header))
    for name in BUILTIN_NAMES:
        ds = builtin(name)
        for method in args.methods:
            cfg = FitConfig(method=method, multistart_count=args.starts, seed=args.seed)
            start = time.perf_counter()
            try:
                res = fit(ds, cfg)
            except LerchError as exc:
                print(f"{name:<14}{method:<9}  {type(exc).__name__}: {exc}")
                continue
            elapsed = time.perf_counter() - start
            z, s, v = res.params.as_tuple()
            try:
                x2 = f"{pearson_chi2(ds.table, res.dist(), ds.grouping, 3, ds.chi2_size).x2:11.5g}"
            except LerchError:  # zero degrees of freedom
                x2 = f"{'-':>11}"
            print(
                f"{name:<14}{method:<9}{z:13.6g}{s:13.6g}{v:13.6g}{x2}"
                f"{ssd(ds, res.params):11.4g}{str(res.converged):>6}{elapsed:7.1f}"
            )


if __name__ == "__main__":
    main()
