"""Comparisons against the published fits that accompany the built-in datasets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import GenPoisson, GenPoissonParams
from .data import builtin
from .distribution import LerchDist
from .estimate import FitConfig, fit_minchi2
from .gof import pearson_chi2, ssd

__all__ = ["Check", "Comparison", "TABLES", "TOLERANCES", "compare", "model_for"]

# short table names used on the command line
TABLES = {
    "sowbugs": "sowbugs",
    "death": "death_notices",
    "beans": "bean_weevil",
    "yunoko": "yunoko",
    "urchin40": "urchin_40s",
    "urchin180": "urchin_180s",
}

TOLERANCES = {
    "cell": 0.05,
    "cell_relative_abundance": 5e-4,
    "x2": 0.01,
    "x2_relative_abundance": 1e-3,
    "p_value": 0.005,
    "ssd": 5e-5,
}

_N_PARAMS = {"lerch": 3, "genpoisson": 2, "genpoisson_adjusted": 3}


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    reference: float
    tolerance: float
    kind: str = "abs"  # "abs": |value - reference| <= tol; "max": value <= reference + tol

    @property
    def passed(self):
        if self.kind == "max":
            return bool(self.value <= self.reference + self.tolerance)
        return bool(abs(self.value - self.reference) <= self.tolerance)

    def to_dict(self):
        return {
            "label": self.label, "value": self.value, "reference": self.reference,
            "tolerance": self.tolerance, "kind": self.kind, "passed": self.passed,
        }


@dataclass(frozen=True)
class Comparison:
    table: str
    counts: tuple
    observed: tuple
    columns: dict
    checks: tuple
    fitted: object = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "table": self.table,
            "counts": list(self.counts),
            "observed": list(self.observed),
            "columns": {k: list(v) for k, v in self.columns.items()},
            "checks": [c.to_dict() for c in self.checks],
            "fit": None if self.fitted is None else self.fitted.to_dict(),
            "passed": self.passed,
        }


def model_for(kind, params, truncation):
    """Distribution object for a published model entry."""
    if kind == "lerch":
        return LerchDist(*params, truncation.a, truncation.b)
    if kind == "genpoisson":
        return GenPoisson(GenPoissonParams(*params))
    theta, alpha, phi = params
    return GenPoisson(GenPoissonParams(theta, alpha, "restricted_adjusted", phi))


def compare(table, refit=False, cfg=None):
    """Evaluate the published models for ``table`` and collect every check.

    With ``refit`` the Lerch model is refitted by minimum X^2 and judged by
    its statistic instead of by its cells.
    """
    ds = builtin(TABLES.get(table, table))
    relative = ds.chi2_size is not None
    cell_tol = TOLERANCES["cell_relative_abundance" if relative else "cell"]
    x2_tol = TOLERANCES["x2_relative_abundance" if relative else "x2"]
    n = ds.table.n_total
    counts = ds.table.counts
    columns = {}
    checks = []
    fitted = None

    for kind, pub in ds.published.items():
        params = pub["params"]
        if kind == "lerch" and refit:
            fitted = fit_minchi2(ds, cfg or FitConfig())
            params = fitted.params.as_tuple()
        dist = model_for(kind, params, ds.truncation)
        col = n * np.asarray(dist.pmf(counts), dtype=float)
        columns[kind] = tuple(float(c) for c in col)
        if not (kind == "lerch" and refit):
            for x, got, want in zip(counts, col, pub["expected"]):
                checks.append(Check(f"{kind} E[{x}]", float(got), float(want), cell_tol))
        # a refit may only match or beat the published statistic
        bound = "max" if kind == "lerch" and refit else "abs"
        if "x2" in pub:
            report = pearson_chi2(ds.table, dist, ds.grouping, _N_PARAMS[kind], ds.chi2_size)
            checks.append(Check(f"{kind} X2", report.x2, pub["x2"], x2_tol, bound))
            checks.append(Check(f"{kind} p", report.p_value, pub["p_value"], TOLERANCES["p_value"]))
            checks.append(Check(f"{kind} dof", report.dof, pub["dof"], 0))
        if "ssd" in pub:
            checks.append(Check(f"{kind} SSD", ssd(ds.table, dist), pub["ssd"], TOLERANCES["ssd"], bound))

    return Comparison(
        table, tuple(int(c) for c in counts), tuple(float(o) for o in ds.table.observed),
        columns, tuple(checks), fitted,
    )
