"""Goodness of fit: grouped Pearson statistic, chi-square tail probabilities, SSD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence

__all__ = [
    "GofReport",
    "chi2_sf",
    "regularized_gamma_q",
    "grouped_cells",
    "pearson_x2",
    "pearson_chi2",
    "ssd",
]

_GAMMA_TOL = 1e-12
_GAMMA_MAXITER = 10_000
_TINY = 1e-300


def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL * 1e-2:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NoConvergence("incomplete gamma series did not converge")


def _gamma_q_fraction(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL * 1e-2:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NoConvergence("incomplete gamma continued fraction did not converge")


def regularized_gamma_q(a, x):
    """Upper regularized incomplete gamma function ``Q(a, x)``."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a!r}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(a, x))
    return min(1.0, _gamma_q_fraction(a, x))


def chi2_sf(x2, dof):
    """Survival function of the chi-square distribution with ``dof`` degrees of freedom."""
    if int(dof) != dof or dof < 1:
        raise DomainError(f"dof must be a positive integer, got {dof!r}")
    if x2 < 0 or math.isnan(x2):
        raise DomainError(f"x2 must be nonnegative, got {x2!r}")
    return regularized_gamma_q(dof / 2.0, x2 / 2.0)


@dataclass(frozen=True)
class GofReport:
    x2: float
    dof: int
    p_value: float
    groups: tuple

    def to_dict(self):
        return {
            "x2": self.x2,
            "dof": self.dof,
            "p_value": self.p_value,
            "groups": [
                {"classes": [lo, hi], "observed": o, "expected": e}
                for (lo, hi), o, e in self.groups
            ],
        }


def grouped_cells(table, dist, grouping, sample_size=None):
    """Observed and expected frequencies per group.

    ``dist`` needs ``pmf(array)`` and ``survival(x)``.  ``sample_size``
    rescales both columns; by default the table's own total is used.
    """
    n = table.n_total if sample_size is None else float(sample_size)
    scale = n / table.n_total
    lo0 = grouping.groups[0][0]
    hi_last = grouping.groups[-1][1]
    xs = np.arange(lo0, hi_last + 1)
    probs = np.asarray(dist.pmf(xs), dtype=float)
    starts = np.array([lo - lo0 for lo, _ in grouping.groups])
    expected = n * np.add.reduceat(probs, starts)
    if grouping.fold_tail:
        expected[-1] += n * dist.survival(hi_last + 1)
    counts = table.counts
    obs = table.observed * scale
    idx = np.searchsorted([hi for _, hi in grouping.groups], counts)
    observed = np.bincount(idx, weights=obs, minlength=len(grouping.groups))
    return observed, expected


def pearson_x2(observed, expected):
    """``sum (O - E)**2 / E``; infinite when some expected frequency vanishes."""
    if np.any(expected <= 0):
        return math.inf
    return math.fsum((observed - expected) ** 2 / expected)


def pearson_chi2(table, dist, grouping, n_fitted_params, sample_size=None):
    """Grouped Pearson test with ``dof = groups - 1 - n_fitted_params``."""
    observed, expected = grouped_cells(table, dist, grouping, sample_size)
    if np.any(expected <= 0):
        raise DomainError("every group needs a positive expected frequency")
    dof = len(grouping) - 1 - int(n_fitted_params)
    if dof < 1:
        raise DomainError(
            f"{len(grouping)} groups and {n_fitted_params} fitted parameters leave {dof} degrees of freedom"
        )
    x2 = pearson_x2(observed, expected)
    groups = tuple(
        (g, float(o), float(e)) for g, o, e in zip(grouping.groups, observed, expected)
    )
    return GofReport(x2, dof, chi2_sf(x2, dof), groups)


def ssd(table, dist):
    """Sum of squared differences between model masses and relative frequencies."""
    probs = np.asarray(dist.pmf(table.counts), dtype=float)
    rel = table.observed / table.n_total
    return math.fsum((probs - rel) ** 2)
