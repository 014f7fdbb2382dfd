"""Generalized Poisson reference models.

Both mass functions are evaluated exactly as written, without renormalizing
the standard form after its cut-off at ``[-theta/lambda]`` for negative
``lambda``; the missing mass is part of what these comparisons show.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "GenPoissonParams",
    "genpoisson_pmf",
    "genpoisson_adjusted_pmf",
    "GenPoisson",
]


@dataclass(frozen=True)
class GenPoissonParams:
    """``theta`` and ``lam``; for the adjusted variant ``lam`` holds ``alpha``."""

    theta: float
    lam: float
    variant: str = "standard"
    phi: float = 0.0

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta!r}")
        if self.variant not in ("standard", "restricted_adjusted"):
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.variant == "restricted_adjusted" and not 0.0 <= self.phi < 1.0:
            raise DomainError(f"phi must lie in [0, 1), got {self.phi!r}")

    @property
    def cutoff(self):
        """Largest supported count for ``lam < 0`` (standard variant), else None."""
        if self.variant == "standard" and self.lam < 0:
            return math.floor(-self.theta / self.lam)
        return None


def _as_int(x):
    if int(x) != x:
        raise DomainError(f"x must be an integer, got {x!r}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    return int(x)


def genpoisson_pmf(p, x):
    """``theta (theta + x lam)**(x-1) exp(-theta - x lam) / x!``, zero past the cut-off."""
    x = _as_int(x)
    theta, lam = p.theta, p.lam
    cut = p.cutoff
    if cut is not None and x > cut:
        return 0.0
    base = theta + x * lam
    if base <= 0:
        return 0.0
    return math.exp(math.log(theta) + (x - 1) * math.log(base) - base - math.lgamma(x + 1))


def genpoisson_adjusted_pmf(p, x):
    """Zero-adjusted restricted generalized Poisson mass.

    The positive classes share the mass ``1 - phi`` left over by the extra
    weight on zero.
    """
    if p.variant != "restricted_adjusted":
        raise DomainError("parameters are not of the restricted_adjusted variant")
    x = _as_int(x)
    theta, alpha, phi = p.theta, p.lam, p.phi
    if x == 0:
        return phi + (1.0 - phi) * math.exp(-theta)
    base = 1.0 + x * alpha
    if base <= 0:
        return 0.0
    log_p = (x - 1) * math.log(base) + x * (math.log(theta) - alpha * theta) - theta - math.lgamma(x + 1)
    return (1.0 - phi) * math.exp(log_p)


class GenPoisson:
    """Array-friendly wrapper exposing ``pmf`` and ``survival`` for the gof routines."""

    def __init__(self, params):
        self.params = params
        self._one = genpoisson_pmf if params.variant == "standard" else genpoisson_adjusted_pmf

    def pmf(self, x):
        xa = np.asarray(x)
        if xa.ndim == 0:
            return self._one(self.params, int(xa)) if xa >= 0 else 0.0
        return np.array([self._one(self.params, int(k)) if k >= 0 else 0.0 for k in xa])

    def survival(self, x):
        x = max(0, math.floor(x))
        cut = self.params.cutoff
        if cut is not None:
            return math.fsum(self._one(self.params, k) for k in range(x, cut + 1))
        return max(0.0, 1.0 - math.fsum(self._one(self.params, k) for k in range(x)))
