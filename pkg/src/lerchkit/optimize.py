"""Nelder-Mead simplex minimizer used by the estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SimplexResult", "nelder_mead"]


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool


def nelder_mead(func, x0, step=0.5, xatol=1e-9, fatol=1e-12, max_iter=5000):
    """Minimize ``func`` from ``x0``.

    Standard coefficients (reflection 1, expansion 2, contraction 1/2,
    shrink 1/2).  ``func`` may return ``inf`` to reject a point.  Stops when
    every vertex lies within ``xatol`` of the best one (max-norm) and the
    function values agree to ``fatol * max(1, |f_best|)``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,))
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        val = func(x)
        return math.inf if val is None or math.isnan(val) else float(val)

    simplex = np.empty((dim + 1, dim))
    simplex[0] = x0
    for i in range(dim):
        simplex[i + 1] = x0
        simplex[i + 1, i] += steps[i]
    values = np.array([f(p) for p in simplex])

    converged = False
    nit = 0
    while nit < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]
        best = values[0]
        if math.isfinite(best):
            spread_x = np.max(np.abs(simplex[1:] - simplex[0]))
            spread_f = np.max(np.abs(values[1:] - best))
            if spread_x <= xatol and spread_f <= fatol * max(1.0, abs(best)):
                converged = True
                break
        nit += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
        values[1:] = [f(p) for p in simplex[1:]]

    i = int(np.argmin(values))
    return SimplexResult(simplex[i].copy(), float(values[i]), nit, nfev, converged)
