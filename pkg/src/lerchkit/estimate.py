"""Parameter estimation for the Lerch family.

Three estimators are provided: the method of moments on the first three raw
moments, maximum likelihood, and minimum Pearson X^2.  All of them search
with a multistart Nelder-Mead simplex in the unconstrained coordinates

    zeta = logit(z),   s,   nu = log(v + a),

which keeps every trial point inside the parameter domain.  Likelihood and
moment fits are then polished by Newton steps in the natural coordinates.
Covariance matrices come from central finite differences of the exact
moment and likelihood code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .data import Dataset, FrequencyTable, GroupingSpec
from .distribution import LerchDist, LerchParams, Truncation
from .errors import DomainError, NoConvergence, NoSolution, SingularMatrix
from .gof import grouped_cells, pearson_x2
from .gof import ssd as _ssd
from .optimize import nelder_mead

__all__ = [
    "FitConfig",
    "FitResult",
    "fit",
    "fit_mm",
    "fit_ml",
    "fit_minchi2",
    "mm_covariance",
    "ml_covariance",
    "ml_gradient",
    "neg_log_likelihood",
    "ssd",
    "to_unconstrained",
    "from_unconstrained",
]

METHODS = ("mm", "ml", "minchi2")
MM_FLOOR = 1e-10
MM_GRAD_TOL = 1e-6
# beyond this z the plain series needs millions of terms per evaluation
Z_MAX = 1.0 - 1e-4
# box for the low-discrepancy starting points, in (logit z, s, log(v + a))
START_BOX = (np.array([-8.0, -30.0, -8.0]), np.array([4.0, 10.0, 3.5]))
_FAILURES = (DomainError, OverflowError, NoConvergence, FloatingPointError, ZeroDivisionError)


@dataclass(frozen=True)
class FitConfig:
    """Options shared by the estimators.

    ``starts`` replaces the generated starting points with explicit
    ``(z, s, v)`` triples.  ``truncation=None`` takes the dataset's own.
    """

    method: str = "minchi2"
    truncation: Truncation | None = None
    multistart_count: int = 32
    xatol: float = 1e-9
    fatol: float = 1e-12
    max_iter: int = 5000
    seed: int = 0
    reparameterize: bool = True
    starts: tuple | None = None
    covariance: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.multistart_count < 1:
            raise DomainError("multistart_count must be at least 1")


@dataclass(frozen=True)
class FitResult:
    params: LerchParams
    truncation: Truncation
    method: str
    objective: float
    covariance: np.ndarray | None
    converged: bool
    starts_tried: int
    extra: dict = field(default_factory=dict, compare=False)

    def dist(self):
        return LerchDist.from_params(self.params, self.truncation)

    def standard_errors(self):
        if self.covariance is None:
            return None
        return np.sqrt(np.diag(self.covariance))

    def to_dict(self):
        cov = None if self.covariance is None else self.covariance.tolist()
        return {
            "method": self.method,
            "params": {"z": self.params.z, "s": self.params.s, "v": self.params.v},
            "truncation": {"a": self.truncation.a, "b": self.truncation.b},
            "objective": self.objective,
            "covariance": cov,
            "converged": self.converged,
            "starts_tried": self.starts_tried,
        }


# -- coordinates -----------------------------------------------------------------

def to_unconstrained(params, a=0):
    z, s, v = params
    return np.array([math.log(z) - math.log1p(-z), s, math.log(v + a)])


def from_unconstrained(theta, a=0):
    zeta, s, nu = (float(t) for t in theta)
    z = 1.0 / (1.0 + math.exp(-zeta)) if zeta > -700 else 0.0
    return (z, s, math.exp(nu) - a if nu < 700 else math.inf)


def _dist_or_none(raw, trunc):
    z, s, v = raw
    if not (0.0 < z <= Z_MAX) or not math.isfinite(v) or not math.isfinite(s):
        return None
    try:
        return LerchDist(z, s, v, trunc.a, trunc.b)
    except _FAILURES:
        return None


# -- inputs ---------------------------------------------------------------------------

def _resolve(data, cfg):
    """Table, grouping, truncation and X^2 sample size for ``data``."""
    if isinstance(data, Dataset):
        trunc = cfg.truncation if cfg.truncation is not None else data.truncation
        return data.table, data.grouping, trunc, data.chi2_size
    if isinstance(data, FrequencyTable):
        trunc = cfg.truncation if cfg.truncation is not None else Truncation()
        return data, GroupingSpec.singletons(data.counts), trunc, None
    raise TypeError("data must be a FrequencyTable or a Dataset")


def _check_support(table, trunc):
    for c, o in table.classes:
        if o > 0 and not trunc.contains(c):
            raise DomainError(f"observed class {c} lies outside the support [{trunc.a}, {trunc.b}]")


def _heuristic_start(table, trunc):
    m = max(table.sample_moment(1) - trunc.a, 0.05)
    z = min(max(m / (1.0 + m), 0.01), 0.95)
    return (z, 0.0, 1.0)


def _start_points(table, trunc, cfg):
    if cfg.starts is not None:
        return [tuple(map(float, p)) for p in cfg.starts]
    points = [_heuristic_start(table, trunc)]
    extra = cfg.multistart_count - 1
    if extra > 0:
        halton = qmc.Halton(d=3, scramble=True, seed=cfg.seed)
        lo, hi = START_BOX
        for row in qmc.scale(halton.random(extra), lo, hi):
            points.append(from_unconstrained(row, trunc.a))
    return points


def _multistart(objective, starts, trunc, cfg, good_enough=-math.inf):
    """Best simplex result over all starts; ties go to the earlier start.

    Returns ``(raw, value, converged, tried)``.  The loop stops early once a
    start reaches ``good_enough``.
    """
    best = None
    tried = 0
    for raw in starts:
        if best is not None and best[1] < good_enough:
            break
        tried += 1
        if not math.isfinite(objective(raw)):
            continue
        if cfg.reparameterize:
            res = nelder_mead(
                lambda th: objective(from_unconstrained(th, trunc.a)),
                to_unconstrained(raw, trunc.a),
                step=0.5, xatol=cfg.xatol, fatol=cfg.fatol, max_iter=cfg.max_iter,
            )
            x = from_unconstrained(res.x, trunc.a)
        else:
            raw_arr = np.asarray(raw, dtype=float)
            step = np.maximum(0.1 * np.abs(raw_arr), 0.05)
            step[0] = 0.25 * min(raw_arr[0], 1.0 - raw_arr[0])
            res = nelder_mead(
                objective, raw_arr, step=step,
                xatol=cfg.xatol, fatol=cfg.fatol, max_iter=cfg.max_iter,
            )
            x = tuple(res.x)
        if best is None or res.fun < best[1]:
            best = (tuple(float(t) for t in x), res.fun, res.converged)
    if best is None:
        raise NoConvergence("no starting point gave a finite objective")
    return (*best, tried)


def _unconstrained_gradient(objective, raw, a):
    theta = to_unconstrained(raw, a)
    g = np.empty(3)
    for j in range(3):
        h = 1e-6 * max(1.0, abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (objective(from_unconstrained(up, a)) - objective(from_unconstrained(dn, a))) / (2.0 * h)
    return g


def _fd_step(theta, j, trunc):
    h = 1e-5 * max(1.0, abs(theta[j]))
    if j == 0:
        h = min(h, 0.5 * theta[0], 0.5 * (1.0 - theta[0]))
    elif j == 2:
        h = min(h, 0.5 * (theta[2] + trunc.a))
    return h


# -- minimum X^2 -----------------------------------------------------------------------

def _x2_objective(table, grouping, trunc, sample_size):
    def objective(raw):
        d = _dist_or_none(raw, trunc)
        if d is None:
            return math.inf
        try:
            observed, expected = grouped_cells(table, d, grouping, sample_size)
        except _FAILURES:
            return math.inf
        return pearson_x2(observed, expected)

    return objective


def fit_minchi2(data, cfg=FitConfig()):
    """Minimize the grouped Pearson statistic.

    ``data`` is a :class:`Dataset` (its grouping is used) or a plain table,
    which is grouped into singletons with the upper tail folded into the last
    class.
    """
    table, grouping, trunc, size = _resolve(data, cfg)
    _check_support(table, trunc)
    objective = _x2_objective(table, grouping, trunc, size)
    starts = _start_points(table, trunc, cfg)
    raw, value, converged, tried = _multistart(objective, starts, trunc, cfg)
    params = LerchParams(*raw)
    cov = None
    if cfg.covariance:
        try:
            cov = ml_covariance(params, table, trunc)
        except (SingularMatrix, *_FAILURES):
            cov = None
    return FitResult(params, trunc, "minchi2", value, cov, converged, tried)


# -- maximum likelihood ------------------------------------------------------------------

def _weights(table):
    return table.counts.astype(float), table.observed


def neg_log_likelihood(params, table, trunc=Truncation()):
    """``-log L`` treating the observed column as class weights."""
    z, s, v = params
    d = LerchDist(z, s, v, trunc.a, trunc.b)
    x, w = _weights(table)
    n = w.sum()
    return n * math.log(d.norm) - float(np.dot(w, x * math.log(z) - s * np.log(v + x)))


def ml_gradient(params, table, trunc=Truncation()):
    """Analytic gradient of :func:`neg_log_likelihood` in ``(z, s, v)``."""
    z, s, v = params
    d = LerchDist(z, s, v, trunc.a, trunc.b)
    x, w = _weights(table)
    n = w.sum()
    dw = d.norm_gradient() / d.norm
    return np.array([
        n * dw[0] - float(np.dot(w, x)) / z,
        n * dw[1] + float(np.dot(w, np.log(v + x))),
        n * dw[2] + s * float(np.dot(w, 1.0 / (v + x))),
    ])


def _nll_objective(table, trunc):
    def objective(raw):
        if _dist_or_none(raw, trunc) is None:
            return math.inf
        try:
            return neg_log_likelihood(raw, table, trunc)
        except _FAILURES:
            return math.inf

    return objective


def _fd_jacobian(func, theta, trunc):
    theta = np.asarray(theta, dtype=float)
    cols = []
    for j in range(3):
        h = _fd_step(theta, j, trunc)
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        cols.append((np.asarray(func(up)) - np.asarray(func(dn))) / (2.0 * h))
    return np.column_stack(cols)


def _newton_polish(objective, gradient, jacobian, theta, trunc, tol, max_steps=50):
    """Damped Newton iterations on ``gradient(theta) = 0``."""
    theta = np.asarray(theta, dtype=float)
    f0 = objective(theta)
    for _ in range(max_steps):
        try:
            g = np.asarray(gradient(theta))
            if not np.all(np.isfinite(g)) or np.linalg.norm(g) < tol:
                break
            step = np.linalg.solve(jacobian(theta), g)
        except (np.linalg.LinAlgError, *_FAILURES):
            break
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        while lam > 1e-6:
            cand = theta - lam * step
            f1 = objective(cand)
            if f1 <= f0:
                break
            lam *= 0.5
        else:
            break
        if np.max(np.abs(cand - theta)) < 1e-15 * max(1.0, np.max(np.abs(theta))):
            theta, f0 = cand, f1
            break
        theta, f0 = cand, f1
    return theta, f0


def fit_ml(data, cfg=FitConfig(method="ml")):
    """Maximum likelihood estimate; ``objective`` is the minimized ``-log L``."""
    table, _, trunc, _ = _resolve(data, cfg)
    _check_support(table, trunc)
    distinct = sum(1 for _, o in table.classes if o > 0)
    if distinct < 2:
        raise NoConvergence("all observations fall in one class; the likelihood has no interior maximum")
    objective = _nll_objective(table, trunc)
    starts = _start_points(table, trunc, cfg)
    raw, _, _, tried = _multistart(objective, starts, trunc, cfg)
    n = float(table.observed.sum())

    def grad(th):
        return ml_gradient(th, table, trunc)

    theta, value = _newton_polish(
        objective, grad, lambda th: _fd_jacobian(grad, th, trunc), raw, trunc, tol=1e-9 * n
    )
    try:
        gnorm = float(np.linalg.norm(grad(theta)))
    except _FAILURES:
        gnorm = math.inf
    params = LerchParams(*map(float, theta))
    cov = None
    if cfg.covariance:
        try:
            cov = ml_covariance(params, table, trunc)
        except (SingularMatrix, *_FAILURES):
            cov = None
    return FitResult(
        params, trunc, "ml", float(value), cov, gnorm < 1e-5 * n, tried,
        extra={"gradient_norm": gnorm},
    )


def ml_covariance(params, data, truncation=None):
    """Inverse observed information, from central differences of the analytic gradient."""
    table, trunc = _table_and_trunc(data, truncation)
    theta = np.array(_as_tuple(params))
    hess = _fd_jacobian(lambda th: ml_gradient(th, table, trunc), theta, trunc)
    hess = 0.5 * (hess + hess.T)
    return _psd_inverse(hess)


# -- method of moments -------------------------------------------------------------------

def _moments(theta, trunc, orders=(1, 2, 3)):
    d = LerchDist(theta[0], theta[1], theta[2], trunc.a, trunc.b)
    return np.array([d.moment_uncorrected(r) for r in orders])


def fit_mm(data, cfg=FitConfig(method="mm")):
    """Match the first three raw moments by least squares.

    ``converged`` reports whether the scaled residual fell below 1e-10; a
    non-matching local minimum is still returned so callers can inspect it.
    """
    table, _, trunc, _ = _resolve(data, cfg)
    _check_support(table, trunc)
    distinct = sum(1 for _, o in table.classes if o > 0)
    if distinct < 3:
        raise NoSolution(f"method of moments needs at least 3 distinct classes, got {distinct}")
    target = np.array([table.sample_moment(r) for r in (1, 2, 3)])
    if not np.all(np.isfinite(target)):
        raise NoSolution("sample moments are not finite")
    scale = np.maximum(1.0, target)

    def residual(th):
        return (_moments(th, trunc) - target) / scale

    def objective(raw):
        if _dist_or_none(raw, trunc) is None:
            return math.inf
        try:
            return float(np.sum(residual(raw) ** 2))
        except _FAILURES:
            return math.inf

    starts = _start_points(table, trunc, cfg)
    raw, _, _, tried = _multistart(objective, starts, trunc, cfg, good_enough=MM_FLOOR)
    theta, value = _newton_polish(
        objective, residual, lambda th: _fd_jacobian(residual, th, trunc),
        raw, trunc, tol=1e-14,
    )
    if value >= MM_FLOOR:
        # measured in the search coordinates so that optima on the v = -a edge count as stationary
        grad = _unconstrained_gradient(objective, theta, trunc.a)
        if not np.linalg.norm(grad) <= MM_GRAD_TOL:
            raise NoSolution(
                f"moment equations not solved (residual {value:.3g}, gradient {np.linalg.norm(grad):.3g})"
            )
    params = LerchParams(*map(float, theta))
    cov = None
    if cfg.covariance:
        try:
            cov = mm_covariance(params, table, trunc)
        except (SingularMatrix, *_FAILURES):
            cov = None
    return FitResult(params, trunc, "mm", float(value), cov, value < MM_FLOOR, tried)


def mm_covariance(params, data, truncation=None):
    """Delta-method covariance of the moment estimator.

    ``data`` is a table (its total is the sample size) or the sample size
    itself.
    """
    if isinstance(data, (int, float)):
        n, trunc = float(data), truncation or Truncation()
    else:
        table, trunc = _table_and_trunc(data, truncation)
        n = float(table.n_total)
    theta = np.array(_as_tuple(params))
    jac = _fd_jacobian(lambda th: _moments(th, trunc), theta, trunc)
    if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e12:
        raise SingularMatrix("moment Jacobian is numerically singular")
    mu = _moments(theta, trunc, orders=range(1, 7))
    raw = np.concatenate([[1.0], mu])
    v = np.array([[raw[r + q] - raw[r] * raw[q] for q in (1, 2, 3)] for r in (1, 2, 3)]) / n
    inv = np.linalg.inv(jac)
    cov = inv @ v @ inv.T
    return 0.5 * (cov + cov.T)


# -- shared helpers --------------------------------------------------------------------------

def _as_tuple(params):
    if isinstance(params, LerchParams):
        return params.as_tuple()
    return tuple(float(p) for p in params)


def _table_and_trunc(data, truncation):
    if isinstance(data, Dataset):
        return data.table, truncation or data.truncation
    return data, truncation or Truncation()


def _psd_inverse(hess):
    if not np.all(np.isfinite(hess)):
        raise SingularMatrix("information matrix has non-finite entries")
    try:
        eig = np.linalg.eigvalsh(hess)
    except np.linalg.LinAlgError:
        raise SingularMatrix("information matrix eigen-decomposition failed") from None
    if eig[0] <= 1e-12 * max(1.0, eig[-1]):
        raise SingularMatrix("observed information is not positive definite")
    cov = np.linalg.inv(hess)
    return 0.5 * (cov + cov.T)


def ssd(data, params, truncation=None):
    """Sum of squared deviations between model masses and relative frequencies."""
    table, trunc = _table_and_trunc(data, truncation)
    return _ssd(table, LerchDist(*_as_tuple(params), trunc.a, trunc.b))


def fit(data, cfg):
    """Dispatch on ``cfg.method``."""
    return {"mm": fit_mm, "ml": fit_ml, "minchi2": fit_minchi2}[cfg.method](data, cfg)
