"""Lerch's transcendent and its first-order partial derivatives.

All routines sum the defining series

    Phi(z, s, v) = sum_{n>=0} z**n / (n + v)**s,    0 < z < 1, v > 0,

directly, in forward order and in blocks of numpy-evaluated terms.  The
series is stopped once the term ratio has turned over and a geometric bound
on the remaining tail falls below ``rel_tol`` times the partial sum.  The
kept terms are added with :func:`math.fsum`, so the only errors left are the
certified tail and the rounding of the individual terms, both of which are
reported in :attr:`PhiResult.error_bound`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence

__all__ = [
    "PhiResult",
    "DEFAULT_TERM_BUDGET",
    "term_budget",
    "phi",
    "phi_dz",
    "phi_ds",
    "phi_dv",
    "lerch_tail",
    "phi_shift_identity",
]

DEFAULT_TERM_BUDGET = 10_000_000
TERM_LIMIT = 1e300
_LOG_TERM_LIMIT = math.log(TERM_LIMIT)
_EPS = np.finfo(float).eps
_RATIO_SLACK = 1.0 + 1e-9
# below this the sum leaves the normal double range and only an absolute bound is kept
_LOG_TINY = math.log(np.finfo(float).tiny)
_TINY = float(np.finfo(float).tiny)
_FIRST_BLOCK = 64
_MAX_BLOCK = 1 << 16


@dataclass(frozen=True)
class PhiResult:
    """A series value together with a bound on its absolute error."""

    value: float
    error_bound: float
    terms_used: int

    def __float__(self):
        return self.value


def term_budget():
    """Maximum number of series terms, overridable via ``LERCHKIT_TERM_BUDGET``."""
    raw = os.environ.get("LERCHKIT_TERM_BUDGET")
    if raw is None:
        return DEFAULT_TERM_BUDGET
    try:
        budget = int(raw)
    except ValueError:
        raise DomainError(f"LERCHKIT_TERM_BUDGET must be an integer, got {raw!r}") from None
    if budget < 1:
        raise DomainError("LERCHKIT_TERM_BUDGET must be positive")
    return budget


def _check(z, s, v, start, rel_tol):
    z = float(z)
    s = float(s)
    v = float(v)
    if not 0.0 < z < 1.0:
        raise DomainError(f"z must lie in (0, 1), got {z!r}")
    if not math.isfinite(s):
        raise DomainError(f"s must be finite, got {s!r}")
    if not math.isfinite(v) or v + start <= 0.0:
        if start:
            raise DomainError(f"v must satisfy v > -{start}, got {v!r}")
        raise DomainError(f"v must be positive, got {v!r}")
    if not 0.0 < rel_tol < 1.0:
        raise DomainError(f"rel_tol must lie in (0, 1), got {rel_tol!r}")
    return z, s, v


def _series(z, s, v, start, rel_tol, kind):
    """Sum one of the three term families from index ``start`` onwards.

    kind "phi": z**n (n+v)**-s
    kind "dz":  n z**(n-1) (n+v)**-s
    kind "ds":  -log(n+v) z**n (n+v)**-s
    """
    z, s, v = _check(z, s, v, start, rel_tol)
    budget = term_budget()
    log_z = math.log(z)
    if kind == "dz" and start == 0:
        start = 1
    # the ds prefix ratio log(k+1+v)/log(k+v) is only decreasing once k+v > 1
    first_stop = start
    if kind == "ds":
        first_stop = max(start, math.ceil(2.0 - v))

    kept = []
    abs_total = 0.0
    round_total = 0.0
    n0 = start
    block = _FIRST_BLOCK
    while True:
        if n0 - start >= budget:
            raise NoConvergence(
                f"Lerch series did not converge within {budget} terms "
                f"(z={z}, s={s}, v={v})"
            )
        n = np.arange(n0, n0 + block + 1, dtype=float)
        log_base = np.log(n + v)
        log_t = n * log_z - s * log_base
        # arguments of exp carry an absolute rounding error of about this many ulps
        arg_scale = np.abs(n * log_z) + np.abs(s * log_base) + 4.0
        if kind == "dz":
            log_t += np.log(n) - log_z
            arg_scale += np.abs(np.log(n)) + abs(log_z)
            sign = 1.0
        elif kind == "ds":
            with np.errstate(divide="ignore"):
                log_t += np.log(np.abs(log_base))
            sign = -np.sign(log_base)
        else:
            sign = 1.0
        if log_t.max() > _LOG_TERM_LIMIT:
            raise OverflowError(
                f"Lerch series term exceeds {TERM_LIMIT:g} (z={z}, s={s}, v={v})"
            )
        mag = np.exp(log_t)
        terms = sign * mag

        with np.errstate(invalid="ignore", over="ignore"):
            ratio = np.exp(log_t[1:] - log_t[:-1])
        k_next = n[1:]
        if kind == "phi":
            prefix = 1.0
        elif kind == "dz":
            prefix = (k_next + 1.0) / k_next
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                prefix = np.log(k_next + 1.0 + v) / np.log(k_next + v)
        r_star = np.maximum(ratio, z * prefix) * _RATIO_SLACK
        partial = abs_total + np.cumsum(mag)[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = mag[1:] * r_star / (1.0 - r_star)
        # half the tolerance goes to the tail, the rest is headroom for rounding
        ok = (ratio < 1.0) & (r_star < 1.0) & (tail < 0.5 * rel_tol * partial)
        # decreasing terms that are already subnormal cannot move a normal sum
        ok |= (ratio < 1.0) & (r_star < 1.0) & (log_t[1:] < _LOG_TINY + math.log(rel_tol))
        ok &= n[:-1] >= first_stop
        hits = np.flatnonzero(ok)
        if hits.size:
            i = int(hits[0])
            kept.append(terms[: i + 2])
            abs_total = float(partial[i])
            round_total += float(np.dot(mag[: i + 2], arg_scale[: i + 2]))
            tail_bound = float(tail[i])
            used = n0 + i + 2 - start
            break
        kept.append(terms[:-1])
        abs_total = float(partial[-1] - mag[-1])
        round_total += float(np.dot(mag[:-1], arg_scale[:-1]))
        n0 += block
        block = min(2 * block, _MAX_BLOCK)

    value = math.fsum(np.concatenate(kept))
    error = float(tail_bound + _EPS * round_total)
    scale = abs_total if kind == "ds" else abs(value)
    if error > rel_tol * scale and scale >= _TINY:
        raise NoConvergence(
            f"rounding error {error:.3g} exceeds the requested tolerance "
            f"(rel_tol={rel_tol:g}, z={z}, s={s}, v={v})"
        )
    return PhiResult(value, error, int(used))


def lerch_tail(z, s, v, start=0, rel_tol=1e-12, kind="phi"):
    """Sum of the ``kind`` series over indices ``n >= start``.

    For ``kind="phi"`` this equals ``z**start * Phi(z, s, v + start)`` but is
    computed without forming ``z**start`` separately, so it neither under- nor
    overflows when the product is representable.  ``v`` only has to satisfy
    ``v + start > 0``.
    """
    if kind not in ("phi", "dz", "ds"):
        raise DomainError(f"unknown series kind {kind!r}")
    start = int(start)
    if start < 0:
        raise DomainError("start must be nonnegative")
    return _series(z, s, v, start, rel_tol, kind)


def phi(z, s, v, rel_tol=1e-12):
    """Lerch's transcendent for ``0 < z < 1``, real ``s`` and ``v > 0``."""
    return _series(z, s, v, 0, rel_tol, "phi")


def phi_dz(z, s, v, rel_tol=1e-12):
    """Partial derivative of Phi with respect to z, summed term by term."""
    return _series(z, s, v, 0, rel_tol, "dz")


def phi_ds(z, s, v, rel_tol=1e-12):
    """Partial derivative of Phi with respect to s.

    The series has mixed signs when ``v < 1``; the stopping rule and the
    reported error bound are relative to the sum of absolute terms.
    """
    return _series(z, s, v, 0, rel_tol, "ds")


def phi_dv(z, s, v, rel_tol=1e-12):
    """Partial derivative of Phi with respect to v, i.e. ``-s Phi(z, s+1, v)``."""
    if s == 0:
        _check(z, s, v, 0, rel_tol)
        return PhiResult(0.0, 0.0, 1)
    res = _series(z, s + 1.0, v, 0, rel_tol, "phi")
    return PhiResult(-s * res.value, abs(s) * res.error_bound, res.terms_used)


def phi_shift_identity(z, s, v, m):
    """Both sides of ``Phi(z,s,v) = z**m Phi(z,s,v+m) + sum_{x<m} z**x (x+v)**-s``."""
    m = int(m)
    if m < 0:
        raise DomainError("m must be nonnegative")
    lhs = phi(z, s, v).value
    head = [z**x * (x + v) ** -s for x in range(m)]
    rhs = math.fsum([z**m * phi(z, s, v + m).value, *head])
    return lhs, rhs
