"""The Lerch distribution, general and truncated.

The probability mass function on the support window ``a <= x <= b`` is

    p(x) = z**x (v + x)**-s / W,

where ``W`` sums the same kernel over the window.  Every function of the
distribution reduces to window sums of that kernel, possibly with ``s``
lowered by an integer (moments) or ``z`` rescaled (generating functions),
so the class below is a thin layer over :func:`lerchkit.phi.lerch_tail`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .phi import TERM_LIMIT, lerch_tail

__all__ = [
    "Truncation",
    "LerchParams",
    "LerchDist",
    "vmr_threshold",
    "STIRLING_FIRST",
]

MAX_MOMENT_ORDER = 6
# finite windows up to this length are summed directly
_DIRECT_MAX = 1_000_000
_TINY = float(np.finfo(float).tiny)
_LOG_TERM_LIMIT = math.log(TERM_LIMIT)

# signed Stirling numbers of the first kind s(r, j), j = 1..r
STIRLING_FIRST = {
    1: (1,),
    2: (-1, 1),
    3: (2, -3, 1),
    4: (-6, 11, -6, 1),
}


@dataclass(frozen=True)
class Truncation:
    """Support window ``[a, b]``; ``b=None`` stands for an infinite upper bound."""

    a: int = 0
    b: int | None = None

    def __post_init__(self):
        if int(self.a) != self.a or self.a < 0:
            raise DomainError(f"lower bound a must be a nonnegative integer, got {self.a!r}")
        object.__setattr__(self, "a", int(self.a))
        if self.b is not None:
            if int(self.b) != self.b:
                raise DomainError(f"upper bound b must be an integer, got {self.b!r}")
            object.__setattr__(self, "b", int(self.b))
            if self.b < self.a:
                raise DomainError(f"upper bound b={self.b} is below a={self.a}")

    @property
    def is_full(self):
        return self.a == 0 and self.b is None

    def contains(self, x):
        return x >= self.a and (self.b is None or x <= self.b)


@dataclass(frozen=True)
class LerchParams:
    z: float
    s: float
    v: float

    def check(self, trunc=Truncation()):
        if not (0.0 < self.z < 1.0):
            raise DomainError(f"z must lie in (0, 1), got {self.z!r}")
        if not math.isfinite(self.s):
            raise DomainError(f"s must be finite, got {self.s!r}")
        if not (math.isfinite(self.v) and self.v > -trunc.a):
            if trunc.a == 0:
                raise DomainError(f"v must satisfy v > 0 for a=0, got v={self.v!r}")
            raise DomainError(f"v must satisfy v > -a = {-trunc.a}, got v={self.v!r}")

    def as_tuple(self):
        return (self.z, self.s, self.v)


def vmr_threshold(v):
    """Critical ``s`` at which the variance-to-mean ratio crosses 1 as ``z -> 0``."""
    v = float(v)
    if not v > 0:
        raise DomainError(f"v must be positive, got {v!r}")
    return -math.log(2.0) / math.log1p(1.0 / (v * v + 2.0 * v))


class LerchDist:
    """Lerch distribution with parameters ``(z, s, v)`` on ``[a, b]``.

    Instances are immutable; the normalizing window sum is computed once on
    construction.

    Parameters
    ----------
    z, s, v : float
        Shape parameters, ``0 < z < 1`` and ``v > -a``.
    a, b : int, optional
        Support window.  ``a=0, b=None`` is the untruncated distribution.
    rel_tol : float
        Relative tolerance handed to every series evaluation.
    """

    def __init__(self, z, s, v, a=0, b=None, rel_tol=1e-12):
        trunc = Truncation(a, b)
        params = LerchParams(float(z), float(s), float(v))
        params.check(trunc)
        self._params = params
        self._trunc = trunc
        self._rel_tol = rel_tol
        self._ratios = {0: 1.0}
        norm = self.window(0)
        if not norm >= _TINY or not math.isfinite(norm):
            raise DomainError(f"normalizing sum is not a positive normal float: {norm!r}")
        self._norm = norm

    @classmethod
    def from_params(cls, params, trunc=Truncation(), rel_tol=1e-12):
        return cls(params.z, params.s, params.v, trunc.a, trunc.b, rel_tol=rel_tol)

    z = property(lambda self: self._params.z)
    s = property(lambda self: self._params.s)
    v = property(lambda self: self._params.v)
    a = property(lambda self: self._trunc.a)
    b = property(lambda self: self._trunc.b)
    params = property(lambda self: self._params)
    truncation = property(lambda self: self._trunc)
    norm = property(lambda self: self._norm)

    def __repr__(self):
        z, s, v = self._params.as_tuple()
        extra = "" if self._trunc.is_full else f", a={self.a}, b={self.b}"
        return f"LerchDist(z={z!r}, s={s!r}, v={v!r}{extra})"

    # -- window sums -----------------------------------------------------

    def window(self, shift=0, lo=None, hi=None, zz=None, kind="phi"):
        """Sum of ``zz**x (v+x)**-(s-shift)`` over ``lo <= x <= hi``.

        ``lo``/``hi`` default to the support bounds and ``zz`` to ``z``.
        ``kind`` selects the derivative series ("dz" or "ds") instead.
        """
        lo = self.a if lo is None else int(lo)
        hi = self.b if hi is None else hi
        zz = self.z if zz is None else zz
        s = self.s - shift
        if hi is not None and hi < lo:
            return 0.0
        if hi is not None and hi - lo < _DIRECT_MAX:
            return _direct_window(zz, s, self.v, lo, hi, kind)
        head = lerch_tail(zz, s, self.v, lo, self._rel_tol, kind).value
        if hi is None:
            return head
        return head - lerch_tail(zz, s, self.v, hi + 1, self._rel_tol, kind).value

    def log_kernel(self, x):
        x = np.asarray(x, dtype=float)
        return x * math.log(self.z) - self.s * np.log(self.v + x)

    def norm_gradient(self):
        """Partial derivatives of the normalizing sum with respect to (z, s, v)."""
        d_z = self.window(kind="dz")
        d_s = self.window(kind="ds")
        d_v = -self.s * self.window(-1) if self.s != 0 else 0.0
        return np.array([d_z, d_s, d_v])

    # -- distribution functions ------------------------------------------

    def _in_support(self, x):
        x = np.asarray(x)
        mask = x >= self.a
        if self.b is not None:
            mask &= x <= self.b
        return mask

    def pmf(self, x):
        """Probability mass at integer ``x``; zero outside the support."""
        xa = np.asarray(x)
        inside = self._in_support(xa)
        safe = np.where(inside, xa, self.a)
        with np.errstate(over="ignore"):
            out = np.where(inside, np.exp(self.log_kernel(safe)) / self._norm, 0.0)
        return float(out) if out.ndim == 0 else out

    def logpmf(self, x):
        xa = np.asarray(x)
        inside = self._in_support(xa)
        safe = np.where(inside, xa, self.a)
        out = np.where(inside, self.log_kernel(safe) - math.log(self._norm), -np.inf)
        return float(out) if out.ndim == 0 else out

    def survival(self, x):
        """``Pr(X >= x)``."""
        x = math.floor(x)
        if x <= self.a:
            return 1.0
        if self.b is not None and x > self.b:
            return 0.0
        return min(1.0, self.window(0, lo=x) / self._norm)

    def cdf(self, x):
        """``Pr(X <= x)``."""
        x = math.floor(x)
        if x < self.a:
            return 0.0
        if self.b is not None and x >= self.b:
            return 1.0
        if x - self.a < 4096:
            return min(1.0, self.window(0, hi=x) / self._norm)
        return max(0.0, 1.0 - self.survival(x + 1))

    def hazard(self, x):
        """``Pr(X = x) / Pr(X >= x)`` for ``x`` in the support."""
        if int(x) != x or not self._trunc.contains(x):
            raise DomainError(f"hazard is only defined on the support, got x={x!r}")
        x = int(x)
        return math.exp(float(self.log_kernel(x))) / self.window(0, lo=x)

    def envelope_guess(self, u):
        """Inverse of ``1 - z**(x+1)`` clamped to the support."""
        if u <= 0.0:
            return self.a
        if u >= 1.0:
            raise DomainError("u must be below 1")
        log_z = math.log(self.z)
        x = math.ceil(math.log1p(-u) / log_z) - 1
        # ceil() of a value that should be an exact integer can overshoot by one
        while x > self.a and -math.expm1(x * log_z) >= u:
            x -= 1
        x = max(self.a, x)
        if self.b is not None:
            x = min(self.b, x)
        return x

    def quantile(self, q):
        """Smallest supported ``x`` with ``cdf(x) >= q``."""
        if not 0.0 < q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {q!r}")
        x = self.envelope_guess(q)
        if self.cdf(x) >= q:
            lo, hi = self.a - 1, x
        else:
            lo, step = x, 1
            hi = x + step
            while self.cdf(hi) < q:
                lo = hi
                step *= 2
                hi = x + step
                if self.b is not None and hi >= self.b:
                    hi = self.b
                    break
        # invariant: cdf(lo) < q <= cdf(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.cdf(mid) >= q:
                hi = mid
            else:
                lo = mid
        return int(hi)

    def pgf(self, y):
        """Probability generating function ``E[y**X]`` for ``0 <= y < 1/z``."""
        y = float(y)
        if y < 0 or not y * self.z < 1.0:
            raise DomainError(f"pgf needs 0 <= y and y*z < 1, got y={y!r}")
        if y == 0.0:
            return self.pmf(0)
        if y == 1.0:
            return 1.0
        return self.window(0, zz=y * self.z) / self._norm

    def mgf(self, t):
        """Moment generating function ``E[exp(t X)]``; needs ``z e**t < 1``."""
        t = float(t)
        if t + math.log(self.z) >= 0.0:
            raise DomainError(f"mgf needs z*exp(t) < 1, got t={t!r}")
        return self.pgf(math.exp(t))

    # -- moments -----------------------------------------------------------

    def _ratio(self, j):
        # window sum with s lowered by j, relative to the normalizing sum
        cache = self._ratios
        if j not in cache:
            cache[j] = self.window(j) / self._norm
        return cache[j]

    def mean(self):
        return self._ratio(1) - self.v

    def variance(self):
        w = self.v + self.mean()
        var = w * w + (-2.0 * w * self._ratio(1) + self._ratio(2))
        return max(var, 0.0)

    def moment_uncorrected(self, r):
        """``E[X**r]`` for ``1 <= r <= 6`` via the binomial expansion in ``x + v``."""
        r = _check_order(r, 1)
        terms = [math.comb(r, j) * (-self.v) ** (r - j) * self._ratio(j) for j in range(r + 1)]
        return math.fsum(terms)

    def moment_central(self, r):
        """``E[(X - mean)**r]`` for ``2 <= r <= 6``."""
        r = _check_order(r, 2)
        w = self._ratio(1)
        terms = [
            (-1) ** (r - j) * math.comb(r, j) * self._ratio(j) * w ** (r - j)
            for j in range(r + 1)
        ]
        return math.fsum(terms)

    def moment_factorial(self, r):
        """``E[X (X-1) ... (X-r+1)]`` for ``1 <= r <= 4``."""
        r = int(r)
        if r not in STIRLING_FIRST:
            raise DomainError(f"factorial moments are available for r in 1..4, got {r}")
        coeffs = STIRLING_FIRST[r]
        return math.fsum(c * self.moment_uncorrected(j + 1) for j, c in enumerate(coeffs))

    # -- shape -------------------------------------------------------------

    def mode(self):
        """Most probable value; ties resolve to the smaller ``x``."""
        if self.s >= 0:
            return self.a
        # pmf ratio p(x)/p(x-1) = z (1 + 1/(v+x-1))**-s stays >= 1 up to this x
        expo = math.log(self.z) / self.s
        try:
            edge = 1.0 / math.expm1(expo) - self.v
        except OverflowError:
            edge = -self.v
        x = self.a if edge + 1 <= self.a else math.floor(edge) + 1
        if self.b is not None:
            x = min(x, self.b)
        x = max(x, self.a)
        lk = lambda k: float(self.log_kernel(k))  # noqa: E731
        while x > self.a and lk(x - 1) >= lk(x):
            x -= 1
        while (self.b is None or x < self.b) and lk(x + 1) > lk(x):
            x += 1
        return int(x)

    def mode_closed_forms(self):
        """The two bracketed closed forms for the mode (``s < 0``), unclamped."""
        if self.s >= 0:
            raise DomainError("closed-form mode needs s < 0")
        zs = self.z ** (1.0 / self.s)
        first = math.floor(1.0 / (zs - 1.0) - self.v) + 1
        second = math.floor(1.0 / (1.0 - self.z ** (-1.0 / self.s)) - self.v)
        return first, second

    def is_strongly_unimodal(self):
        return self.s < 0 and self.v >= 1


def _check_order(r, low):
    if int(r) != r or not low <= r <= MAX_MOMENT_ORDER:
        raise DomainError(f"moment order must be an integer in {low}..{MAX_MOMENT_ORDER}, got {r!r}")
    return int(r)


def _direct_window(z, s, v, lo, hi, kind):
    x = np.arange(lo, hi + 1, dtype=float)
    log_base = np.log(v + x)
    log_t = x * math.log(z) - s * log_base
    if log_t.max() > _LOG_TERM_LIMIT:
        raise OverflowError(f"Lerch kernel term exceeds {TERM_LIMIT:g} (z={z}, s={s}, v={v})")
    t = np.exp(log_t)
    if kind == "dz":
        t = t * x / z
    elif kind == "ds":
        t = -t * log_base
    return math.fsum(t)
