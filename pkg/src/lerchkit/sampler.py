"""Exact Lerch variates by inversion with a geometric first guess.

A uniform ``u`` is first inverted through the geometric c.d.f.
``H(x) = 1 - z**(x+1)``, which is available in closed form.  The Lerch c.d.f.
``F`` differs from ``H`` only through the factor
``Phi(z, s, v+x+1) / Phi(z, s, v)``, which is at most 1 for ``s > 0`` and at
least 1 for ``s < 0``.  Hence ``H <= F`` when ``s > 0`` and ``H >= F`` when
``s < 0``, and the sequential search that corrects the guess to
``min{k : F(k) >= u}`` only ever moves down or up, respectively.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DomainError, NoConvergence

__all__ = ["Direction", "SamplerState", "default_rng", "MAX_SEARCH_STEPS"]

MAX_SEARCH_STEPS = 1_000_000


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"
    EXACT = "exact"
    # truncated windows lose the ordering; the search direction is decided per draw
    EITHER = "either"


def default_rng(seed=None):
    """Counter-based 64-bit generator (Philox) used throughout the package."""
    if seed is not None:
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def _uniform_source(rng):
    if rng is None or isinstance(rng, (int, np.integer)):
        gen = default_rng(rng)
        return gen.random
    if hasattr(rng, "random"):
        return rng.random
    if callable(rng):
        return rng
    raise TypeError("rng must be a seed, a numpy Generator or a callable returning uniforms")


class SamplerState:
    """Draws from one :class:`~lerchkit.distribution.LerchDist`.

    The state owns its uniform source and a cache of c.d.f. values, so one
    instance must not be shared between threads.
    """

    def __init__(self, dist, rng=None):
        self.dist = dist
        self._uniform = _uniform_source(rng)
        self._cdf_cache = {}
        if not dist.truncation.is_full:
            self.direction = Direction.EITHER
        elif dist.s > 0:
            self.direction = Direction.DOWN
        elif dist.s < 0:
            self.direction = Direction.UP
        else:
            self.direction = Direction.EXACT

    def _F(self, x):
        val = self._cdf_cache.get(x)
        if val is None:
            val = self._cdf_cache[x] = self.dist.cdf(x)
        return val

    def first_guess(self, u):
        """Inverse of the geometric envelope c.d.f., clamped to the support."""
        if not 0.0 <= u < 1.0:
            raise DomainError(f"u must lie in [0, 1), got {u!r}")
        return self.dist.envelope_guess(u)

    def invert(self, u):
        """Map one uniform to ``min{k : F(k) >= u}``.

        Returns the variate and the signed number of correction steps taken
        from the first guess (negative when searching down).
        """
        x0 = self.first_guess(u)
        if self.direction is Direction.EXACT:
            return x0, 0
        dist = self.dist
        x = x0
        if self._F(x) >= u:
            while x > dist.a and self._F(x - 1) >= u:
                x -= 1
                if x0 - x > MAX_SEARCH_STEPS:
                    raise NoConvergence("sequential search exceeded the step limit")
        else:
            while self._F(x) < u:
                if dist.b is not None and x >= dist.b:
                    break
                x += 1
                if x - x0 > MAX_SEARCH_STEPS:
                    raise NoConvergence("sequential search exceeded the step limit")
        return x, x - x0

    def sample(self):
        return self.invert(self._uniform())[0]

    def sample_n(self, n):
        n = int(n)
        if n < 0:
            raise DomainError("n must be nonnegative")
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            out[i] = self.sample()
        return out
