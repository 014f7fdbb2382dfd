import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lerchkit.distribution import STIRLING_FIRST, LerchDist, LerchParams, Truncation, vmr_threshold
from lerchkit.errors import DomainError
from lerchkit.phi import phi

from conftest import random_params

URCHIN40 = (0.00773867, -8.26894, 1.11633)
SOWBUG = (0.913315, 2.37621, 9.63785)
DEATH = (0.189628, -7.10717, 2.81275)
YUNOKO = (0.219158, -0.214704, -0.998437)


def support_grid(d, tail=1e-15):
    """Support points carrying all but ``tail`` of the mass."""
    if d.b is not None:
        return np.arange(d.a, d.b + 1)
    hi = d.a + 64
    while d.survival(hi) > tail:
        hi *= 2
    return np.arange(d.a, hi + 1)


def direct_moment(d, f):
    x = support_grid(d)
    return math.fsum(f(x.astype(float)) * d.pmf(x))


def mixed_dists(rng, n):
    """Untruncated, zero-truncated and doubly truncated members."""
    out = []
    for i, (z, s, v) in enumerate(random_params(rng, n)):
        kind = i % 3
        if kind == 0:
            out.append(LerchDist(z, s, v))
        elif kind == 1:
            out.append(LerchDist(z, s, v - 0.9, a=1))
        else:
            a = int(rng.integers(0, 4))
            out.append(LerchDist(z, s, v, a=a, b=a + int(rng.integers(0, 12))))
    return out


# -- construction -------------------------------------------------------------------

def test_truncation_validation():
    assert Truncation().is_full
    assert not Truncation(1).is_full
    with pytest.raises(DomainError):
        Truncation(-1)
    with pytest.raises(DomainError):
        Truncation(3, 2)
    with pytest.raises(DomainError):
        Truncation(0.5)


@pytest.mark.parametrize(
    "params, a, fragment",
    [((0.0, 1, 1), 0, "z"), ((1.0, 1, 1), 0, "z"), ((0.5, 1, 0.0), 0, "v > 0"), ((0.5, 1, -1.0), 1, "v > -a")],
)
def test_parameter_errors_name_the_constraint(params, a, fragment):
    with pytest.raises(DomainError, match=fragment):
        LerchDist(*params, a=a)


def test_parameters_are_read_only():
    d = LerchDist(0.5, 1, 1)
    with pytest.raises(AttributeError):
        d.z = 0.3
    assert d.params == LerchParams(0.5, 1.0, 1.0)


def test_norm_formulas():
    z, s, v = 0.4, 1.3, 0.7
    assert LerchDist(z, s, v).norm == pytest.approx(phi(z, s, v).value, rel=1e-13)
    assert LerchDist(z, s, v, a=1).norm == pytest.approx(z * phi(z, s, v + 1).value, rel=1e-12)
    finite = LerchDist(z, s, v, a=2, b=5).norm
    assert finite == pytest.approx(sum(z**x * (v + x) ** -s for x in range(2, 6)), rel=1e-14)


# -- pmf and friends ------------------------------------------------------------------

def test_published_masses():
    assert LerchDist(*URCHIN40).pmf(0) == pytest.approx(28.0876 / 80, abs=5e-6)
    assert LerchDist(*URCHIN40).pmf(1) == pytest.approx(43.0737 / 80, abs=5e-6)
    assert LerchDist(*SOWBUG).pmf(0) == pytest.approx(29.2839 / 122, abs=5e-6)


def test_outside_support_is_zero():
    d = LerchDist(0.5, 1, 1, a=2, b=6)
    assert d.pmf(1) == 0.0
    assert d.pmf(7) == 0.0
    assert d.logpmf(1) == -math.inf
    assert np.all(d.pmf(np.array([0, 1, 7, 9])) == 0)


def test_normalization(rng):
    for d in mixed_dists(rng, 30):
        x = support_grid(d, tail=1e-12)
        tail = d.survival(x[-1] + 1)
        assert math.fsum(d.pmf(x)) + tail == pytest.approx(1.0, abs=1e-8)


def test_geometric_oracles():
    d = LerchDist(0.5, 0, 1)
    assert d.cdf(3) == pytest.approx(0.9375, abs=1e-11)
    assert d.survival(2) == pytest.approx(0.25, abs=1e-11)
    assert d.quantile(0.9375) == 3
    assert d.mean() == pytest.approx(1.0, rel=1e-12)
    assert d.variance() == pytest.approx(2.0, rel=1e-12)


def test_cdf_survival_edges():
    d = LerchDist(0.6, 0.8, 1.5, a=2, b=9)
    assert d.cdf(1) == 0.0
    assert d.cdf(9) == 1.0
    assert d.cdf(2) == pytest.approx(d.pmf(2), rel=1e-13)
    assert d.survival(2) == 1.0
    assert d.survival(10) == 0.0
    u = LerchDist(0.6, 0.8, 1.5)
    assert u.cdf(400) == pytest.approx(1.0, abs=1e-15)


def test_telescoping_and_complement(rng):
    for d in mixed_dists(rng, 24):
        xs = support_grid(d, tail=1e-10)[:60]
        for x in xs:
            assert d.cdf(x) - d.cdf(x - 1) == pytest.approx(d.pmf(x), abs=1e-10)
            assert d.survival(x) + d.cdf(x - 1) == pytest.approx(1.0, abs=1e-12)


def test_hazard_examples():
    for z, v in [(0.3, 1.0), (0.8, 0.2)]:
        d = LerchDist(z, 0, v)
        for x in (0, 3, 17):
            assert d.hazard(x) == pytest.approx(1 - z, rel=1e-12)
    assert LerchDist(0.5, 2, 1).hazard(0) > LerchDist(0.5, 2, 1).hazard(5)
    assert LerchDist(0.5, -2, 1).hazard(0) < LerchDist(0.5, -2, 1).hazard(5)
    with pytest.raises(DomainError):
        LerchDist(0.5, 2, 1, a=1).hazard(0)


def test_hazard_closed_form():
    z, s, v = 0.45, 1.7, 0.8
    d = LerchDist(z, s, v)
    for x in (0, 2, 9):
        assert d.hazard(x) == pytest.approx(1 / ((v + x) ** s * phi(z, s, v + x).value), rel=1e-11)


def test_hazard_monotone_by_sign_of_s(rng):
    for z, s, v in random_params(rng, 24, s=(-5, 5)):
        if abs(s) < 0.05:
            continue
        h = np.array([LerchDist(z, s, v).hazard(x) for x in range(51)])
        steps = np.diff(h)
        assert np.all(steps < 0) if s > 0 else np.all(steps > 0), (z, s, v)


def test_quantile_round_trip(rng):
    for d in mixed_dists(rng, 12):
        for x in support_grid(d, tail=1e-6)[:30]:
            c = d.cdf(x)
            if d.pmf(x) > 1e-12 and c < 1.0:
                assert d.quantile(c) == x
        assert d.quantile(d.pmf(d.a) / 2) == d.a
    with pytest.raises(DomainError):
        LerchDist(0.5, 0, 1).quantile(1.0)


@given(q=st.floats(1e-9, 1 - 1e-9), s=st.floats(-4, 4))
def test_quantile_is_generalized_inverse(q, s):
    d = LerchDist(0.6, s, 1.3)
    x = d.quantile(q)
    assert d.cdf(x) >= q
    assert x == d.a or d.cdf(x - 1) < q


# -- generating functions ---------------------------------------------------------------

def test_pgf():
    d = LerchDist(0.3, 1, 1)
    assert d.pgf(1.0) == 1.0
    assert d.pgf(0.0) == d.pmf(0)
    zt = LerchDist(0.3, 1, 1, a=1)
    y = 0.5
    closed = y * phi(y * 0.3, 1, 2).value / phi(0.3, 1, 2).value
    direct = math.fsum(y**x * zt.pmf(x) for x in range(1, 61))
    assert zt.pgf(y) == pytest.approx(closed, rel=1e-12)
    assert zt.pgf(y) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(DomainError):
        d.pgf(4.0)


def test_mgf():
    d = LerchDist(0.3, 1, 1)
    assert d.mgf(0.0) == 1.0
    assert d.mgf(-700) == pytest.approx(d.pmf(0), rel=1e-12)
    direct = math.fsum(math.exp(0.1 * x) * d.pmf(x) for x in range(201))
    assert d.mgf(0.1) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(DomainError):
        d.mgf(-math.log(0.3))


def test_mgf_derivatives_give_moments():
    d = LerchDist(0.3, 1, 1)
    h = 1e-4
    m1 = (d.mgf(h) - d.mgf(-h)) / (2 * h)
    m2 = (d.mgf(h) - 2 * d.mgf(0.0) + d.mgf(-h)) / h**2
    assert m1 == pytest.approx(d.moment_uncorrected(1), rel=1e-4)
    assert m2 == pytest.approx(d.moment_uncorrected(2), rel=1e-4)


# -- moments ------------------------------------------------------------------------------

def test_geometric_moments():
    for z in (0.2, 0.7):
        d = LerchDist(z, 0, 2.5)
        assert d.mean() == pytest.approx(z / (1 - z), rel=1e-12)
        # the printed variance formula subtracts terms of size (v + mean)**2
        assert d.variance() == pytest.approx(z / (1 - z) ** 2, rel=1e-9)
        assert d.moment_central(2) == pytest.approx(z / (1 - z) ** 2, rel=1e-10)
        assert d.moment_factorial(2) == pytest.approx(2 * z**2 / (1 - z) ** 2, rel=1e-10)


def test_degenerate_window():
    d = LerchDist(0.4, 1.5, 2.0, a=3, b=3)
    assert d.mean() == pytest.approx(3.0, rel=1e-13)
    assert d.variance() == pytest.approx(0.0, abs=1e-12)
    assert d.moment_central(3) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize(
    "dist",
    [
        LerchDist(*DEATH),
        LerchDist(*SOWBUG),
        LerchDist(0.3, 1, 1, a=1),
        LerchDist(*YUNOKO, a=1, b=6),
    ],
    ids=["death", "sowbug", "zero-truncated", "yunoko"],
)
def test_mean_and_variance_against_direct_sums(dist):
    mu = direct_moment(dist, lambda x: x)
    assert dist.mean() == pytest.approx(mu, rel=1e-9)
    assert dist.moment_uncorrected(1) == pytest.approx(dist.mean(), rel=1e-9)
    assert dist.variance() == pytest.approx(direct_moment(dist, lambda x: (x - mu) ** 2), rel=1e-8)
    assert dist.variance() == pytest.approx(dist.moment_central(2), rel=1e-9)


def test_third_central_and_second_factorial_oracles():
    d = LerchDist(0.3, 1, 1)
    mu = direct_moment(d, lambda x: x)
    assert d.moment_central(3) == pytest.approx(direct_moment(d, lambda x: (x - mu) ** 3), rel=1e-9)
    assert d.moment_factorial(2) == pytest.approx(direct_moment(d, lambda x: x * (x - 1)), rel=1e-9)
    assert d.moment_factorial(1) == pytest.approx(d.mean(), rel=1e-12)


def test_moment_formulas_on_random_sets(rng):
    for d in mixed_dists(rng, 21):
        mu = direct_moment(d, lambda x: x)
        for r in range(1, 5):
            want = direct_moment(d, lambda x: x**r)
            assert d.moment_uncorrected(r) == pytest.approx(want, rel=1e-7)
            if r >= 2:
                want_c = direct_moment(d, lambda x: (x - mu) ** r)
                assert d.moment_central(r) == pytest.approx(want_c, rel=1e-7, abs=1e-9 * d.moment_uncorrected(r))
        for r in range(1, 5):
            falling = lambda x: np.prod([x - k for k in range(r)], axis=0)  # noqa: E731
            # Stirling conversion cancels; judge against the size of the terms it combines
            scale = sum(abs(c) * d.moment_uncorrected(j + 1) for j, c in enumerate(STIRLING_FIRST[r]))
            assert d.moment_factorial(r) == pytest.approx(direct_moment(d, falling), abs=1e-7 * scale)


def test_moment_order_limits():
    d = LerchDist(0.3, 1, 1)
    d.moment_uncorrected(6)
    for bad in (0, 7, 1.5):
        with pytest.raises(DomainError):
            d.moment_uncorrected(bad)
    with pytest.raises(DomainError):
        d.moment_central(1)
    with pytest.raises(DomainError):
        d.moment_factorial(5)


def test_taylor_limit_of_the_mean():
    z = 1e-6
    for s, v in [(-2.0, 1.0), (1.5, 3.0), (0.3, 0.5)]:
        d = LerchDist(z, s, v)
        assert d.mean() == pytest.approx(z * v**s / (1 + v) ** s, rel=1e-4)


# -- shape -----------------------------------------------------------------------------------

def brute_mode(d, upto=None):
    x = support_grid(d, tail=1e-12) if upto is None else np.arange(d.a, upto + 1)
    return int(x[np.argmax(d.pmf(x))])


def test_mode_examples():
    d = LerchDist(0.5, -2, 1)
    assert d.mode() == 2 == brute_mode(d, 100)
    assert d.mode_closed_forms() == (2, 2)
    assert LerchDist(0.5, 1, 2).mode() == 0
    death = LerchDist(*DEATH)
    assert death.mode() == brute_mode(death, 60) == 1


def test_mode_on_strongly_unimodal_sets(rng):
    checked = 0
    while checked < 100:
        z, s, v = float(rng.uniform(0.05, 0.95)), float(rng.uniform(-12, -0.1)), float(rng.uniform(1, 10))
        d = LerchDist(z, s, v)
        first, second = d.mode_closed_forms()
        if first != second:
            continue  # knife edge: the two closed forms straddle an integer
        assert d.is_strongly_unimodal()
        assert d.mode() == brute_mode(d) == max(first, 0)
        checked += 1


def test_mode_prefers_smaller_value_on_ties():
    # pmf(1)/pmf(0) = z ((v+1)/v)**-s = 1 when z = 2**s with v = 1
    d = LerchDist(0.25, -2, 1)
    assert d.pmf(0) == pytest.approx(d.pmf(1), rel=1e-14)
    assert d.mode() == 0


def test_strong_unimodality_rule():
    assert LerchDist(0.5, -1, 1).is_strongly_unimodal()
    assert not LerchDist(0.5, 1, 2).is_strongly_unimodal()
    low_v = LerchDist(0.5, -1, 0.5)
    assert not low_v.is_strongly_unimodal()
    # log-concavity still holds here; the rule is sufficient, not necessary
    p = low_v.pmf(np.arange(0, 102))
    assert np.all(p[1:-1] ** 2 >= p[:-2] * p[2:] * (1 - 1e-12))


def test_rule_implies_log_concavity(rng):
    for z, s, v in random_params(rng, 20, s=(-8, -0.1), v=(1, 8)):
        d = LerchDist(z, s, v)
        assert d.is_strongly_unimodal()
        lp = d.logpmf(np.arange(0, 102))
        assert np.all(2 * lp[1:-1] >= lp[:-2] + lp[2:] - 1e-9)


def test_vmr_threshold():
    assert vmr_threshold(1) == pytest.approx(-math.log(2) / math.log(4 / 3), rel=1e-14)
    assert vmr_threshold(1) == pytest.approx(-2.4094, abs=1e-4)
    values = [vmr_threshold(v) for v in (0.5, 1, 2, 5, 50, 5000)]
    assert all(a > b for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        vmr_threshold(0)


@pytest.mark.parametrize("v", [0.5, 1, 2, 5])
def test_dispersion_sign_pattern(v):
    z = 1e-4
    t = vmr_threshold(v)
    under = LerchDist(z, t - 0.6, v)
    over = LerchDist(z, t + 0.6, v)
    assert under.variance() / under.mean() < 1
    assert over.variance() / over.mean() > 1
    if v == 1:
        assert LerchDist(z, -3, 1).variance() / LerchDist(z, -3, 1).mean() < 1
        assert LerchDist(z, -2, 1).variance() / LerchDist(z, -2, 1).mean() > 1
