import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from btm_lab import InvalidParameter, Landscape, PreconditionViolation
from btm_lab.bounds import (
    BoundCheck,
    b_k,
    b_k_complement,
    b_k_sweep,
    cauchy_schwarz_check,
    confinement_check,
    confinement_sites,
    corollary_bound,
    diag_heat_bound,
    laplace_constant,
    laplace_deficit,
    laplace_ratio,
    locallem_bound,
    locallem_factors,
    maxsum_on_loc_event,
    nearbound_check,
    sum_tail_bound,
    verify_corollary,
    verify_locallem,
    volume,
)
from btm_lab.scales import check_E_deloc
from btm_lab.instances import conditioned_E_deloc, flat_E_deloc, flat_deloc_levels, planted_E_loc


def spike():
    return Landscape.constant(1.0, overrides={5: 1e6}).materialize(-100, 100)


def test_boundcheck_margin_and_status():
    c = BoundCheck("x", ">", 2.0, 1.0)
    assert c.margin == 1.0 and c.verdict and c.status == "pass"
    c = BoundCheck("x", "<", 2.0, 1.0)
    assert c.margin == -1.0 and c.status == "fail"
    assert BoundCheck("x", ">=", 1.0, 1.0).verdict
    assert not BoundCheck("x", ">", 1.0, 1.0).verdict
    assert BoundCheck("x", ">", 0.0, 1.0, vacuous=True).status == "vacuous"
    assert BoundCheck("x", ">", 0.0, 1.0, asserted=False).status == "unasserted"
    d = BoundCheck("x", "<=", 1.0, 3.0).to_dict()
    assert d["margin"] == 2.0 and d["status"] == "pass"


def test_local_lower_bound_spike_example():
    # (100/105 - 1e-4 * 5 * 104) (1e6 / (1e6 + 200) - 1e4 / (95 * 1e6)), in rationals
    f1 = Fraction(100, 105) - Fraction(5 * 104, 10**4)
    f2 = Fraction(10**6, 10**6 + 200) - Fraction(10**4, 95 * 10**6)
    land = spike()
    assert locallem_bound(land, 5, 100, 1e4) == pytest.approx(float(f1 * f2), rel=1e-14)
    assert locallem_bound(land, 5, 100, 1e4) == pytest.approx(0.900106, abs=5e-7)
    chk = verify_locallem(land, 5, 100, 1e4)
    assert chk.status == "pass" and chk.lhs > 0.9001


def test_local_lower_bound_vacuous():
    land = Landscape.constant(1.0).materialize(-50, 50)
    f1, f2 = locallem_factors(land, 3, 40, 10.0)
    assert f2 < 0
    assert locallem_bound(land, 3, 40, 10.0) == 0.0
    assert verify_locallem(land, 3, 40, 10.0).status == "vacuous"
    with pytest.raises(InvalidParameter):
        locallem_bound(land, 4, 4, 1.0)
    with pytest.raises(InvalidParameter):
        locallem_bound(land, 1, 4, -1.0)


@given(seed=st.integers(0, 2**32), x=st.integers(1, 30), gap=st.integers(1, 30),
       logt=st.floats(0, 6), depth=st.floats(0, 8))
def test_local_lower_bound_random(seed, x, gap, logt, depth):
    y = x + gap
    land = Landscape(seed, 0.5).with_overrides({x: 10**depth}).materialize(-y, y)
    chk = verify_locallem(land, x, y, 10**logt)
    assert chk.status in ("pass", "vacuous")
    if chk.rhs > chk.deficit:
        assert chk.status == "pass"


def test_corollary_bound_values():
    assert corollary_bound(0.1) == pytest.approx((1 / 1.1 - 0.3) * (1 / 1.3 - 0.1 / 0.9), rel=1e-15)
    assert corollary_bound(0.1) == pytest.approx(0.40086, abs=1e-5)
    assert corollary_bound(0.2) == pytest.approx(0.0875, rel=1e-12)
    assert corollary_bound(1 / 3) == 0.0
    assert corollary_bound(0.3) == 0.0
    assert corollary_bound(1e-9) == pytest.approx(1.0, abs=1e-8)
    eps = np.linspace(1e-4, 0.25, 200)
    vals = [corollary_bound(e) for e in eps]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eps,background", [(0.2, "flat"), (0.2, "capped"), (0.3, "flat")])
def test_corollary_on_planted_landscape(eps, background):
    land = planted_E_loc(0.5, 2, eps, 3, background=background)
    chk = verify_corollary(land, 2, eps)
    assert chk.verdict
    assert chk.status == ("vacuous" if eps == 0.3 else "pass")
    assert maxsum_on_loc_event(land, 2, eps).status == "pass"


def test_corollary_requires_event():
    land = Landscape.constant(1.0).materialize(-100, 100)
    with pytest.raises(PreconditionViolation):
        verify_corollary(land, 2, 0.2)
    with pytest.raises(PreconditionViolation):
        maxsum_on_loc_event(land, 2, 0.2)


def test_diag_heat_flat_example():
    land = Landscape.constant(1.0).materialize(-300, 300)
    assert volume(land, 0, 16) == 31.0
    chk = diag_heat_bound(land, 0, 2)
    assert chk.inputs["V"] == 31.0 and chk.inputs["t"] == 992.0
    assert chk.status == "pass"
    assert chk.deficit <= 1e-6 * chk.rhs


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_diag_heat_random(seed):
    land = Landscape(seed, 0.5)
    rng = np.random.default_rng(seed)
    for x in rng.integers(-40, 40, 5):
        assert diag_heat_bound(land, int(x), 2).status == "pass"


@pytest.mark.parametrize("boundary", ["absorbing", "reflecting"])
def test_cauchy_schwarz(boundary):
    land = Landscape(6, 0.5)
    for t in (1.0, 100.0, 1e4):
        assert cauchy_schwarz_check(land, (-60, 60), t, boundary=boundary).status == "pass"


def test_nearbound_flat_event():
    for eps in (0.2, 0.3):
        c = flat_deloc_levels(0.5, 2, eps, 2, 1)[0]
        land = flat_E_deloc(0.5, 2, eps, 2, c)
        chk = nearbound_check(land, 2, eps, 2)
        assert chk.verdict
        assert chk.status == ("vacuous" if eps >= 0.25 else "pass")


def test_nearbound_conditioned_event():
    land = conditioned_E_deloc(0.5, 2, 0.2, 2, 7)
    assert check_E_deloc(land, 2, 0.2, 2).holds
    assert nearbound_check(land, 2, 0.2, 2).status == "pass"


def test_nearbound_requires_event():
    with pytest.raises(PreconditionViolation):
        nearbound_check(Landscape.constant(1.0).materialize(-200, 200), 2, 0.2, 2)


def test_confinement_on_flat_event():
    c = flat_deloc_levels(0.5, 2, 0.2, 2, 1)[0]
    land = flat_E_deloc(0.5, 2, 0.2, 2, c)
    assert confinement_sites(2, 2) == [0, 16]
    for x in confinement_sites(2, 2):
        checks = confinement_check(land, 2, 0.2, 2, x)
        assert [c.status for c in checks] == ["pass"] * 4
    with pytest.raises(InvalidParameter):
        confinement_check(land, 2, 0.2, 2, 5)


def test_confinement_off_event_is_unasserted():
    land = Landscape.constant(1.0)
    checks = confinement_check(land, 2, 0.2, 2, 0)
    assert {c.status for c in checks} == {"unasserted"}
    assert all(math.isfinite(c.lhs) for c in checks)


def test_b_k_values():
    assert all(b_k(k) == 1.0 for k in range(1, 51))
    assert b_k_complement(51) == 32.0**-25
    assert b_k(51) == 1.0 - 32.0**-25  # rounds to 1 in binary64
    assert b_k(51) == b_k(52)
    assert b_k_complement(50) == 0.0
    with pytest.raises(InvalidParameter):
        b_k(0)


def test_b_k_against_binomial_sum():
    from scipy import stats
    for k in (101, 301, 1001, 3001):
        N = (k - 1) // 2
        assert b_k(k) == pytest.approx(stats.binom.cdf(24, N, 1 / 32), rel=1e-10)


def test_b_k_monotone_to_1e5():
    ks = np.arange(1, 10**5 + 1)
    v = b_k_sweep(ks)
    assert (np.diff(v) <= 0).all()
    assert v[-1] < 1e-100
    # strictly decreasing across pairs once N > 24, until it flushes to zero
    pairs = v[52::2]
    live = pairs[pairs > 1e-300]
    assert (np.diff(live[live < 1 - 1e-15]) < 0).all()
    for k in (201, 1001, 2001):
        assert v[k - 1] == pytest.approx(b_k(k), rel=1e-11)


def _mp_deficit(alpha, theta):
    # 1 - E e^{-theta sigma} = 1 - alpha theta^alpha Gamma(-alpha, theta) for density alpha u^{-alpha-1} on [1, inf)
    mpmath.mp.dps = 40
    return float(1 - alpha * mpmath.mpf(theta) ** alpha * mpmath.gammainc(-alpha, theta))


@given(alpha=st.sampled_from([0.3, 0.5, 0.8, 1.0]), logtheta=st.floats(-8, 1))
def test_laplace_deficit_against_incomplete_gamma(alpha, logtheta):
    theta = 10**logtheta
    assert laplace_deficit(alpha, theta) == pytest.approx(_mp_deficit(alpha, theta), rel=1e-9)


def test_laplace_ratio_limits():
    assert laplace_constant(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert laplace_constant(1.0) == 1.0
    assert abs(laplace_ratio(0.5, 1e-6) - 1) < 0.02
    r = [laplace_ratio(1.0, th) for th in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(r, r[1:]))
    with pytest.raises(InvalidParameter):
        laplace_deficit(0.5, 0.0)


def test_sum_tail_bound_monte_carlo():
    alpha, n, c_n = 0.5, 1000, 1e7
    bound = sum_tail_bound(alpha, n, c_n)
    rng = np.random.default_rng(2024)
    reps, exceed = 10**5, 0
    for _ in range(reps // 10**4):
        u = 1.0 - rng.random((10**4, n))
        exceed += int((u ** (-1 / alpha)).sum(axis=1).__gt__(c_n).sum())
    p_hat = exceed / reps
    assert p_hat <= bound
    assert 0 < bound < 1
    with pytest.raises(InvalidParameter):
        sum_tail_bound(alpha, n, 0.0)
