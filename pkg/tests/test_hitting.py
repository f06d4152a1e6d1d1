from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btm_lab import InvalidParameter, Landscape
from btm_lab.harness.suites import hitting_suite
from btm_lab.hitting import (
    ExitProblem,
    exit_tail_bounds,
    expected_exit_time,
    gambler_ruin,
    hit_before_exit,
    oracle_expected_exit_time,
    oracle_gambler_ruin,
    oracle_hit_before_exit,
    oracle_return_escape,
    return_escape,
)
from btm_lab.solver import simulate_paths, survival_probability

ONE = Landscape.constant(1.0).materialize(-200, 200)


def land_of(seed, alpha=0.5):
    return Landscape(seed, alpha).materialize(-200, 200)


def rel(a, b):
    return abs(a - b) / abs(b)


def test_gambler_ruin_example():
    assert gambler_ruin(3, 5) == 5 / 8
    with pytest.raises(InvalidParameter):
        gambler_ruin(0, 5)


def test_hit_before_exit_examples():
    assert hit_before_exit(ExitProblem(0, 4, 2, 2)) == 1.0
    assert hit_before_exit(ExitProblem(0, 2, 1, -1)) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(InvalidParameter):
        ExitProblem(0, 2, 0, 2)


def test_return_escape_examples():
    for r in (1, 2, 7, 30):
        assert return_escape(ExitProblem(5, r, 5, 5)) == pytest.approx(1 / r, rel=1e-15)
    for r in (2, 7, 30):
        assert return_escape(ExitProblem(0, r, r - 1, r - 1)) == pytest.approx(0.5 * (1 / (2 * r - 1) + 1), rel=1e-15)


def test_flat_exit_time_is_r_squared_exactly():
    assert expected_exit_time(ONE, 0, 2, 0) == 4
    for r in range(1, 51):
        assert expected_exit_time(ONE, 3, r, 3, exact=True) == Fraction(r * r)
        assert expected_exit_time(ONE, 3, r, 3) == pytest.approx(r * r, rel=1e-13)


problems = st.builds(
    lambda seed, c, r, a, b: (seed, ExitProblem(c, r, c + a % (2 * r - 1) - r + 1, c + b % (2 * r - 1) - r + 1)),
    st.integers(0, 2**32), st.integers(-100, 100), st.integers(1, 60), st.integers(0, 10**6), st.integers(0, 10**6),
)


@given(problems, st.sampled_from([0.3, 0.5, 1.0]))
def test_closed_forms_match_linear_solves(case, alpha):
    seed, pr = case
    land = land_of(seed, alpha)
    assert rel(hit_before_exit(pr), oracle_hit_before_exit(land, pr)) <= 1e-10
    pr_i = ExitProblem(pr.center, pr.radius, pr.target, pr.target)
    assert rel(return_escape(pr_i), oracle_return_escape(land, pr_i)) <= 1e-10
    m = oracle_expected_exit_time(land, pr.center, pr.radius)
    assert rel(expected_exit_time(land, pr.center, pr.radius, pr.start), m[pr.start - pr.domain[0]]) <= 1e-10


@given(st.integers(0, 2**32), st.integers(1, 80), st.integers(1, 80))
def test_gambler_ruin_matches_linear_solve(seed, x, y):
    assert rel(gambler_ruin(x, y), oracle_gambler_ruin(land_of(seed), x, y)) <= 1e-10


@given(problems, st.sampled_from([2.0, 0.125, 3.7, 1e6]))
def test_rescaling_invariance_and_linearity(case, c):
    seed, pr = case
    land = land_of(seed)
    scaled = land.scaled(c)
    # the jump-chain quantities do not see sigma at all; the oracle confirms it up to rounding
    assert rel(oracle_hit_before_exit(scaled, pr), hit_before_exit(pr)) <= 1e-10
    exact = expected_exit_time(land, pr.center, pr.radius, pr.start, exact=True)
    exact_c = expected_exit_time(scaled, pr.center, pr.radius, pr.start, exact=True)
    if c in (2.0, 0.125):  # products with powers of two are exact in binary64
        assert exact_c == Fraction(c) * exact
    assert rel(expected_exit_time(scaled, pr.center, pr.radius, pr.start),
               c * expected_exit_time(land, pr.center, pr.radius, pr.start)) <= 1e-13


@given(st.integers(0, 2**32), st.integers(1, 15), st.integers(1, 15), st.floats(1.0, 1e5))
def test_exit_tail_bounds_hold(seed, x, gap, t):
    land = land_of(seed)
    y = x + gap
    tb = exit_tail_bounds(land, x, y, t)
    assert 0 <= tb.upper <= 1 and 0 <= tb.lower <= 1
    if x + y > 2:
        assert survival_probability(land, -y + 1, x - 1, 0, t) <= tb.upper_raw + 1e-12
    assert survival_probability(land, -y + 1, y - 1, x, t) + 1e-12 >= tb.lower_raw


def test_exit_tail_bounds_errors():
    with pytest.raises(InvalidParameter):
        exit_tail_bounds(ONE, 3, 3, 1.0)
    with pytest.raises(InvalidParameter):
        exit_tail_bounds(ONE, 1, 3, 0.0)


@pytest.mark.parametrize("center,r,target", [(0, 3, 0), (0, 4, 3), (2, 5, -1)])
def test_return_escape_monte_carlo(center, r, target):
    land = Landscape(3, 0.5)
    pr = ExitProblem(center, r, target, target)
    n = 10**5
    batch = simulate_paths(land, 1e300, n, 11, start=target, stop_sites=[center - r, target, center + r])
    assert batch.stopped.all()
    p_hat = (batch.site != target).mean()
    p = return_escape(pr)
    assert abs(p_hat - p) < 3 * np.sqrt(p * (1 - p) / n)


def test_hit_before_exit_monte_carlo():
    land = Landscape(8, 0.5)
    pr = ExitProblem(0, 2, 1, -1)
    n = 10**5
    batch = simulate_paths(land, 1e300, n, 4, start=1, stop_sites=[-2, -1, 2])
    p_hat = (batch.site == -1).mean()
    assert abs(p_hat - 1 / 3) < 3 * np.sqrt(2 / 9 / n)
    assert hit_before_exit(pr) == pytest.approx(1 / 3)


def test_hitting_suite_passes():
    res = hitting_suite(20, 123)
    assert res.passed
    assert {c.bound_id for c in res.checks} >= {"exit_tail_upper", "exit_tail_lower"}
