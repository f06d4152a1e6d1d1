import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special, stats

from btm_lab import Landscape, ResourceLimit
from btm_lab.solver import (
    ABSORBING,
    REFLECTING,
    build_generator,
    heat_kernel,
    heat_kernel_diagonal,
    quenched_pmf,
    simulate_path,
    simulate_paths,
    transient,
    transient_spectral,
    transient_uniformization,
)


def flat(lo=-50, hi=50, c=1.0):
    return Landscape.constant(c).materialize(lo, hi)


def test_flat_reflecting_rows():
    gen = build_generator(flat(-1, 1), (-1, 1), REFLECTING)
    Q = gen.dense()
    assert Q[1].tolist() == [0.5, -1.0, 0.5]
    assert Q[0].tolist() == [-0.5, 0.5, 0.0]
    gen_abs = build_generator(flat(-1, 1), (-1, 1), ABSORBING)
    assert gen_abs.dense()[0].sum() == -0.5


@given(seed=st.integers(0, 2**32), size=st.integers(3, 40), alpha=st.sampled_from([0.3, 0.5, 1.0]))
def test_generator_structure(seed, size, alpha):
    land = Landscape(seed, alpha).materialize(0, size - 1)
    sig = land.values(0, size - 1)
    for boundary in (ABSORBING, REFLECTING):
        Q = build_generator(land, (0, size - 1), boundary).dense()
        off = Q - np.diag(np.diag(Q))
        assert (off >= 0).all()
        assert np.allclose(Q[1:-1].sum(axis=1), 0, atol=1e-15)
        # detailed balance: sigma_x w(x, x+1) = sigma_{x+1} w(x+1, x) = 1/2
        assert np.allclose(sig[:-1] * np.diag(Q, 1), 0.5, rtol=1e-15)
        assert np.allclose(sig[1:] * np.diag(Q, -1), 0.5, rtol=1e-15)
        assert (-np.diag(Q) <= 1 + 1e-15).all()


def test_t_zero_point_mass():
    gen = build_generator(flat(), (-50, 50))
    for backend in ("uniformization", "spectral"):
        r = transient(gen, 3, 0.0, backend=backend)
        assert r.at(3) == 1.0 and r.pmf.sum() == 1.0
    r = quenched_pmf(flat(), 0.0)
    assert r.at(0) == 1.0 and r.deficit == 0.0


def test_flat_walk_bessel_oracle():
    # rate-1 simple walk: P(X_t = k) = e^{-t} I_k(t)
    gen = build_generator(flat(), (-50, 50))
    for t in (1.0, 10.0, 100.0):
        r = transient_uniformization(gen, 0, t)
        for k in (0, 1, 5):
            assert r.at(k) == pytest.approx(special.ive(k, t), rel=1e-10, abs=1e-15)


@pytest.mark.slow
def test_flat_walk_monte_carlo():
    land = flat()
    r = quenched_pmf(land, 1.0, 1e-12)
    batch = simulate_paths(land, 1.0, 10**7, 99)
    p_hat = (batch.site == 0).mean()
    se = math.sqrt(r.at(0) * (1 - r.at(0)) / 10**7)
    assert abs(p_hat - r.at(0)) < 3 * se


def test_large_time_local_clt():
    # sup_x P(X_t = x) ~ (2 pi t)^{-1/2} for the rate-1 walk
    land = Landscape.constant(1.0)
    for t in (1e3, 1e4, 1e5):
        r = quenched_pmf(land, t, 1e-10)
        assert r.sup() == pytest.approx(special.ive(0, t), rel=1e-8)
        assert r.sup() == pytest.approx((2 * math.pi * t) ** -0.5, rel=0.2)


def test_reflecting_long_time_limit():
    land = Landscape(5, 0.5).materialize(-20, 20)
    gen = build_generator(land, (-20, 20), REFLECTING)
    t = 1e6 * gen.sigma.max()
    r = transient(gen, 0, t)
    assert np.abs(r.pmf - gen.sigma / gen.sigma.sum()).max() < 1e-6


def test_spectrum_signs_and_stationary_vector():
    land = Landscape(8, 0.5).materialize(-30, 30)
    gen = build_generator(land, (-30, 30), REFLECTING)
    w, V = gen.spectrum()
    assert w.max() <= 1e-12
    assert (np.abs(w) < 1e-12).sum() == 1
    v0 = V[:, np.argmax(w)]
    target = np.sqrt(gen.sigma) / np.linalg.norm(np.sqrt(gen.sigma))
    assert np.allclose(np.abs(v0), target, atol=1e-10)
    gen_abs = build_generator(land, (-30, 30), ABSORBING)
    assert gen_abs.spectrum()[0].max() < 0


@given(seed=st.integers(0, 2**32), half=st.integers(2, 40), t=st.floats(0.01, 1000.0),
       alpha=st.sampled_from([0.3, 0.5, 1.0]), boundary=st.sampled_from([ABSORBING, REFLECTING]))
def test_backends_agree_and_conserve(seed, half, t, alpha, boundary):
    land = Landscape(seed, alpha).materialize(-half, half)
    gen = build_generator(land, (-half, half), boundary)
    u = transient_uniformization(gen, 0, t, tol=1e-15)
    s = transient_spectral(gen, 0, t)
    assert 0.5 * np.abs(u.pmf - s.pmf).sum() <= 1e-10
    for r in (u, s):
        assert (r.pmf >= 0).all()
        assert abs(r.pmf.sum() + r.deficit - 1) <= 1e-10


@given(seed=st.integers(0, 2**32), t=st.floats(0.1, 1e4))
def test_heat_kernel_symmetric(seed, t):
    land = Landscape(seed, 0.5).materialize(-25, 25)
    for boundary in (ABSORBING, REFLECTING):
        hk = heat_kernel(build_generator(land, (-25, 25), boundary), t)
        assert np.abs(hk.matrix - hk.matrix.T).max() <= 1e-10


def test_heat_kernel_diagonal_monotone_and_consistent():
    land = Landscape(12, 0.5).materialize(-30, 30)
    gen = build_generator(land, (-30, 30), REFLECTING)
    times = np.logspace(-1, 5, 40)
    D = heat_kernel_diagonal(gen, times)
    assert (np.diff(D, axis=0) <= 1e-15).all()
    r = transient(gen, 4, 37.0)
    assert heat_kernel(gen, 37.0)(4, 4) == pytest.approx(r.at(4) / land[4], rel=1e-9)


def test_sup_bracket():
    land = Landscape(2, 0.5)
    for t in (10.0, 1e3, 1e5):
        r = quenched_pmf(land, t, 1e-6)
        ref = transient(build_generator(land, r.window, REFLECTING), 0, t)
        assert abs(ref.sup() - r.sup()) <= r.deficit + 1e-12
        # killed pmf is dominated pointwise by the whole-lattice value, approximated on a wider window
        W = (4 * r.lo, 4 * r.hi)
        wide = transient(build_generator(land.materialize(*W), W), 0, t)
        seg = wide.pmf[r.lo - W[0]: r.lo - W[0] + r.pmf.size]
        assert (r.pmf <= seg * (1 + 1e-12) + 1e-300).all()


def test_window_budget_exhaustion_reports_progress():
    land = Landscape.constant(1.0)
    with pytest.raises(ResourceLimit) as exc:
        quenched_pmf(land, 1e5, 1e-12, window_budget=101)
    assert exc.value.achieved is not None and exc.value.achieved.deficit > 1e-12


def test_uniformization_step_budget():
    gen = build_generator(flat(), (-50, 50))
    with pytest.raises(ResourceLimit):
        transient_uniformization(gen, 0, 1e7)


def test_simulate_path_basics():
    land = Landscape(4, 0.5)
    assert simulate_path(land, 0.0, 1).site == 0
    rec = simulate_path(land, 50.0, 2, targets=[3, -3])
    assert all(0 <= v <= 50 for v in rec.hits.values())


def test_mean_jumps_at_most_t():
    land = Landscape(9, 0.5)
    t = 200.0
    batch = simulate_paths(land, t, 20000, 5)
    assert batch.n_jumps.mean() <= t


def test_monte_carlo_chi_square():
    land = Landscape(21, 0.5)
    t = 30.0
    r = quenched_pmf(land, t, 1e-12)
    batch = simulate_paths(land, t, 10**6, 77)
    counts = np.bincount(batch.site - r.lo, minlength=r.pmf.size)
    expected = r.pmf * batch.site.size
    keep = expected >= 5
    obs = np.append(counts[keep], counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    exp *= obs.sum() / exp.sum()
    assert stats.chisquare(obs, exp).pvalue > 0.01
