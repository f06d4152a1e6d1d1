"""Deterministic inequalities about the quenched law, checked against the solver.

Every check returns a :class:`BoundCheck`.  When the solver only brackets the
infinite-lattice value, the side of the bracket that makes the verdict
rigorous is used: a lower bound is confirmed with the killed pmf (which
underestimates), an upper bound with killed pmf plus absorbed mass.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidParameter, NumericalFailure, PreconditionViolation, ResourceLimit
from .hitting import expected_exit_time, exit_weights
from .landscape import Landscape, check_alpha
from .scales import (
    check_E_deloc,
    check_E_loc,
    check_epsilon,
    deloc_scales,
    ell_alpha,
    loc_scales,
    scale_a,
)
from .solver import ABSORBING, build_generator, heat_kernel, quenched_pmf, survival_probability

RELATIONS = ("<", "<=", ">", ">=")


@dataclass
class BoundCheck:
    bound_id: str
    relation: str
    lhs: float
    rhs: float
    inputs: dict = field(default_factory=dict)
    deficit: float = 0.0
    vacuous: bool = False
    asserted: bool = True
    note: str = ""

    @property
    def margin(self) -> float:
        """Signed slack: positive when the inequality holds."""
        if self.relation in (">", ">="):
            return self.lhs - self.rhs
        return self.rhs - self.lhs

    @property
    def verdict(self) -> bool:
        m = self.margin
        return m > 0 if self.relation in ("<", ">") else m >= 0

    @property
    def status(self) -> str:
        if not self.asserted:
            return "unasserted"
        if self.vacuous:
            return "vacuous"
        return "pass" if self.verdict else "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(margin=self.margin, verdict=self.verdict, status=self.status)
        return d


# ---------------------------------------------------------------------------
# local lower bound


def locallem_factors(landscape: Landscape, x: int, y: int, t: float) -> tuple[float, float]:
    """The two factors of the lower bound, before taking positive parts.

    First: reach ``x`` before ``-y`` in time.  Second: stay at ``x`` once there.
    """
    if not 0 < x < y:
        raise InvalidParameter("need 0 < x < y")
    if not t > 0:
        raise InvalidParameter("need t > 0")
    inner = float(landscape.values(-y + 1, x - 1).sum())
    total = float(landscape.values(-y, y).sum())
    sx = landscape[x]
    return y / (x + y) - x * inner / t, sx / total - t / ((y - x) * sx)


def locallem_bound(landscape: Landscape, x: int, y: int, t: float) -> float:
    f1, f2 = locallem_factors(landscape, x, y, t)
    return max(f1, 0.0) * max(f2, 0.0)


def verify_locallem(landscape: Landscape, x: int, y: int, t: float, *, tol: float = 1e-12,
                    window_budget: int = 2001) -> BoundCheck:
    """Solver lower bound on ``P(X_t = x)`` against the two-factor bound.

    The verdict requires the slack to exceed the absorbed mass of the window.
    """
    rhs = locallem_bound(landscape, x, y, t)
    landscape.materialize(-y, y)
    try:
        res = quenched_pmf(landscape, t, tol, window_budget=window_budget)
    except ResourceLimit as exc:
        res = exc.achieved
    lhs = res.at(x)
    chk = BoundCheck("local_lower_bound", ">", lhs - res.deficit, rhs,
                     {"x": x, "y": y, "t": t, "window": res.window}, deficit=res.deficit,
                     vacuous=rhs <= 0, note=f"pmf={lhs!r}")
    return chk


# ---------------------------------------------------------------------------
# localisation at t_n


def corollary_bound(eps: float) -> float:
    eps = check_epsilon(eps)
    return max(1 / (1 + eps) - 3 * eps, 0.0) * max(1 / (1 + 3 * eps) - eps / (1 - eps), 0.0)


def verify_corollary(landscape: Landscape, n: int, eps: float, *, window_budget: int | None = None) -> BoundCheck:
    """``P(X_{t_n} = x_n)`` against the localisation bound on a landscape in ``E_loc``.

    The killed pmf underestimates the lattice value, so it confirms the strict
    lower bound without any deficit allowance.
    """
    ev = check_E_loc(landscape, n, eps)
    if not ev.holds:
        raise PreconditionViolation(f"E_loc({n}, {eps}) does not hold on this landscape")
    sc = loc_scales(n, eps, landscape.alpha)
    x_n = ev.witnesses["x_n"]
    rhs = corollary_bound(eps)
    try:
        res = quenched_pmf(landscape, sc.t_n, 1e-8, radius=2 * sc.b_n, window_budget=window_budget,
                           stop=lambda r: r.at(x_n) > rhs and r.deficit < 1e-3)
    except ResourceLimit as exc:
        res = exc.achieved
    return BoundCheck("localisation_at_t_n", ">", res.at(x_n), rhs,
                      {"n": n, "epsilon": eps, "x_n": x_n, "t_n": sc.t_n, "window": res.window},
                      deficit=res.deficit, vacuous=rhs <= 0)


def maxsum_on_loc_event(landscape: Landscape, n: int, eps: float) -> BoundCheck:
    """On ``E_loc``: ``M_{a_n} / S_{a_n} > 1 / (1 + 3 eps)``."""
    ev = check_E_loc(landscape, n, eps)
    if not ev.holds:
        raise PreconditionViolation(f"E_loc({n}, {eps}) does not hold on this landscape")
    return BoundCheck("maxsum_ratio_localised", ">", ev.M / ev.witnesses["S_a"], 1 / (1 + 3 * eps),
                      {"n": n, "epsilon": eps})


# ---------------------------------------------------------------------------
# heat-kernel bounds


def volume(landscape: Landscape, x: int, r: int) -> float:
    """``V(x, r) = S([x - r + 1, x + r - 1])``."""
    return float(landscape.values(x - r + 1, x + r - 1, materialize=True).sum())


def diag_heat_bound(landscape: Landscape, x: int, n: int, *, window_budget: int | None = None) -> BoundCheck:
    """``p_{2 a_n V}(x, x) <= 2 / V`` with ``V = V(x, a_n)``.

    The left side is bounded above by ``(pmf(x) + deficit) / sigma_x`` on a
    window whose deficit is below 1e-6 of the right side.
    """
    a = scale_a(n)
    V = volume(landscape, x, a)
    t = 2 * a * V
    rhs = 2 / V
    sx = landscape[x]
    tol = 1e-6 * rhs * sx
    res = quenched_pmf(landscape, t, tol, start=x, window_budget=window_budget)
    lhs = (res.at(x) + res.deficit) / sx
    return BoundCheck("diagonal_heat_kernel", "<=", lhs, rhs,
                      {"x": x, "n": n, "V": V, "t": t, "window": res.window}, deficit=res.deficit)


def cauchy_schwarz_check(landscape: Landscape, window: tuple[int, int], t: float, origin: int = 0,
                         boundary: str = ABSORBING, slack: float = 1e-12) -> BoundCheck:
    """``p_t(origin, x) <= sqrt(p_t(origin, origin) p_t(x, x))`` for every x in the window."""
    gen = build_generator(landscape.materialize(*window), window, boundary)
    hk = heat_kernel(gen, t)
    i0 = origin - gen.lo
    diag = hk.diagonal()
    excess = hk.matrix[i0] - np.sqrt(diag[i0] * np.clip(diag, 0, None))
    worst = int(np.argmax(excess))
    return BoundCheck("cauchy_schwarz", "<=", float(excess[worst]), slack,
                      {"window": window, "t": t, "worst_site": gen.lo + worst, "boundary": boundary})


def nearbound_check(landscape: Landscape, n: int, eps: float, K: int, *, window_budget: int | None = None) -> BoundCheck:
    """Sup of ``P(X_{t_n} = x)`` over ``[a_{n,-K+1}, a_{n,K}]`` below ``4 eps`` on ``E_deloc``."""
    ev = check_E_deloc(landscape, n, eps, K)
    if not ev.holds:
        raise PreconditionViolation(f"E_deloc({n}, {eps}, {K}) does not hold on this landscape")
    sc = deloc_scales(n, eps, K, landscape.alpha)
    lo, hi = (-K + 1) * sc.a_n, K * sc.a_n
    rhs = 4 * eps
    radius = (K + 1) * sc.a_n
    try:
        res = quenched_pmf(landscape, sc.t_n, 1e-6, radius=radius, window_budget=window_budget,
                           stop=lambda r: r.sup(lo, hi) + r.deficit < rhs and r.deficit < 1e-3)
    except ResourceLimit as exc:
        res = exc.achieved
    lhs = res.sup(lo, hi) + res.deficit
    return BoundCheck("near_field_delocalisation", "<", lhs, rhs,
                      {"n": n, "epsilon": eps, "K": K, "t_n": sc.t_n, "interval": (lo, hi),
                       "argmax": res.argmax(lo, hi), "window": res.window},
                      deficit=res.deficit, vacuous=rhs >= 1)


def confinement_sites(n: int, K: int) -> list[int]:
    """Grid sites in ``[a_{n,-K+2}, a_{n,K-1}]``."""
    a = scale_a(n)
    return [k * a for k in range(-K + 2, K)]


def confinement_check(landscape: Landscape, n: int, eps: float, K: int, x: int) -> list[BoundCheck]:
    """Mean-exit sandwich and the 1/32 survival bound at grid site ``x``.

    Off the event ``E_deloc`` the values are still computed, marked unasserted.
    """
    sc = deloc_scales(n, eps, K, landscape.alpha)
    if x not in confinement_sites(n, K):
        raise InvalidParameter(f"x={x} is not a grid site of [a_(n,-K+2), a_(n,K-1)]")
    landscape.materialize(*sc.span)
    asserted = check_E_deloc(landscape, n, eps, K).holds
    a = sc.a_n
    r = 2 * a
    unit = a * sc.threshold  # a_n^{1+1/alpha} ell_alpha(a_n)
    landscape.materialize(x - r + 1, x + r - 1)
    sigma = landscape.values(x - r + 1, x + r - 1)
    center = expected_exit_time(landscape, x, r, x)
    worst_start, worst = x, center
    for y in range(x - r + 1, x + r):
        m = float(exit_weights(x, r, y) @ sigma)
        if m > worst:
            worst_start, worst = y, m
    t_small = sc.t_n / 24
    surv = survival_probability(landscape, x - r + 1, x + r - 1, x, t_small)
    inputs = {"n": n, "epsilon": eps, "K": K, "x": x}
    return [
        BoundCheck("mean_exit_from_center", ">", center, unit, dict(inputs), asserted=asserted),
        BoundCheck("mean_exit_worst_start", "<", worst, 16 * unit, dict(inputs, y=worst_start), asserted=asserted),
        BoundCheck("survival_one_32", ">", surv, 1 / 32, dict(inputs, t=t_small), asserted=asserted),
        BoundCheck("markov_display", "<=", center, t_small + surv * 16 * unit, dict(inputs, t=t_small),
                   asserted=asserted),
    ]


# ---------------------------------------------------------------------------
# binomial counting sequence


def _lower_tail_counts(N: int) -> tuple[int, int]:
    """``(sum_{j<=24} C(N, j) 31^{N-j}, 32^N)``: numerator and denominator of ``b_k``."""
    total = 32**N
    p31 = 31**N
    low = 0
    for j in range(min(N, 24) + 1):
        low += math.comb(N, j) * (p31 // 31**j)
    return low, total


def b_k(k: int) -> float:
    """``P(Bin(floor((k-1)/2), 1/32) <= 24)``, summed exactly in integers and
    rounded once."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    N = (k - 1) // 2
    if N <= 24:
        return 1.0
    low, total = _lower_tail_counts(N)
    return float(Fraction(low, total))


def b_k_complement(k: int) -> float:
    """``1 - b_k`` without cancellation."""
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    N = (k - 1) // 2
    if N <= 24:
        return 0.0
    low, total = _lower_tail_counts(N)
    return float(Fraction(total - low, total))


def b_k_sweep(ks) -> np.ndarray:
    """Vectorized ``b_k`` for long sweeps, via the regularized incomplete beta.

    Summing log-space terms instead leaves ~1e-15 noise near 1 that breaks
    monotonicity at the last ulp.
    """
    N = (np.asarray(ks, dtype=np.int64) - 1) // 2
    return stats.binom.cdf(24, N, 1 / 32)


# ---------------------------------------------------------------------------
# Laplace transform and the sum-tail bound


def laplace_deficit(alpha: float, theta: float) -> float:
    """``1 - E exp(-theta sigma)`` for the Pareto tail ``u**-alpha``, integrated
    directly as ``theta**alpha * int_theta^inf (1 - e^{-v}) alpha v^{-alpha-1} dv``."""
    alpha = check_alpha(alpha)
    if not theta > 0:
        raise InvalidParameter("theta must be positive")

    def f(v):
        return -math.expm1(-v) * alpha * v ** (-alpha - 1)

    # log-spaced pieces keep quad's subdivision local near theta
    edges = list(np.geomspace(theta, 1.0, max(2, int(math.log10(1 / theta)) + 2))) if theta < 1 else [theta]
    pieces = [integrate.quad(f, a_, b_, epsabs=0, epsrel=1e-12, limit=200) for a_, b_ in zip(edges[:-1], edges[1:])]
    pieces.append(integrate.quad(f, edges[-1], np.inf, epsabs=0, epsrel=1e-12, limit=200))
    total = sum(p[0] for p in pieces)
    err = sum(p[1] for p in pieces)
    if not math.isfinite(total) or err > 1e-8 * abs(total):
        raise NumericalFailure("Laplace integral did not converge", {"alpha": alpha, "theta": theta, "err": err})
    return theta**alpha * total


def laplace_constant(alpha: float) -> float:
    alpha = check_alpha(alpha, main_model=True)
    return special.gamma(1 - alpha) if alpha < 1 else 1.0


def laplace_ratio(alpha: float, theta: float) -> float:
    """``(1 - E e^{-theta sigma}) / (c_alpha theta^alpha ell_alpha(1/theta))``, tending to 1."""
    return laplace_deficit(alpha, theta) / (laplace_constant(alpha) * theta**alpha * ell_alpha(alpha, 1 / theta))


def sum_tail_bound(alpha: float, n: int, c_n: float) -> float:
    """Markov-type bound ``P(S_n > c_n) <= (1 - E(e^{-sigma/c_n})**n) / (1 - 1/e)``."""
    if not c_n > 0:
        raise InvalidParameter("c_n must be positive")
    d = laplace_deficit(alpha, 1.0 / c_n)
    return -math.expm1(n * math.log1p(-d)) / (1 - math.exp(-1))
