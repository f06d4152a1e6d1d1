"""Finite-n empirical versions of the limit statements.

* the max/sum ratio ``M_n / S_n`` along one landscape, streamed in chunks;
* self-consistency of the stable scaling of ``S_n``;
* decay of ``sup_x P(X_t = x)`` when the traps have a finite mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InvalidParameter
from .landscape import Landscape, check_alpha, sample_traps
from .scales import ell_alpha
from .solver import quenched_pmf


@dataclass
class RatioTrajectory:
    """``M_n / S_n`` over sites ``1..n_max`` of one seeded landscape.

    ``running_min`` / ``running_max`` at a checkpoint are extremes over every
    ``n`` with ``burn_in <= n <= checkpoint`` (not only over checkpoints).
    ``tail_max`` / ``tail_min`` are the extremes over ``[tail_from, n_max]``.
    """

    seed: int
    alpha: float
    n_max: int
    burn_in: int
    checkpoints: np.ndarray
    ratio: np.ndarray
    running_min: np.ndarray
    running_max: np.ndarray
    tail_from: int
    tail_min: float
    tail_max: float

    @property
    def overall_min(self) -> float:
        return float(self.running_min[-1])

    @property
    def overall_max(self) -> float:
        return float(self.running_max[-1])

    @property
    def spread(self) -> float:
        return self.overall_max - self.overall_min

    def rows(self):
        for n, r, lo, hi in zip(self.checkpoints, self.ratio, self.running_min, self.running_max):
            yield int(n), float(r), float(lo), float(hi)


def dyadic_checkpoints(n_max: int, start: int = 1) -> np.ndarray:
    pts = [1 << k for k in range(n_max.bit_length()) if (1 << k) >= start]
    if not pts or pts[-1] != n_max:
        pts.append(n_max)
    return np.array(pts, dtype=np.int64)


def maxsum_trajectory(seed: int, alpha: float, n_max: int, *, burn_in: int = 1, tail_from: int | None = None,
                      checkpoints=None, chunk: int = 1 << 21) -> RatioTrajectory:
    """Stream ``sigma_1 .. sigma_{n_max}`` once with O(chunk) memory.

    Partial sums are carried into each chunk's cumulative sum as its first
    term, so the result is bit-identical to one ``np.cumsum`` over all sites.
    """
    alpha = check_alpha(alpha)
    n_max, burn_in = int(n_max), int(burn_in)
    if n_max < 1 or not 1 <= burn_in <= n_max:
        raise InvalidParameter("need 1 <= burn_in <= n_max")
    tail_from = max(burn_in, n_max // 10 if tail_from is None else int(tail_from))
    cps = dyadic_checkpoints(n_max, burn_in) if checkpoints is None else np.asarray(sorted(checkpoints), np.int64)
    if cps.size and (cps[0] < burn_in or cps[-1] > n_max):
        raise InvalidParameter("checkpoints must lie in [burn_in, n_max]")
    out_ratio = np.empty(cps.size)
    out_min = np.empty(cps.size)
    out_max = np.empty(cps.size)
    s_carry, m_carry = 0.0, 0.0
    lo_run, hi_run = math.inf, -math.inf
    t_lo, t_hi = math.inf, -math.inf
    ci = 0
    for first in range(1, n_max + 1, chunk):
        last = min(first + chunk - 1, n_max)
        v = sample_traps(seed, alpha, np.arange(first, last + 1, dtype=np.int64))
        S = np.cumsum(np.concatenate(([s_carry], v)))[1:]
        M = np.maximum.accumulate(np.maximum(v, m_carry))
        r = M / S
        n = np.arange(first, last + 1)
        keep = n >= burn_in
        run_lo = np.minimum.accumulate(np.where(keep, r, np.inf))
        run_hi = np.maximum.accumulate(np.where(keep, r, -np.inf))
        run_lo = np.minimum(run_lo, lo_run)
        run_hi = np.maximum(run_hi, hi_run)
        while ci < cps.size and cps[ci] <= last:
            j = cps[ci] - first
            out_ratio[ci], out_min[ci], out_max[ci] = r[j], run_lo[j], run_hi[j]
            ci += 1
        tail = n >= tail_from
        if tail.any():
            t_lo = min(t_lo, float(r[tail].min()))
            t_hi = max(t_hi, float(r[tail].max()))
        s_carry, m_carry = float(S[-1]), float(M[-1])
        lo_run, hi_run = float(run_lo[-1]), float(run_hi[-1])
    return RatioTrajectory(int(seed), alpha, n_max, burn_in, cps, out_ratio, out_min, out_max,
                           tail_from, t_lo, t_hi)


def maxsum_batch(seed: int, alpha: float, n_max: int) -> np.ndarray:
    """All ratios ``M_n / S_n`` for ``n = 1..n_max`` in one pass (reference for the streaming path)."""
    v = sample_traps(seed, check_alpha(alpha), np.arange(1, n_max + 1))
    return np.maximum.accumulate(v) / np.cumsum(v)


# ---------------------------------------------------------------------------
# stable scaling


@dataclass
class ScalingSample:
    alpha: float
    n: int
    values: np.ndarray

    @property
    def replicates(self) -> int:
        return int(self.values.size)


def scaled_sums(alpha: float, n: int, replicates: int, rng: np.random.Generator,
                batch_elems: int = 1 << 23) -> ScalingSample:
    """``n^{-1/α} S_n`` for α < 1, ``n^{-1}(S_n - n log n)`` for α = 1."""
    alpha = check_alpha(alpha, main_model=True)
    if n < 100:
        raise InvalidParameter("scaling check needs n >= 100")
    if replicates < 1000:
        raise InvalidParameter("scaling check needs at least 1000 replicates")
    out = np.empty(replicates)
    step = max(1, batch_elems // n)
    for i in range(0, replicates, step):
        m = min(step, replicates - i)
        S = ((1.0 - rng.random((m, n))) ** (-1.0 / alpha)).sum(axis=1)
        out[i:i + m] = S
    if alpha < 1:
        vals = out / (n ** (1 / alpha) * ell_alpha(alpha, n))
    else:
        vals = (out - n * math.log(n)) / n
    return ScalingSample(alpha, int(n), vals)


@dataclass
class ScalingReport:
    alpha: float
    n_list: list
    replicates: int
    ks: list = field(default_factory=list)     # KS(n_i, n_{i+1}) for consecutive pairs
    positive: bool = True
    both_signs: bool = False

    @property
    def decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.ks, self.ks[1:]))


def stable_scaling_check(alpha: float, n_list, replicates: int, seed: int) -> ScalingReport:
    """Two-sample KS distances between scaled sums at consecutive ``n``.

    Convergence in law shows up as these distances shrinking along the list.
    """
    n_list = [int(n) for n in n_list]
    rng = np.random.default_rng(seed)
    samples = [scaled_sums(alpha, n, replicates, rng) for n in n_list]
    rep = ScalingReport(float(alpha), n_list, int(replicates))
    rep.ks = [float(stats.ks_2samp(a.values, b.values).statistic) for a, b in zip(samples, samples[1:])]
    rep.positive = all(bool((s.values > 0).all()) for s in samples)
    rep.both_signs = all(bool((s.values > 0).any() and (s.values < 0).any()) for s in samples)
    return rep


# ---------------------------------------------------------------------------
# finite-mean regime


@dataclass
class DecayReport:
    alpha: float
    seed: int
    times: list
    sups: list
    argmax: list
    deficits: list

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.sups, self.sups[1:]))

    @property
    def final_ratio(self) -> float:
        return self.sups[-1] / self.sups[-2]


def sup_profile(landscape: Landscape, times, tol: float = 1e-10, **kw) -> DecayReport:
    sups, args, defs = [], [], []
    for t in times:
        res = quenched_pmf(landscape, float(t), tol, **kw)
        sups.append(res.sup())
        args.append(res.argmax())
        defs.append(res.deficit)
    return DecayReport(landscape.alpha, landscape.seed, [float(t) for t in times], sups, args, defs)


def finite_mean_deloc(alpha: float, seed: int, t_list, tol: float = 1e-10) -> DecayReport:
    alpha = check_alpha(alpha)
    if not alpha > 1:
        raise InvalidParameter("the finite-mean study needs alpha > 1")
    return sup_profile(Landscape(seed, alpha), t_list, tol)
