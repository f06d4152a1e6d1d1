"""Seeded landscapes on which the favourable events hold.

Random search alone finds ``E_loc`` at rate about 1e-3 and ``E_deloc``
essentially never at desk scale, so the verification suites also draw from
two constructions:

* planted: a flat or lightly random background with one deep trap in
  ``[1, a_n]`` sized to satisfy ``E_loc``;
* conditioned: every block of the delocalisation grid resampled from the trap
  law until its sum and maximum meet the ``E_deloc`` inequalities.
"""

from __future__ import annotations

import numpy as np

from .landscape import Landscape, check_alpha, sample_traps
from .scales import check_E_deloc, check_E_loc, deloc_scales, loc_scales


def search_E_loc(alpha: float, n: int, eps: float, seeds) -> list[Landscape]:
    """Random landscapes (one per seed) on which ``E_loc(n, eps)`` holds."""
    sc = loc_scales(n, eps, alpha)
    found = []
    for s in seeds:
        land = Landscape(int(s), alpha).materialize(-sc.b_n, sc.b_n)
        if check_E_loc(land, n, eps).holds:
            found.append(land)
    return found


def search_E_loc_fast(alpha: float, n: int, eps: float, seeds) -> list[int]:
    """Seeds passing ``E_loc``, screened in one vectorized pass then rechecked."""
    sc = loc_scales(n, eps, alpha)
    sites = np.arange(-sc.b_n, sc.b_n + 1)
    inner = (sites >= 1) & (sites <= sc.a_n)
    thr = sc.threshold
    hits = []
    for s in seeds:
        v = sample_traps(int(s), alpha, sites)
        M = v[inner].max()
        if M > thr / eps**2 and v.sum() - M < 3 * thr / eps:
            hits.append(int(s))
    return [s for s in hits if check_E_loc(Landscape(s, alpha).materialize(-sc.b_n, sc.b_n), n, eps).holds]


def planted_E_loc(alpha: float, n: int, eps: float, seed: int, *, background: str = "flat") -> Landscape:
    """A landscape with one planted trap realizing ``E_loc(n, eps)``.

    The depth is ``ε^{-2} a_n^{1/α} ℓ`` times a factor in (1.05, 20); the
    background is ``σ ≡ 1`` or, with ``background="capped"``, trap-law draws
    clipped so the off-peak mass stays below the allowance.
    """
    alpha = check_alpha(alpha)
    sc = loc_scales(n, eps, alpha)
    rng = np.random.default_rng([int(seed), n, int(round(eps * 1e6))])
    thr = sc.threshold
    site = int(rng.integers(1, sc.a_n + 1))
    depth = thr / eps**2 * float(np.exp(rng.uniform(np.log(1.05), np.log(20.0))))
    size = 2 * sc.b_n + 1
    if background == "flat":
        vals = np.ones(size)
    elif background == "capped":
        cap = max(1.0, 0.9 * (3 * thr / eps) / size)
        vals = np.minimum(rng.uniform(size=size) ** (-1.0 / alpha), cap)
    else:
        raise ValueError(f"unknown background {background!r}")
    overrides = {x: float(v) for x, v in zip(range(-sc.b_n, sc.b_n + 1), vals)}
    overrides[site] = depth
    return Landscape(None, alpha, fill=1.0, overrides=overrides).materialize(-sc.b_n, sc.b_n)


def conditioned_E_deloc(alpha: float, n: int, eps: float, K: int, seed: int,
                        max_tries: int = 100_000) -> Landscape:
    """Each grid block drawn from the trap law conditioned on the ``E_deloc`` block inequalities."""
    alpha = check_alpha(alpha)
    sc = deloc_scales(n, eps, K, alpha)
    rng = np.random.default_rng([int(seed), n, K, int(round(eps * 1e6))])
    thr = sc.threshold
    overrides = {}
    for k, (lo, hi) in sc.blocks():
        for _ in range(max_tries):
            v = rng.uniform(size=hi - lo + 1) ** (-1.0 / alpha)
            if 0.5 * thr < v.sum() < 2 * thr and v.max() < eps * thr:
                break
        else:
            raise RuntimeError(f"block {k} rejected {max_tries} times")
        overrides.update({x: float(s) for x, s in zip(range(lo, hi + 1), v)})
    land = Landscape(None, alpha, fill=1.0, overrides=overrides).materialize(*sc.span)
    assert check_E_deloc(land, n, eps, K).holds
    return land


def flat_E_deloc(alpha: float, n: int, eps: float, K: int, c: float) -> Landscape:
    sc = deloc_scales(n, eps, K, alpha)
    return Landscape.constant(c, alpha).materialize(*sc.span)


def flat_deloc_levels(alpha: float, n: int, eps: float, K: int, count: int) -> list[float]:
    """``count`` constant levels ``c`` strictly inside the window allowed by ``E_deloc``."""
    sc = deloc_scales(n, eps, K, alpha)
    lo = 0.5 * sc.threshold / sc.a_n
    hi = min(2 * sc.threshold / sc.a_n, eps * sc.threshold)
    return list(np.exp(np.linspace(np.log(lo), np.log(hi), count + 2)[1:-1]))
