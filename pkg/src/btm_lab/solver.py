"""Quenched law of the trap-model walk on finite windows.

The walk at site ``x`` jumps to each neighbour at rate ``1 / (2 sigma_x)``.
On a window ``[lo, hi]`` the generator is tridiagonal; with an *absorbing*
boundary the outward rates at the two endpoints leak mass (the walk is killed
when it leaves the window), with a *reflecting* boundary they are removed.

Two backends evaluate ``delta_init @ expm(t Q)``:

* uniformization with rate 1 (every exit rate is at most 1 because
  ``sigma >= 1``), a Poisson mixture of powers of ``I + Q``;
* a spectral route: ``diag(sqrt(sigma)) Q diag(1/sqrt(sigma))`` is symmetric
  by detailed balance, so one symmetric tridiagonal eigendecomposition serves
  every ``t``.  Only eigenpairs with ``exp(t lambda)`` above double precision
  matter, so large ``t`` needs just the top of the spectrum.

The killed pmf is a pointwise lower bound for the infinite-lattice pmf and the
absorbed mass (``deficit``) bounds the gap, which is the only accuracy claim
the solver makes about the infinite lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.stats import poisson

from .budget import current_budget
from .errors import InvalidParameter, NumericalFailure, ResourceLimit
from .landscape import Landscape

ABSORBING = "absorbing"
REFLECTING = "reflecting"
BOUNDARIES = (ABSORBING, REFLECTING)

# exp(-SPECTRAL_CUT) is far below double precision
SPECTRAL_CUT = 60.0


class Generator:
    """Tridiagonal generator of the walk restricted to ``[lo, hi]``.

    Immutable after construction; eigendecompositions are cached on the instance.
    """

    def __init__(self, lo: int, sigma, boundary: str = ABSORBING):
        if boundary not in BOUNDARIES:
            raise InvalidParameter(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
        sigma = np.array(sigma, dtype=float)
        if sigma.ndim != 1 or sigma.size < 3:
            raise InvalidParameter("a window needs at least 3 sites")
        if not (sigma > 0).all():
            raise InvalidParameter("trap depths must be positive")
        sigma.flags.writeable = False
        self.lo = int(lo)
        self.sigma = sigma
        self.boundary = boundary
        self._spectra: list[tuple[float, np.ndarray, np.ndarray]] = []

    @property
    def size(self) -> int:
        return self.sigma.size

    @property
    def hi(self) -> int:
        return self.lo + self.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def index(self, x: int) -> int:
        if not self.lo <= x <= self.hi:
            raise InvalidParameter(f"site {x} outside window [{self.lo}, {self.hi}]")
        return int(x) - self.lo

    def jump_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """Rates to the left and right neighbour.  Outward endpoint rates are zero
        when reflecting and are kept (as leakage) when absorbing."""
        half = 0.5 / self.sigma
        left, right = half.copy(), half.copy()
        if self.boundary == REFLECTING:
            left[0] = 0.0
            right[-1] = 0.0
        return left, right

    def exit_rates(self) -> np.ndarray:
        left, right = self.jump_rates()
        return left + right

    def dense(self) -> np.ndarray:
        left, right = self.jump_rates()
        Q = np.diag(-(left + right))
        Q[np.arange(self.size - 1), np.arange(1, self.size)] = right[:-1]
        Q[np.arange(1, self.size), np.arange(self.size - 1)] = left[1:]
        return Q

    def symmetric_tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of ``D^{1/2} Q D^{-1/2}`` with ``D = diag(sigma)``."""
        s = self.sigma
        return -self.exit_rates(), 0.5 / np.sqrt(s[:-1] * s[1:])

    def spectrum(self, cutoff: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of the symmetrized generator with eigenvalue >= ``-cutoff``
        (all of them when ``cutoff`` is None)."""
        full = cutoff is None or cutoff >= 2.5
        need = math.inf if full else cutoff
        for cut, w, V in self._spectra:
            if cut >= need:
                return w, V
        d, e = self.symmetric_tridiagonal()
        try:
            if full:
                w, V = linalg.eigh_tridiagonal(d, e)
            else:
                # MRRR: bisection would carry an absolute eigenvalue error near
                # eps * |T|, which exp(t * lambda) amplifies by t
                w, V = linalg.eigh_tridiagonal(d, e, select="v", select_range=(-cutoff, 1.0),
                                               lapack_driver="stemr")
        except (linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure("tridiagonal eigensolver failed", {"size": self.size, "error": str(exc)})
        if w.size and w.max() > 1e-10:
            raise NumericalFailure("generator has a positive eigenvalue", {"max_eigenvalue": float(w.max())})
        self._spectra.append((need, w, V))
        return w, V


def build_generator(landscape: Landscape, window: tuple[int, int], boundary: str = ABSORBING) -> Generator:
    lo, hi = int(window[0]), int(window[1])
    if hi - lo + 1 < 3:
        raise InvalidParameter("a window needs at least 3 sites")
    return Generator(lo, landscape.values(lo, hi), boundary)


@dataclass
class TransientResult:
    t: float
    lo: int
    pmf: np.ndarray
    deficit: float
    backend: str
    start: int
    boundary: str
    extras: dict = field(default_factory=dict)

    @property
    def hi(self) -> int:
        return self.lo + self.pmf.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def at(self, x: int) -> float:
        if not self.lo <= x <= self.hi:
            return 0.0
        return float(self.pmf[x - self.lo])

    def upper(self, x: int) -> float:
        """Rigorous upper bound on the infinite-lattice probability at ``x``."""
        return self.at(x) + self.deficit

    def sup(self, lo: int | None = None, hi: int | None = None) -> float:
        return float(self._slice(lo, hi).max())

    def argmax(self, lo: int | None = None, hi: int | None = None) -> int:
        lo = self.lo if lo is None else max(lo, self.lo)
        return lo + int(np.argmax(self._slice(lo, hi)))

    def _slice(self, lo, hi) -> np.ndarray:
        lo = self.lo if lo is None else max(lo, self.lo)
        hi = self.hi if hi is None else min(hi, self.hi)
        if hi < lo:
            raise InvalidParameter("requested range misses the solver window")
        return self.pmf[lo - self.lo: hi - self.lo + 1]


def _point_mass(gen: Generator, i0: int, backend: str) -> TransientResult:
    p = np.zeros(gen.size)
    p[i0] = 1.0
    return TransientResult(0.0, gen.lo, p, 0.0, backend, gen.lo + i0, gen.boundary)


def poisson_steps(t: float, tol: float) -> int:
    """Number of uniformization steps leaving Poisson tail mass below ``tol``."""
    return int(poisson.isf(tol, t)) + 1 if t > 0 else 0


def transient_uniformization(gen: Generator, init: int, t: float, tol: float = 1e-14,
                             max_steps: int | None = None) -> TransientResult:
    if t < 0 or tol <= 0:
        raise InvalidParameter("need t >= 0 and tol > 0")
    i0 = gen.index(init)
    if t == 0:
        return _point_mass(gen, i0, "uniformization")
    if gen.sigma.min() < 1.0:
        raise InvalidParameter("uniformization at rate 1 needs every sigma >= 1")
    steps = poisson_steps(t, tol)
    budget = current_budget().uniformization_steps if max_steps is None else max_steps
    if steps > budget:
        raise ResourceLimit(f"uniformization needs {steps} steps at t={t:g}, budget {budget}")
    weights = np.exp(poisson.logpmf(np.arange(steps + 1), t))
    left, right = gen.jump_rates()
    stay = 1.0 - 1.0 / gen.sigma if gen.boundary == ABSORBING else 1.0 - (left + right)
    p = np.zeros(gen.size)
    p[i0] = 1.0
    out = weights[0] * p
    for k in range(1, steps + 1):
        q = p * stay
        q[1:] += p[:-1] * right[:-1]
        q[:-1] += p[1:] * left[1:]
        p = q
        if weights[k] > 0:
            out += weights[k] * p
    return _finish(gen, out, t, gen.lo + i0, "uniformization", {"steps": steps})


def transient_spectral(gen: Generator, init: int, t: float) -> TransientResult:
    if t < 0:
        raise InvalidParameter("need t >= 0")
    i0 = gen.index(init)
    if t == 0:
        return _point_mass(gen, i0, "spectral")
    budget = current_budget().spectral_sites
    if gen.size > budget:
        raise ResourceLimit(f"window of {gen.size} sites exceeds the eigensolver budget {budget}")
    w, V = gen.spectrum(SPECTRAL_CUT / t)
    row = V @ (V[i0] * np.exp(t * w))
    scale = np.sqrt(gen.sigma / gen.sigma[i0])
    pmf = scale * row
    # rounding in the eigenvectors is amplified by the similarity transform
    noise = 1e-12 * np.maximum(1.0, scale)
    if (pmf < -noise).any():
        k = int(np.argmin(pmf + noise))
        raise NumericalFailure(
            "spectral reconstruction produced a negative probability",
            {"site": gen.lo + k, "value": float(pmf[k]), "t": t, "eigenpairs": int(w.size)},
        )
    return _finish(gen, pmf, t, gen.lo + i0, "spectral", {"eigenpairs": int(w.size)})


def _finish(gen, pmf, t, start, backend, extras) -> TransientResult:
    pmf = np.clip(pmf, 0.0, 1.0)
    total = float(pmf.sum())
    if gen.boundary == REFLECTING:
        if abs(total - 1.0) > 1e-10:
            raise NumericalFailure("reflecting pmf lost mass", {"total": total, "t": t})
        pmf = pmf / total
        deficit = 0.0
    else:
        if total > 1.0 + 1e-10:
            raise NumericalFailure("absorbing pmf gained mass", {"total": total, "t": t})
        if total > 1.0:
            pmf = pmf / total
            total = 1.0
        deficit = max(0.0, 1.0 - total)
    return TransientResult(float(t), gen.lo, pmf, deficit, backend, start, gen.boundary, extras)


def transient(gen: Generator, init: int, t: float, tol: float = 1e-14, backend: str = "auto") -> TransientResult:
    """Dispatch between the two backends.

    Uniformization is used while its step count and total work stay within
    budget; beyond that the spectral route takes over.
    """
    if backend == "uniformization":
        return transient_uniformization(gen, init, t, tol)
    if backend == "spectral":
        return transient_spectral(gen, init, t)
    if backend != "auto":
        raise InvalidParameter(f"unknown backend {backend!r}")
    if t == 0:
        return transient_spectral(gen, init, 0.0)
    b = current_budget()
    steps = poisson_steps(t, tol)
    if gen.sigma.min() >= 1.0 and steps <= b.uniformization_steps and steps * gen.size <= b.uniformization_work:
        return transient_uniformization(gen, init, t, tol)
    if gen.size <= b.spectral_sites:
        return transient_spectral(gen, init, t)
    if gen.sigma.min() >= 1.0 and steps <= b.uniformization_steps:
        return transient_uniformization(gen, init, t, tol)
    raise ResourceLimit(f"no backend fits t={t:g} on a window of {gen.size} sites")


def initial_radius(landscape: Landscape, start: int, t: float) -> int:
    """Starting half-width for the adaptive window.

    ``2 ceil(sqrt t)`` suits a flat landscape; deep traps slow the walk down, so
    the radius is cut to the first dyadic ``r`` at which ``r`` times the mass on
    either side of ``start`` reaches ``8 t``.
    """
    r_flat = max(2, 2 * math.ceil(math.sqrt(t)))
    r = 16
    while r < r_flat:
        try:
            left = landscape.values(start - r, start, materialize=True).sum()
            right = landscape.values(start, start + r, materialize=True).sum()
        except ResourceLimit:
            break
        if r * min(left, right) >= 8 * t:
            return r
        r *= 2
    return r_flat


def quenched_pmf(landscape: Landscape, t: float, tol: float = 1e-10, *, start: int = 0,
                 window_budget: int | None = None, radius: int | None = None,
                 max_doublings: int | None = None, backend: str = "auto",
                 stop=None) -> TransientResult:
    """Law of ``X_t`` started at ``start`` on the whole lattice, via absorbing windows.

    The window ``[start - r, start + r]`` doubles until the absorbed mass drops
    below ``tol``.  ``stop(result)`` may end the search early once the caller
    has what it needs (e.g. a verdict already decided).  Raises
    :class:`ResourceLimit` carrying the last result if the budget runs out.
    """
    if t < 0:
        raise InvalidParameter("need t >= 0")
    b = current_budget()
    budget = b.window_sites if window_budget is None else int(window_budget)
    doublings = b.window_doublings if max_doublings is None else max_doublings
    r = initial_radius(landscape, start, t) if radius is None else int(radius)
    r_max = (budget - 1) // 2
    r = max(1, min(r, r_max))
    last = None
    for _ in range(doublings + 1):
        gen = build_generator(landscape.materialize(start - r, start + r), (start - r, start + r))
        last = transient(gen, start, t, tol=min(tol, 1e-14) / 10, backend=backend)
        if last.deficit < tol or (stop is not None and stop(last)):
            return last
        if r >= r_max:
            break
        r = min(2 * r, r_max)
    raise ResourceLimit(
        f"window budget exhausted at t={t:g}: deficit {last.deficit:.3g} >= tol {tol:g}", achieved=last
    )


def survival_probability(landscape: Landscape, lo: int, hi: int, start: int, t: float) -> float:
    """``P^start(walk stays in [lo, hi] up to time t)``, killed on leaving."""
    if not lo <= start <= hi:
        raise InvalidParameter("start must lie inside the window")
    sigma = landscape.values(lo, hi, materialize=True)
    if sigma.size < 3:
        gen_dense = _small_killed_generator(sigma)
        p0 = np.zeros(sigma.size)
        p0[start - lo] = 1.0
        return float(np.clip(p0 @ linalg.expm(t * gen_dense), 0, 1).sum())
    gen = Generator(lo, sigma, ABSORBING)
    return 1.0 - transient(gen, start, t).deficit


def _small_killed_generator(sigma: np.ndarray) -> np.ndarray:
    n = sigma.size
    Q = np.diag(-1.0 / sigma)
    for i in range(n - 1):
        Q[i, i + 1] = 0.5 / sigma[i]
        Q[i + 1, i] = 0.5 / sigma[i + 1]
    return Q


# ---------------------------------------------------------------------------
# heat kernel


@dataclass
class HeatKernel:
    """``p_t(x, y) = P^x(X_t = y) / sigma_y`` on a window."""

    t: float
    lo: int
    matrix: np.ndarray

    def __call__(self, x: int, y: int) -> float:
        return float(self.matrix[x - self.lo, y - self.lo])

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()


def heat_kernel(gen: Generator, t: float) -> HeatKernel:
    """Full heat-kernel matrix for the window chain (dense; small windows only)."""
    if gen.size > current_budget().spectral_sites:
        raise ResourceLimit("window too large for a dense heat kernel")
    w, V = gen.spectrum(None)
    inv_sqrt = 1.0 / np.sqrt(gen.sigma)
    M = (V * np.exp(t * w)) @ V.T
    return HeatKernel(float(t), gen.lo, inv_sqrt[:, None] * M * inv_sqrt[None, :])


def heat_kernel_diagonal(gen: Generator, times) -> np.ndarray:
    """``p_t(x, x)`` for every site (columns) at each time (rows)."""
    w, V = gen.spectrum(None)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return (np.exp(np.outer(times, w)) @ (V**2).T) / gen.sigma


# ---------------------------------------------------------------------------
# path simulation


@dataclass
class PathRecord:
    site: int
    time: float
    n_jumps: int
    hits: dict


def simulate_path(landscape: Landscape, t_end: float, seed: int, *, start: int = 0, targets=()) -> PathRecord:
    """One event-driven path up to ``t_end``; ``hits`` maps each requested target
    to its first hitting time (absent if not reached)."""
    rng = np.random.default_rng(seed)
    x, clock, jumps = int(start), 0.0, 0
    targets = set(int(z) for z in targets)
    hits = {x: 0.0} if x in targets else {}
    lo = hi = x
    landscape.materialize(x, x)
    while True:
        hold = rng.exponential(landscape[x])
        if clock + hold >= t_end:
            return PathRecord(x, float(t_end), jumps, hits)
        clock += hold
        x += 1 if rng.random() < 0.5 else -1
        jumps += 1
        if x < lo or x > hi:
            lo, hi = min(lo, x), max(hi, x)
            landscape.materialize(lo, hi)
        if x in targets and x not in hits:
            hits[x] = clock


@dataclass
class PathBatch:
    site: np.ndarray
    stopped: np.ndarray
    time: np.ndarray
    n_jumps: np.ndarray


def simulate_paths(landscape: Landscape, t_end: float, n_paths: int, seed: int, *, start: int = 0,
                   stop_sites=None, chunk: int = 1_000_000, max_iter: int = 10_000_000) -> PathBatch:
    """Many independent paths, vectorized across paths.

    A path ends at ``t_end`` or on the first jump *into* one of ``stop_sites``
    (the starting site counts only after the path has left it).  Chunks draw
    from independent child streams of ``seed`` so results do not depend on how
    many paths run at once beyond the chunk size.
    """
    stops = np.array(sorted(set(int(s) for s in (stop_sites or ()))), dtype=np.int64)
    children = np.random.SeedSequence(seed).spawn(math.ceil(n_paths / chunk))
    out = [_run_chunk(landscape, t_end, min(chunk, n_paths - k * chunk), np.random.default_rng(ss),
                      start, stops, max_iter)
           for k, ss in enumerate(children)]
    return PathBatch(*(np.concatenate([o[i] for o in out]) for i in range(4)))


def _run_chunk(landscape, t_end, m, rng, start, stops, max_iter):
    pos = np.full(m, start, dtype=np.int64)
    clock = np.zeros(m)
    jumps = np.zeros(m, dtype=np.int64)
    stopped = np.zeros(m, dtype=bool)
    active = np.arange(m)
    lo, hi = start - 64, start + 64
    sig = landscape.values(lo, hi, materialize=True)
    for _ in range(max_iter):
        if active.size == 0:
            break
        p = pos[active]
        hold = rng.standard_exponential(active.size) * sig[p - lo]
        done = clock[active] + hold >= t_end
        moving = active[~done]
        clock[moving] += hold[~done]
        step = np.where(rng.random(moving.size) < 0.5, 1, -1)
        pos[moving] += step
        jumps[moving] += 1
        if moving.size:
            pmin, pmax = int(pos[moving].min()), int(pos[moving].max())
            if pmin < lo or pmax > hi:
                width = hi - lo
                lo, hi = min(lo, pmin - width // 2), max(hi, pmax + width // 2)
                sig = landscape.values(lo, hi, materialize=True)
        if stops.size:
            hit = np.isin(pos[moving], stops)
            stopped[moving[hit]] = True
            moving = moving[~hit]
        active = moving
    else:
        raise ResourceLimit("path simulation did not finish within max_iter steps")
    clock[~stopped] = t_end
    return pos, stopped, clock, jumps
