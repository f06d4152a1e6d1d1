"""Reproducible heavy-tailed trapping landscapes on the integers.

Each trap is ``sigma_x = U_x ** (-1/alpha)`` where ``U_x`` is a uniform variate
in (0, 1] produced by a counter-based generator keyed on ``(seed, x)``: the
value at a site never depends on which other sites were generated, or in what
order.  The generator is the SplitMix64 output function evaluated at counter
``x`` of a stream whose state is the mixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .budget import current_budget
from .errors import InvalidParameter, PreconditionViolation, ResourceLimit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

CACHE_MAGIC = "btm-landscape v1"


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def _stream_key(seed: int) -> np.uint64:
    with np.errstate(over="ignore"):
        return _mix64(np.array([seed & _MASK64], dtype=np.uint64) + _GOLDEN)[0]


def uniforms(seed: int, sites) -> np.ndarray:
    """Uniform (0, 1] variates for the given integer sites under ``seed``."""
    x = np.asarray(sites, dtype=np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        h = _mix64(_stream_key(seed) + x * _GOLDEN)
    u = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u[u == 0.0] = 1.0
    return u


def check_alpha(alpha: float, *, main_model: bool = False) -> float:
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise InvalidParameter(f"alpha must be positive, got {alpha}")
    if main_model and alpha > 1:
        raise InvalidParameter(f"alpha must lie in (0, 1] for the trap model proper, got {alpha}")
    return alpha


def sigma_from_uniform(u, alpha: float):
    """Inverse tail transform: P(sigma >= s) = s**-alpha for s >= 1."""
    return np.power(u, -1.0 / alpha)


def sample_trap(seed: int, alpha: float, x: int, *, uniform: float | None = None) -> float:
    """Trap depth at site ``x``.  ``uniform`` overrides the generated variate."""
    alpha = check_alpha(alpha)
    u = float(uniforms(seed, [x])[0]) if uniform is None else float(uniform)
    if not 0.0 < u <= 1.0:
        raise InvalidParameter(f"uniform variate must lie in (0, 1], got {u}")
    return float(sigma_from_uniform(u, alpha))


def sample_traps(seed: int, alpha: float, sites) -> np.ndarray:
    return sigma_from_uniform(uniforms(seed, sites), check_alpha(alpha))


@dataclass(frozen=True)
class IntervalStats:
    lo: int
    hi: int
    sum: float
    max: float
    argmax: int

    @property
    def interval(self) -> tuple[int, int]:
        return (self.lo, self.hi)


class Landscape:
    """Trap depths over a lazily materialized contiguous range of sites.

    A landscape is random (``seed`` given, values from :func:`sample_traps`),
    constant outside a set of explicit values (``fill``), or purely explicit.
    Explicit ``overrides`` always take precedence, which is how constructed
    configurations are planted on top of random backgrounds.
    """

    def __init__(
        self,
        seed: int | None,
        alpha: float,
        *,
        fill: float | None = None,
        overrides: Mapping[int, float] | None = None,
        scale: float = 1.0,
        max_sites: int | None = None,
    ):
        if seed is not None and fill is not None:
            raise InvalidParameter("give either a seed or a fill value, not both")
        self.seed = None if seed is None else int(seed) & _MASK64
        self.alpha = check_alpha(alpha)
        self.fill = None if fill is None else float(fill)
        self.scale = float(scale)
        self.overrides = {int(k): float(v) for k, v in (overrides or {}).items()}
        for x, v in self.overrides.items():
            if not v > 0:
                raise InvalidParameter(f"trap depth at {x} must be positive, got {v}")
        self.max_sites = current_budget().landscape_sites if max_sites is None else int(max_sites)
        self._lo = 0
        self._values = np.empty(0)

    # construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, value: float, alpha: float = 0.5, **kw) -> "Landscape":
        return cls(None, alpha, fill=value, **kw)

    @classmethod
    def from_values(cls, values, start: int = 0, alpha: float = 0.5, fill: float | None = None) -> "Landscape":
        values = np.asarray(values, dtype=float)
        overrides = {start + i: float(v) for i, v in enumerate(values)}
        land = cls(None, alpha, fill=fill, overrides=overrides)
        land.materialize(start, start + len(values) - 1)
        return land

    def with_overrides(self, overrides: Mapping[int, float]) -> "Landscape":
        merged = dict(self.overrides)
        merged.update({int(k): float(v) / self.scale for k, v in overrides.items()})
        return Landscape(
            self.seed, self.alpha, fill=self.fill, overrides=merged, scale=self.scale, max_sites=self.max_sites
        )

    def scaled(self, c: float) -> "Landscape":
        """The landscape ``c * sigma``."""
        out = Landscape(
            self.seed, self.alpha, fill=self.fill, overrides=self.overrides, scale=self.scale * c,
            max_sites=self.max_sites,
        )
        if self.materialized:
            out.materialize(*self.range)
        return out

    # materialization ------------------------------------------------------

    @property
    def materialized(self) -> bool:
        return self._values.size > 0

    @property
    def range(self) -> tuple[int, int]:
        if not self.materialized:
            raise PreconditionViolation("landscape has no materialized sites")
        return (self._lo, self._lo + self._values.size - 1)

    def is_materialized(self, lo: int, hi: int) -> bool:
        if not self.materialized:
            return False
        l, r = self.range
        return l <= lo and hi <= r

    def _generate(self, lo: int, hi: int) -> np.ndarray:
        sites = np.arange(lo, hi + 1, dtype=np.int64)
        if self.seed is not None:
            vals = sample_traps(self.seed, self.alpha, sites)
        elif self.fill is not None:
            vals = np.full(sites.size, self.fill)
        else:
            vals = np.full(sites.size, np.nan)
        for x, v in self.overrides.items():
            if lo <= x <= hi:
                vals[x - lo] = v
        if np.isnan(vals).any():
            missing = int(sites[np.isnan(vals)][0])
            raise PreconditionViolation(f"constructed landscape has no value at site {missing}")
        if self.scale != 1.0:
            vals = vals * self.scale
        return vals

    def materialize(self, lo: int, hi: int) -> "Landscape":
        """Ensure sites ``lo..hi`` (inclusive) are present.  Idempotent."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise InvalidParameter(f"empty interval [{lo}, {hi}]")
        if self.materialized:
            l, r = self.range
            new_lo, new_hi = min(lo, l), max(hi, r)
        else:
            new_lo, new_hi = lo, hi
        if new_hi - new_lo + 1 > self.max_sites:
            raise ResourceLimit(
                f"materializing [{new_lo}, {new_hi}] needs {new_hi - new_lo + 1} sites, budget {self.max_sites}"
            )
        if not self.materialized:
            self._lo, self._values = lo, self._generate(lo, hi)
            return self
        l, r = self.range
        parts = []
        if new_lo < l:
            parts.append(self._generate(new_lo, l - 1))
        parts.append(self._values)
        if new_hi > r:
            parts.append(self._generate(r + 1, new_hi))
        if len(parts) > 1:
            self._lo, self._values = new_lo, np.concatenate(parts)
        return self

    def values(self, lo: int, hi: int, *, materialize: bool = False) -> np.ndarray:
        """Read-only view of sigma on ``lo..hi``."""
        if materialize:
            self.materialize(lo, hi)
        elif not self.is_materialized(lo, hi):
            raise PreconditionViolation(f"interval [{lo}, {hi}] is not materialized")
        view = self._values[lo - self._lo: hi - self._lo + 1]
        view.flags.writeable = False
        return view

    def __getitem__(self, x: int) -> float:
        return float(self.values(x, x)[0])

    def as_dict(self) -> dict[int, float]:
        l, r = self.range
        return {x: float(v) for x, v in zip(range(l, r + 1), self._values)}

    # cache file ------------------------------------------------------------

    def header(self) -> str:
        l, r = self.range
        seed = "none" if self.seed is None else str(self.seed)
        return f"{CACHE_MAGIC} seed={seed} alpha={self.alpha!r} range={l}..{r}"

    def save(self, path) -> None:
        l, r = self.range
        lines = [self.header()]
        lines += [f"{x},{v:.17g}" for x, v in zip(range(l, r + 1), self._values)]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Landscape":
        """Read a cache file.  Values come back exactly; a seeded file keeps its seed
        so the landscape can keep growing beyond the cached range."""
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith(CACHE_MAGIC + " "):
                raise InvalidParameter(f"not a landscape cache file: {header[:40]!r}")
            meta = dict(tok.split("=", 1) for tok in header[len(CACHE_MAGIC) + 1:].split())
            data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
        lo, hi = (int(v) for v in meta["range"].split(".."))
        if data.shape[0] != hi - lo + 1 or not np.array_equal(data[:, 0], np.arange(lo, hi + 1)):
            raise InvalidParameter("cache rows do not match the header range")
        seed = None if meta["seed"] == "none" else int(meta["seed"])
        alpha = float(meta["alpha"])
        if seed is None:
            land = cls.from_values(data[:, 1], lo, alpha)
        else:
            land = cls(seed, alpha)
            land._lo, land._values = lo, data[:, 1].copy()
        return land


def interval_stats(landscape: Landscape, lo: int, hi: int) -> IntervalStats:
    """Sum, maximum and (smallest) argmax of sigma over ``lo..hi``."""
    if hi < lo:
        raise InvalidParameter(f"empty interval [{lo}, {hi}]")
    vals = landscape.values(lo, hi)
    k = int(np.argmax(vals))
    return IntervalStats(lo, hi, float(vals.sum()), float(vals[k]), lo + k)
