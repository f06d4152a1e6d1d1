"""First-passage functionals of the trap-model walk.

The closed forms rely on the jump chain being simple random walk, so hitting
probabilities do not depend on the landscape and mean exit times are linear in
it.  Each closed form has a counterpart that solves the generator equations
``(Q h) = 0`` or ``(Q m) = -1`` on the domain as a banded linear system; those
solvers know nothing about the formulas and serve as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import solve_banded

from .errors import InvalidParameter
from .landscape import Landscape


@dataclass(frozen=True)
class ExitProblem:
    """Walk started at ``start`` inside ``(center - radius, center + radius)``,
    with ``target`` a site of that open interval."""

    center: int
    radius: int
    start: int
    target: int

    def __post_init__(self):
        if self.radius < 1:
            raise InvalidParameter("radius must be a positive integer")
        if not abs(self.start - self.center) < self.radius:
            raise InvalidParameter("start must lie strictly inside the domain")
        if not abs(self.target - self.center) < self.radius:
            raise InvalidParameter("target must lie strictly inside the domain")

    @property
    def domain(self) -> tuple[int, int]:
        """Closed interval of sites the walk occupies before exiting."""
        return (self.center - self.radius + 1, self.center + self.radius - 1)


def gambler_ruin(x: int, y: int) -> float:
    """P(walk from 0 hits x before -y) = y / (x + y)."""
    if x < 1 or y < 1:
        raise InvalidParameter("need x, y >= 1")
    return y / (x + y)


def hit_before_exit(problem: ExitProblem) -> float:
    x, r, y, i = problem.center, problem.radius, problem.start, problem.target
    return min((x + r - y) / (x + r - i), (y - x + r) / (i - x + r))


def return_escape(problem: ExitProblem) -> float:
    """P^i(exit the domain before returning to i), with i the target."""
    x, r, i = problem.center, problem.radius, problem.target
    return 0.5 * (1.0 / (i - x + r) + 1.0 / (x + r - i))


def exit_weights(center: int, radius: int, start: int, exact: bool = False):
    """Per-site weights w_i with ``E^start tau = sum_i w_i sigma_i`` over the domain."""
    x, r, y = center, radius, start
    if not abs(y - x) < r:
        raise InvalidParameter("start must lie strictly inside the domain")
    num = Fraction if exact else float
    out = []
    for i in range(x - r + 1, x + r):
        hit = min(num(x + r - y) / (x + r - i), num(y - x + r) / (i - x + r))
        out.append(2 * hit / (num(1) / (i - x + r) + num(1) / (x + r - i)))
    return out if exact else np.array(out)


def expected_exit_time(landscape: Landscape, center: int, radius: int, start: int, exact: bool = False):
    """Mean exit time from ``(center - radius, center + radius)``.

    With ``exact=True`` the sum runs in rational arithmetic over the exact binary
    values of sigma and a :class:`~fractions.Fraction` is returned.
    """
    sigma = landscape.values(center - radius + 1, center + radius - 1)
    w = exit_weights(center, radius, start, exact)
    if exact:
        return sum((wi * Fraction(float(s)) for wi, s in zip(w, sigma)), Fraction(0))
    return float(w @ sigma)


@dataclass(frozen=True)
class TailBounds:
    upper_raw: float
    lower_raw: float

    @property
    def upper(self) -> float:
        return min(1.0, max(0.0, self.upper_raw))

    @property
    def lower(self) -> float:
        return min(1.0, max(0.0, self.lower_raw))


def exit_tail_bounds(landscape: Landscape, x: int, y: int, t: float) -> TailBounds:
    """Upper bound on ``P(tau_x ^ tau_{-y} >= t)`` from 0 and lower bound on
    ``P^x(tau_{-y} ^ tau_y > t)``."""
    if not 0 < x < y:
        raise InvalidParameter("need 0 < x < y")
    if not t > 0:
        raise InvalidParameter("need t > 0")
    mass = float(landscape.values(-y + 1, x - 1).sum())
    sigma_x = landscape[x]
    return TailBounds(x * mass / t, 1.0 - t / ((y - x) * sigma_x))


# ---------------------------------------------------------------------------
# linear-system oracle


def _solve_generator(sigma: np.ndarray, rhs: np.ndarray, left_bc: float, right_bc: float,
                     pinned: dict[int, float] | None = None) -> np.ndarray:
    """Solve ``(Q u)_j = rhs_j`` on interior sites with Dirichlet values just outside.

    ``Q`` has rates ``1/(2 sigma)`` to each neighbour.  ``pinned`` fixes ``u`` at
    interior indices (used for a target site).
    """
    n = sigma.size
    rate = 0.5 / sigma
    ab = np.zeros((3, n))
    ab[0, 1:] = rate[:-1]          # super-diagonal: coefficient of u_{j+1} in row j
    ab[1, :] = -2 * rate
    ab[2, :-1] = rate[1:]          # sub-diagonal: coefficient of u_{j-1} in row j
    b = np.asarray(rhs, dtype=float).copy()
    b[0] -= rate[0] * left_bc
    b[-1] -= rate[-1] * right_bc
    for j, val in (pinned or {}).items():
        ab[1, j] = 1.0
        if j + 1 < n:
            ab[0, j + 1] = 0.0
        if j - 1 >= 0:
            ab[2, j - 1] = 0.0
        b[j] = val
    return solve_banded((1, 1), ab, b)


def harmonic_hit_probability(landscape: Landscape, lo: int, hi: int, target: int) -> np.ndarray:
    """``h(z) = P^z(hit target before leaving [lo, hi])`` for z in ``lo..hi``,
    solved from the generator equations."""
    sigma = landscape.values(lo, hi)
    return _solve_generator(sigma, np.zeros(sigma.size), 0.0, 0.0, {target - lo: 1.0})


def oracle_gambler_ruin(landscape: Landscape, x: int, y: int) -> float:
    sigma = landscape.values(-y + 1, x - 1)
    h = _solve_generator(sigma, np.zeros(sigma.size), 0.0, 1.0)
    return float(h[y - 1])


def oracle_hit_before_exit(landscape: Landscape, problem: ExitProblem) -> float:
    lo, hi = problem.domain
    return float(harmonic_hit_probability(landscape, lo, hi, problem.target)[problem.start - lo])


def oracle_return_escape(landscape: Landscape, problem: ExitProblem) -> float:
    lo, hi = problem.domain
    i = problem.target
    h = harmonic_hit_probability(landscape, lo, hi, i)
    back_right = h[i + 1 - lo] if i + 1 <= hi else 0.0
    back_left = h[i - 1 - lo] if i - 1 >= lo else 0.0
    return 0.5 * (1 - back_right) + 0.5 * (1 - back_left)


def oracle_expected_exit_time(landscape: Landscape, center: int, radius: int) -> np.ndarray:
    """Mean exit times from every start in the domain, from ``(Q m) = -1``."""
    sigma = landscape.values(center - radius + 1, center + radius - 1)
    return _solve_generator(sigma, -np.ones(sigma.size), 0.0, 0.0)
