"""Scale sequences, interval partitions and favourable landscape events.

Two families of events are provided.  The localisation family asks for one
trap in ``[1, a_n]`` that dwarfs the total mass of ``[-b_n, b_n]``; the
delocalisation family asks for ``2K + 1`` consecutive blocks of length ``a_n``
that each carry comparable mass and no dominant trap.

All intervals here are closed integer intervals ``(lo, hi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .budget import current_budget
from .errors import InvalidParameter, PreconditionViolation, ResourceLimit
from .landscape import Landscape, check_alpha, interval_stats

LOC_EVENTS = ("A_loc", "B_loc", "E_loc")
DELOC_EVENTS = ("A_deloc", "B_deloc", "E_deloc")


def ell_alpha(alpha: float, n: float) -> float:
    """Logarithmic correction: 1 for alpha < 1, log n for alpha = 1."""
    alpha = check_alpha(alpha, main_model=True)
    if n < 1:
        raise InvalidParameter(f"ell_alpha needs n >= 1, got {n}")
    if alpha < 1:
        return 1.0
    return _log(n)


def _log(n) -> float:
    # math.log handles arbitrarily large Python ints exactly enough
    return math.log(n)


def scale_a(n: int) -> int:
    """``a_n = floor(exp(2 n log n)) = n**(2n)``, computed exactly."""
    n = int(n)
    if n < 1:
        raise InvalidParameter(f"scale index must be >= 1, got {n}")
    bits = 2 * n * math.log2(n) if n > 1 else 1
    if bits > current_budget().scale_bits:
        raise ResourceLimit(f"a_{n} has about {bits:.0f} bits, beyond the configured budget")
    return n ** (2 * n)


def _as_fraction(eps: float) -> Fraction:
    # decimal reading of eps so that 0.3 means 3/10, not its binary neighbour
    return Fraction(repr(float(eps)))


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0 < eps < 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1), got {eps}")
    return eps


def scale_b(n: int, eps: float) -> int:
    """``b_n = ceil(a_n / eps)`` in exact rational arithmetic."""
    check_epsilon(eps)
    return math.ceil(scale_a(n) / _as_fraction(eps))


def base_threshold(alpha: float, a: int) -> float:
    """``a**(1/alpha) * ell_alpha(a)``, the natural size of a block sum of length a."""
    alpha = check_alpha(alpha, main_model=True)
    try:
        return float(a) ** (1.0 / alpha) * ell_alpha(alpha, a)
    except OverflowError:
        return math.exp(_log(a) / alpha + _log_ell(alpha, a))


def _log_ell(alpha: float, a: int) -> float:
    ell = ell_alpha(alpha, a)
    return math.log(ell) if ell > 0 else -math.inf


@dataclass(frozen=True)
class LocScales:
    n: int
    epsilon: float
    alpha: float
    a_n: int
    b_n: int
    ell: float
    log_t_n: float

    @property
    def t_n(self) -> float:
        """``eps**-2 a_n**(1 + 1/alpha) ell`` (inf when it overflows; see ``log_t_n``)."""
        try:
            return math.exp(self.log_t_n)
        except OverflowError:
            return math.inf

    @property
    def threshold(self) -> float:
        return base_threshold(self.alpha, self.a_n)


def loc_scales(n: int, eps: float, alpha: float) -> LocScales:
    eps = check_epsilon(eps)
    alpha = check_alpha(alpha, main_model=True)
    a = scale_a(n)
    ell = ell_alpha(alpha, a)
    log_t = -2 * math.log(eps) + (1 + 1 / alpha) * _log(a) + _log_ell(alpha, a)
    return LocScales(int(n), eps, alpha, a, scale_b(n, eps), ell, log_t)


@dataclass(frozen=True)
class DelocScales:
    n: int
    epsilon: float
    K: int
    alpha: float
    a_n: int
    ell: float
    log_t_n: float

    @property
    def t_n(self) -> float:
        """``12 a_n**(1 + 1/alpha) ell``."""
        try:
            return math.exp(self.log_t_n)
        except OverflowError:
            return math.inf

    @property
    def threshold(self) -> float:
        return base_threshold(self.alpha, self.a_n)

    def grid_site(self, k: int) -> int:
        return k * self.a_n

    def block(self, k: int) -> tuple[int, int]:
        """``I_{n,k} = [k a_n, (k+1) a_n)`` as a closed interval."""
        return (k * self.a_n, (k + 1) * self.a_n - 1)

    def blocks(self) -> list[tuple[int, tuple[int, int]]]:
        return [(k, self.block(k)) for k in range(-self.K, self.K + 1)]

    @property
    def span(self) -> tuple[int, int]:
        return (-self.K * self.a_n, (self.K + 1) * self.a_n - 1)


def deloc_scales(n: int, eps: float, K: int, alpha: float) -> DelocScales:
    eps = check_epsilon(eps)
    alpha = check_alpha(alpha, main_model=True)
    if int(K) < 1:
        raise InvalidParameter(f"K must be a positive integer, got {K}")
    a = scale_a(n)
    ell = ell_alpha(alpha, a)
    log_t = math.log(12) + (1 + 1 / alpha) * _log(a) + _log_ell(alpha, a)
    return DelocScales(int(n), eps, int(K), alpha, a, ell, log_t)


# ---------------------------------------------------------------------------
# events


@dataclass
class EventReport:
    event: str
    n: int
    epsilon: float
    K: int | None
    holds: bool
    M: float
    S: float
    margin: float
    witnesses: dict = field(default_factory=dict)


def _stats(landscape: Landscape, lo: int, hi: int) -> tuple[float, float, int | None]:
    """(sum, max, argmax) allowing empty intervals, whose sum and max are 0."""
    if hi < lo:
        return 0.0, 0.0, None
    st = interval_stats(landscape, lo, hi)
    return st.sum, st.max, st.argmax


def _require(landscape: Landscape, lo: int, hi: int) -> None:
    if not landscape.is_materialized(lo, hi):
        raise PreconditionViolation(f"event needs the landscape materialized on [{lo}, {hi}]")


def loc_blocks(n: int, eps: float) -> tuple[tuple[int, int], list[tuple[int, int]]]:
    """``I_n`` and the (up to two) pieces of ``J_n`` as closed intervals."""
    a, b = scale_a(n), scale_b(n, eps)
    if n == 1:
        return (1, a), [(-b, 0), (a + 1, b)]
    b_prev = scale_b(n - 1, eps)
    return (b_prev + 1, a), [(-b, -b_prev - 1), (a + 1, b)]


def check_E_loc(landscape: Landscape, n: int, eps: float) -> EventReport:
    sc = loc_scales(n, eps, landscape.alpha)
    _require(landscape, -sc.b_n, sc.b_n)
    thr = sc.threshold
    S_bar, _, _ = _stats(landscape, -sc.b_n, sc.b_n)
    _, M, x_n = _stats(landscape, 1, sc.a_n)
    slack_max = M - thr / eps**2
    slack_rest = 3 * thr / eps - (S_bar - M)
    holds = slack_max > 0 and slack_rest > 0
    S_a, _, _ = _stats(landscape, 1, sc.a_n)
    return EventReport(
        "E_loc", sc.n, eps, None, holds, M, S_bar, min(slack_max, slack_rest) / thr,
        {"x_n": x_n, "S_a": S_a, "slack_max": slack_max, "slack_rest": slack_rest, "threshold": thr,
         "b_n": sc.b_n, "a_n": sc.a_n},
    )


def check_A_loc(landscape: Landscape, n: int, eps: float) -> EventReport:
    sc = loc_scales(n, eps, landscape.alpha)
    _require(landscape, -sc.b_n, sc.b_n)
    thr = sc.threshold
    (ilo, ihi), js = loc_blocks(n, eps)
    S_I, M_I, arg = _stats(landscape, ilo, ihi)
    S_J = sum(_stats(landscape, lo, hi)[0] for lo, hi in js)
    slack_max = M_I - thr / eps**2
    slack_rest = 2 * thr / eps - (S_I + S_J - M_I)
    holds = ihi >= ilo and slack_max > 0 and slack_rest > 0
    return EventReport(
        "A_loc", sc.n, eps, None, holds, M_I, S_I + S_J, min(slack_max, slack_rest) / thr,
        {"argmax": arg, "I_n": (ilo, ihi), "J_n": js, "slack_max": slack_max, "slack_rest": slack_rest},
    )


def check_B_loc(landscape: Landscape, n: int, eps: float) -> EventReport:
    """Two-sided sum over ``[-b_{n-1}, b_{n-1}]`` below the block threshold.

    For ``n = 1`` there is no previous scale and the sum is empty, so the event holds.
    """
    sc = loc_scales(n, eps, landscape.alpha)
    _require(landscape, -sc.b_n, sc.b_n)
    thr = sc.threshold
    if n == 1:
        S = 0.0
    else:
        bp = scale_b(n - 1, eps)
        S = _stats(landscape, -bp, bp)[0]
    slack = thr - S
    return EventReport("B_loc", sc.n, eps, None, slack > 0, 0.0, S, slack / thr, {"slack": slack})


def tilde_blocks(n: int, K: int) -> dict[int, tuple[int, int]]:
    """Blocks used by the independent delocalisation event (``n >= 2``).

    Blocks 0 and -1 have the inner core ``[-K a_{n-1}, (K+1) a_{n-1})`` removed.
    """
    if n < 2:
        raise InvalidParameter("the delocalisation construction starts at n = 2")
    a, ap = scale_a(n), scale_a(n - 1)
    out = {k: (k * a, (k + 1) * a - 1) for k in range(-K, K + 1)}
    out[0] = ((K + 1) * ap, a - 1)
    out[-1] = (-a, -K * ap - 1)
    return out


def core_interval(n: int, K: int) -> tuple[int, int]:
    ap = scale_a(n - 1)
    return (-K * ap, (K + 1) * ap - 1)


def _block_report(event, landscape, sc, blocks, hi_factor):
    thr = sc.threshold
    worst = math.inf
    rows = {}
    M_all, S_all = 0.0, 0.0
    holds = True
    for k, (lo, hi) in blocks.items():
        S, M, arg = _stats(landscape, lo, hi)
        slack_lo = S - 0.5 * thr
        slack_hi = hi_factor * thr - S
        slack_max = sc.epsilon * thr - M
        ok = hi >= lo and slack_lo > 0 and slack_hi > 0 and slack_max > 0
        holds &= ok
        worst = min(worst, slack_lo, slack_hi, slack_max)
        rows[k] = {"interval": (lo, hi), "S": S, "M": M, "argmax": arg, "holds": ok}
        M_all, S_all = max(M_all, M), S_all + S
    return EventReport(event, sc.n, sc.epsilon, sc.K, holds, M_all, S_all, worst / thr, {"blocks": rows})


def check_E_deloc(landscape: Landscape, n: int, eps: float, K: int) -> EventReport:
    sc = deloc_scales(n, eps, K, landscape.alpha)
    _require(landscape, *sc.span)
    return _block_report("E_deloc", landscape, sc, dict(sc.blocks()), 2.0)


def check_A_deloc(landscape: Landscape, n: int, eps: float, K: int) -> EventReport:
    sc = deloc_scales(n, eps, K, landscape.alpha)
    _require(landscape, *sc.span)
    return _block_report("A_deloc", landscape, sc, tilde_blocks(n, K), 1.5)


def check_B_deloc(landscape: Landscape, n: int, eps: float, K: int) -> EventReport:
    sc = deloc_scales(n, eps, K, landscape.alpha)
    _require(landscape, *sc.span)
    if n < 2:
        raise InvalidParameter("the delocalisation construction starts at n = 2")
    lo, hi = core_interval(n, K)
    S = _stats(landscape, lo, hi)[0]
    slack = min(0.5, eps) * sc.threshold - S
    return EventReport("B_deloc", sc.n, eps, K, slack > 0, 0.0, S, slack / sc.threshold,
                       {"core": (lo, hi), "slack": slack})


def loc_span(n: int, eps: float) -> tuple[int, int]:
    b = scale_b(n, eps)
    return (-b, b)


def deloc_span(n: int, K: int) -> tuple[int, int]:
    a = scale_a(n)
    return (-K * a, (K + 1) * a - 1)


def check_event(event: str, landscape: Landscape, n: int, eps: float, K: int = 2) -> EventReport:
    table = {
        "A_loc": lambda: check_A_loc(landscape, n, eps),
        "B_loc": lambda: check_B_loc(landscape, n, eps),
        "E_loc": lambda: check_E_loc(landscape, n, eps),
        "A_deloc": lambda: check_A_deloc(landscape, n, eps, K),
        "B_deloc": lambda: check_B_deloc(landscape, n, eps, K),
        "E_deloc": lambda: check_E_deloc(landscape, n, eps, K),
    }
    if event not in table:
        raise InvalidParameter(f"unknown event {event!r}")
    return table[event]()
