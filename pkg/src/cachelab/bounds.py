"""Exact storage-rate bounds for centralized and D2D cache-aided delivery.

Achievable rates (upper bounds)
-------------------------------
Repetition of the single-demand coded multicast scheme gives, at the corner
points M = N*t/K with integer t, the centralized rate

    R_cen(M) = K*L*(1 - M/N) * min( 1/(1 + K*M/N), N/(K*L) )

and the D2D rate

    R_d2d(M) = min( (L*N/M)*(1 - M/N), N ).

Between corners, memory sharing achieves the lower convex envelope of the
corner values; both evaluation modes are exposed (`EvalMode`).

Lower bounds
------------
The two-parameter converse, maximized over an integer pair (s, ell) where s
counts caches and ell counts transmissions used by the cut:

    centralized:
        (1/ell) * { N - s*M - mu*(N - L*ell*s)^+ / (s + mu) - (N - K*L*ell)^+ }
        over s in [1 : min(ceil(N/L), K)], ell in [1 : ceil(N/(L*s))]

    D2D:
        { N - s*M - mu*(N - L*ell*s)^+ / (s + mu) } / ( ell*(K - s)/K )
        over s in [1 : min(ceil(N/L), K-1)], ell in [1 : ceil(N/(L*s))]

with mu = min(ceil(N/(L*ell)), K) - s in both. s = K is excluded in D2D
because the denominator vanishes there (that choice only reproduces the
minimum-storage constraint K*M >= N, which config validation enforces).
Individual terms may be negative for large M; the maximized bound is clamped
at zero since rates are nonnegative.

Cut-set baselines
-----------------
The classical single-demand cut-set bound max_s ( s - s*M/floor(N/s) ) for
centralized L = 1; for L > 1 the comparison baseline is the two-parameter
bound restricted to ell = ceil(N/(L*s)). The D2D baseline is the classical
cut over s caches and floor(N/(L*s)) device transmission intervals,

    { N - s*M - (N - L*ell*s)^+ } / ( ell*(K - s)/K ),  ell = floor(N/(L*s)),

i.e. without the mu-refinement that makes the main bound tighter.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import comb

from .core import (
    DeliveryMode,
    DomainError,
    ModeMismatchError,
    SystemConfig,
    format_rational,
)


class EvalMode(Enum):
    FORMULA_AT_M = "formula"
    CORNER_ENVELOPE = "envelope"


@dataclass(frozen=True, slots=True)
class BoundTerm:
    s: int
    ell: int
    mu: int
    value: Fraction


@dataclass(frozen=True)
class BoundResult:
    """A maximized bound: its value, the maximizing (s, ell), and all terms.

    `value` is the term maximum clamped below at 0. Ties are broken by the
    smallest s, then the smallest ell. An empty domain (e.g. D2D with K = 1)
    yields value 0 with no argmax.
    """

    value: Fraction
    best_s: int | None
    best_ell: int | None
    mu_at_best: int | None
    terms: tuple[BoundTerm, ...]

    def to_json_dict(self) -> dict:
        return {
            "value": format_rational(self.value),
            "s": self.best_s,
            "ell": self.best_ell,
            "mu": self.mu_at_best,
            "terms": [
                {
                    "s": t.s,
                    "ell": t.ell,
                    "mu": t.mu,
                    "value": format_rational(t.value),
                }
                for t in self.terms
            ],
        }

    def terms_csv(self) -> str:
        lines = ["s,ell,mu,value"]
        for t in self.terms:
            lines.append(f"{t.s},{t.ell},{t.mu},{format_rational(t.value)}")
        return "\n".join(lines) + "\n"


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _mu(n: int, k: int, l: int, s: int, ell: int) -> int:
    return min(_ceil_div(n, l * ell), k) - s


def _require_mode(config: SystemConfig, mode: DeliveryMode) -> None:
    if config.mode is not mode:
        raise ModeMismatchError(
            f"operation requires {mode.value} mode, config is {config.mode.value}"
        )


# ---------------------------------------------------------------------------
# Term tables. Every term is linear in M: value(M) = (A - s*M) * scale, with
# A an M-independent exact rational. The tables are cached per (N, K, L) so
# parameter sweeps only pay integer arithmetic per evaluated point.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _cen_term_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int, int], ...]:
    """Rows (s, ell, mu, a_num, a_den): term(M) = (a_num/a_den - s*M) / ell."""
    rows = []
    for s in range(1, min(_ceil_div(n, l), k) + 1):
        for ell in range(1, _ceil_div(n, l * s) + 1):
            mu = _mu(n, k, l, s, ell)
            deficit = max(n - l * ell * s, 0)
            uncovered = max(n - k * l * ell, 0)
            a = n - Fraction(mu * deficit, s + mu) - uncovered
            rows.append((s, ell, mu, a.numerator, a.denominator))
    return tuple(rows)


@lru_cache(maxsize=None)
def _d2d_term_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int, int], ...]:
    """Rows (s, ell, mu, a_num, a_den): term(M) = (a_num/a_den - s*M) * K/(ell*(K-s))."""
    rows = []
    for s in range(1, min(_ceil_div(n, l), k - 1) + 1):
        for ell in range(1, _ceil_div(n, l * s) + 1):
            mu = _mu(n, k, l, s, ell)
            deficit = max(n - l * ell * s, 0)
            a = n - Fraction(mu * deficit, s + mu)
            rows.append((s, ell, mu, a.numerator, a.denominator))
    return tuple(rows)


@lru_cache(maxsize=None)
def _cen_cutset_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int, int], ...]:
    if l == 1:
        # Classical form s - s*M/floor(N/s) == (s*floor(N/s) - s*M) / floor(N/s).
        rows = []
        for s in range(1, min(n, k) + 1):
            ell = n // s
            rows.append((s, ell, 0, s * ell, 1))
        return tuple(rows)
    rows = []
    for s in range(1, min(_ceil_div(n, l), k) + 1):
        ell = _ceil_div(n, l * s)
        mu = _mu(n, k, l, s, ell)
        deficit = max(n - l * ell * s, 0)
        uncovered = max(n - k * l * ell, 0)
        a = n - Fraction(mu * deficit, s + mu) - uncovered
        rows.append((s, ell, mu, a.numerator, a.denominator))
    return tuple(rows)


@lru_cache(maxsize=None)
def _d2d_cutset_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int, int], ...]:
    rows = []
    for s in range(1, min(n // l, k - 1) + 1):
        ell = n // (l * s)
        rows.append((s, ell, 0, l * ell * s, 1))
    return tuple(rows)


def _max_term(
    table: tuple[tuple[int, int, int, int, int], ...],
    m: Fraction,
    k: int,
    d2d: bool,
) -> tuple[int, int]:
    """Integer-only maximization of (A - s*M)*scale over a term table.

    Returns (num, den) of the unclamped maximum, or (0, 1) for an empty
    table. Rows are visited in (s, ell) order and only strict improvements
    replace the incumbent, which realizes the smallest-(s, ell) tie-break.
    """
    p, q = m.numerator, m.denominator
    best_num, best_den = 0, 0
    for s, ell, _mu_unused, a_num, a_den in table:
        num = a_num * q - s * p * a_den
        den = a_den * q * ell
        if d2d:
            num *= k
            den *= k - s
        if best_den == 0 or num * best_den > best_num * den:
            best_num, best_den = num, den
    if best_den == 0:
        return (0, 1)
    return (best_num, best_den)


def _bound_result(
    table: tuple[tuple[int, int, int, int, int], ...],
    m: Fraction,
    k: int,
    d2d: bool,
) -> BoundResult:
    terms = []
    best_idx = None
    best_val: Fraction | None = None
    for i, (s, ell, mu, a_num, a_den) in enumerate(table):
        value = (Fraction(a_num, a_den) - s * m) / ell
        if d2d:
            value *= Fraction(k, k - s)
        terms.append(BoundTerm(s=s, ell=ell, mu=mu, value=value))
        if best_val is None or value > best_val:
            best_val, best_idx = value, i
    if best_idx is None:
        return BoundResult(
            value=Fraction(0), best_s=None, best_ell=None, mu_at_best=None, terms=()
        )
    best = terms[best_idx]
    return BoundResult(
        value=max(best_val, Fraction(0)),
        best_s=best.s,
        best_ell=best.ell,
        mu_at_best=best.mu,
        terms=tuple(terms),
    )


# ---------------------------------------------------------------------------
# Public bound operations.
# ---------------------------------------------------------------------------


def lb_term_centralized(config: SystemConfig, s: int, ell: int) -> Fraction:
    """One (s, ell) term of the centralized lower bound; may be negative."""
    _require_mode(config, DeliveryMode.CENTRALIZED)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    if not 1 <= s <= min(_ceil_div(n, l), k):
        raise DomainError(
            f"s must lie in [1:min(ceil(N/L), K)] = [1:{min(_ceil_div(n, l), k)}]; got {s}"
        )
    if not 1 <= ell <= _ceil_div(n, l * s):
        raise DomainError(
            f"ell must lie in [1:ceil(N/(L*s))] = [1:{_ceil_div(n, l * s)}]; got {ell}"
        )
    mu = _mu(n, k, l, s, ell)
    deficit = max(n - l * ell * s, 0)
    uncovered = max(n - k * l * ell, 0)
    return (n - s * config.cache_size - Fraction(mu * deficit, s + mu) - uncovered) / ell


def lb_term_d2d(config: SystemConfig, s: int, ell: int) -> Fraction:
    """One (s, ell) term of the D2D lower bound; s = K is outside the domain."""
    _require_mode(config, DeliveryMode.D2D)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    if not 1 <= s <= min(_ceil_div(n, l), k - 1):
        raise DomainError(
            f"s must lie in [1:min(ceil(N/L), K-1)] = [1:{min(_ceil_div(n, l), k - 1)}] "
            f"(s = K only restates the K*M >= N storage constraint); got {s}"
        )
    if not 1 <= ell <= _ceil_div(n, l * s):
        raise DomainError(
            f"ell must lie in [1:ceil(N/(L*s))] = [1:{_ceil_div(n, l * s)}]; got {ell}"
        )
    mu = _mu(n, k, l, s, ell)
    deficit = max(n - l * ell * s, 0)
    numerator = n - s * config.cache_size - Fraction(mu * deficit, s + mu)
    return numerator / (ell * Fraction(k - s, k))


def lb_centralized(config: SystemConfig) -> BoundResult:
    """Centralized lower bound, maximized over the full (s, ell) domain."""
    _require_mode(config, DeliveryMode.CENTRALIZED)
    table = _cen_term_table(config.n_files, config.n_users, config.demands_per_user)
    return _bound_result(table, config.cache_size, config.n_users, d2d=False)


def lb_d2d(config: SystemConfig) -> BoundResult:
    """D2D lower bound, maximized over the full (s, ell) domain."""
    _require_mode(config, DeliveryMode.D2D)
    table = _d2d_term_table(config.n_files, config.n_users, config.demands_per_user)
    return _bound_result(table, config.cache_size, config.n_users, d2d=True)


def lb_cutset_centralized(config: SystemConfig) -> BoundResult:
    """Classical cut-set baseline (L = 1) or the maximal-ell restriction (L > 1)."""
    _require_mode(config, DeliveryMode.CENTRALIZED)
    table = _cen_cutset_table(config.n_files, config.n_users, config.demands_per_user)
    return _bound_result(table, config.cache_size, config.n_users, d2d=False)


def lb_cutset_d2d(config: SystemConfig) -> BoundResult:
    """Classical cut-set baseline for D2D delivery (no mu-refinement)."""
    _require_mode(config, DeliveryMode.D2D)
    table = _d2d_cutset_table(config.n_files, config.n_users, config.demands_per_user)
    return _bound_result(table, config.cache_size, config.n_users, d2d=True)


# ---------------------------------------------------------------------------
# Achievable rates.
# ---------------------------------------------------------------------------


def _cen_formula(n: int, k: int, l: int, m: Fraction) -> Fraction:
    if m == n:
        return Fraction(0)
    load = Fraction(k, 1) * m / n
    return k * l * (1 - Fraction(m, n)) * min(Fraction(1, 1) / (1 + load), Fraction(n, k * l))


def _d2d_formula(n: int, l: int, m: Fraction) -> Fraction:
    if m == n:
        return Fraction(0)
    return min(Fraction(l * n, 1) / m * (1 - Fraction(m, n)), Fraction(n))


@lru_cache(maxsize=None)
def corner_points(
    n: int, k: int, l: int, mode: DeliveryMode
) -> tuple[tuple[Fraction, Fraction], ...]:
    """(M, R) at the scheme corner points M = N*t/K; t from 0 (cen) or 1 (D2D)."""
    t_lo = 0 if mode is DeliveryMode.CENTRALIZED else 1
    points = []
    for t in range(t_lo, k + 1):
        m = Fraction(n * t, k)
        if mode is DeliveryMode.CENTRALIZED:
            r = _cen_formula(n, k, l, m)
        else:
            r = _d2d_formula(n, l, m)
        points.append((m, r))
    return tuple(points)


def lower_convex_hull(
    points: tuple[tuple[Fraction, Fraction], ...]
) -> tuple[tuple[Fraction, Fraction], ...]:
    """Lower convex hull of points sorted by x, exact (monotone chain)."""
    hull: list[tuple[Fraction, Fraction]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep the middle point only if it lies strictly below the chord
            if (p[0] - x1) * (y2 - y1) < (x2 - x1) * (p[1] - y1):
                break
            hull.pop()
        hull.append(p)
    return tuple(hull)


def convex_envelope(
    points: "tuple[tuple[Fraction, Fraction], ...] | list[tuple[Fraction, Fraction]]",
    at: Fraction,
) -> Fraction:
    """Exact piecewise-linear value of the lower convex hull of `points` at `at`.

    `points` must be sorted by the memory coordinate and `at` must lie within
    [first, last] memory; otherwise DomainError.
    """
    pts = tuple(points)
    if not pts:
        raise DomainError("convex_envelope needs at least one point")
    if any(pts[i][0] > pts[i + 1][0] for i in range(len(pts) - 1)):
        raise DomainError("envelope points must be sorted by memory")
    if any(pts[i][0] == pts[i + 1][0] for i in range(len(pts) - 1)):
        # collapse duplicate memories, keeping the cheaper rate
        dedup: dict[Fraction, Fraction] = {}
        for x, y in pts:
            dedup[x] = min(dedup.get(x, y), y)
        pts = tuple(sorted(dedup.items()))
    if not pts[0][0] <= at <= pts[-1][0]:
        raise DomainError(
            f"query M={format_rational(at)} outside "
            f"[{format_rational(pts[0][0])}, {format_rational(pts[-1][0])}]"
        )
    hull = lower_convex_hull(pts)
    xs = [p[0] for p in hull]
    i = bisect_right(xs, at)
    if i == 0:
        return hull[0][1]
    if i == len(hull):
        return hull[-1][1]
    (x1, y1), (x2, y2) = hull[i - 1], hull[i]
    return y1 + (y2 - y1) * (at - x1) / (x2 - x1)


@lru_cache(maxsize=None)
def _hull_cache(n: int, k: int, l: int, mode: DeliveryMode):
    return lower_convex_hull(corner_points(n, k, l, mode))


def rate_ach_centralized(
    config: SystemConfig, eval_mode: EvalMode = EvalMode.CORNER_ENVELOPE
) -> Fraction:
    """Centralized achievable rate at the config's M, in the chosen mode."""
    _require_mode(config, DeliveryMode.CENTRALIZED)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    if eval_mode is EvalMode.FORMULA_AT_M:
        return _cen_formula(n, k, l, config.cache_size)
    return convex_envelope(_hull_cache(n, k, l, config.mode), config.cache_size)


def rate_ach_d2d(
    config: SystemConfig, eval_mode: EvalMode = EvalMode.CORNER_ENVELOPE
) -> Fraction:
    """D2D achievable rate at the config's M, in the chosen mode."""
    _require_mode(config, DeliveryMode.D2D)
    n, k, l = config.n_files, config.n_users, config.demands_per_user
    if eval_mode is EvalMode.FORMULA_AT_M:
        return _d2d_formula(n, l, config.cache_size)
    return convex_envelope(_hull_cache(n, k, l, config.mode), config.cache_size)


# ---------------------------------------------------------------------------
# Fast evaluation helpers for sweeps (integer hot path, no Fraction churn).
# ---------------------------------------------------------------------------


def fast_lower_bound(
    n: int, k: int, l: int, mode: DeliveryMode, m: Fraction
) -> Fraction:
    table = (
        _cen_term_table(n, k, l)
        if mode is DeliveryMode.CENTRALIZED
        else _d2d_term_table(n, k, l)
    )
    out = _max_term(table, m, k, d2d=mode is DeliveryMode.D2D)
    num, den = out[0], out[1]
    if num <= 0:
        return Fraction(0)
    return Fraction(num, den)


def fast_cutset(n: int, k: int, l: int, mode: DeliveryMode, m: Fraction) -> Fraction:
    table = (
        _cen_cutset_table(n, k, l)
        if mode is DeliveryMode.CENTRALIZED
        else _d2d_cutset_table(n, k, l)
    )
    out = _max_term(table, m, k, d2d=mode is DeliveryMode.D2D)
    num, den = out[0], out[1]
    if num <= 0:
        return Fraction(0)
    return Fraction(num, den)


def fast_envelope(n: int, k: int, l: int, mode: DeliveryMode, m: Fraction) -> Fraction:
    return convex_envelope(_hull_cache(n, k, l, mode), m)


def fast_formula(n: int, k: int, l: int, mode: DeliveryMode, m: Fraction) -> Fraction:
    if mode is DeliveryMode.CENTRALIZED:
        return _cen_formula(n, k, l, m)
    return _d2d_formula(n, l, m)


def binomial(n: int, k: int) -> int:
    """C(n, k), 0 outside the Pascal triangle."""
    if k < 0 or k > n:
        return 0
    return comb(n, k)
