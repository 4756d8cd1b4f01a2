"""Gap computation, grid sweeps, regime classification, and curve data.

The multiplicative gap of a configuration is the exact ratio of the
achievable rate to the lower bound. Headline gaps use the corner-envelope
achievable rate (what memory sharing actually attains); the closed-form rate
at arbitrary M is carried alongside for comparison. When both sides are zero
(M = N, or the degenerate single-corner D2D instances) the gap is defined as
1; a positive achievable rate over a zero lower bound is flagged degenerate
and excluded from maxima.

Sweeps evaluate a product grid of (N, K, L, M) per mode and report the
maximum observed gap together with pass/fail checks of the constant-gap
thresholds: 8 for centralized single-demand, 11 for centralized multi-demand,
10 for D2D, and the per-interval {1, 3, 6, 8} schedule for D2D single-demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool
from typing import Iterable, Sequence

from .core import (
    DeliveryMode,
    DomainError,
    SystemConfig,
    format_rational,
    make_config,
)
from . import bounds
from .bounds import EvalMode


# Constants used by the constant-gap proofs; the *_BOUNDARY_* entries define
# the storage regimes the classifier reports, the *_PARAM_* entries are the
# (s, ell) proof choices kept here so every magic number lives in one table.
GAP_CONSTANTS: dict[str, Fraction] = {
    "CEN_MULTI_BOUNDARY_FACTOR": Fraction(51, 40),  # 1.275 * max(L, N/K)
    "CEN_MULTI_BOUNDARY_FRACTION": Fraction(1, 5),  # 0.2 * N
    "CEN_MULTI_PARAM_S_FRACTION": Fraction(3049, 10000),
    "CEN_MULTI_PARAM_S_FRACTION_2": Fraction(221, 500),
    "CEN_MULTI_PARAM_BETA_1": Fraction(9649, 10000),
    "CEN_MULTI_PARAM_BETA_2": Fraction(123, 125),
    "CEN_SINGLE_BOUNDARY_FACTOR": Fraction(101, 100),  # 1.01 * max(1, N/K)
    "CEN_SINGLE_BOUNDARY_FRACTION": Fraction(1, 8),  # 0.1250 * N
    "CEN_SINGLE_PARAM_S_FRACTION": Fraction(4701, 10000),
    "CEN_SINGLE_PARAM_BETA_1": Fraction(93, 100),
    "CEN_SINGLE_PARAM_S_FRACTION_2": Fraction(4983, 10000),
    "CEN_SINGLE_PARAM_BETA_2": Fraction(991, 1000),
    "D2D_SINGLE_EDGE_LOW": Fraction(2, 3),
    "D2D_SINGLE_EDGE_MID": Fraction(1),
    "D2D_MULTI_DEMAND_SPLIT": Fraction(1, 2),  # low demand iff L <= N/2
    "D2D_MULTI_LOW_BOUNDARY_FRACTION": Fraction(1, 5),  # 0.2 * N
    "D2D_MULTI_HIGH_BOUNDARY_FRACTION": Fraction(1, 3),  # N/3
    "D2D_MULTI_PARAM_S_FRACTION": Fraction(51, 100),
    "D2D_MULTI_PARAM_BETA": Fraction(123, 125),
}

GAP_THRESHOLDS = {
    "cen_single": Fraction(8),
    "cen_multi": Fraction(11),
    "d2d_multi": Fraction(10),
    # d2d_single uses the per-interval schedule below
}

D2D_SINGLE_SCHEDULE = (
    ("minimum_storage", Fraction(1)),
    ("below_two_thirds", Fraction(3)),
    ("below_one", Fraction(6)),
    ("above_one", Fraction(8)),
)


@dataclass(frozen=True)
class RegimeLabel:
    name: str
    family: str
    lower: Fraction
    upper: Fraction
    gap_bound: Fraction
    note: str = ""


@dataclass(frozen=True)
class GapRecord:
    n_files: int
    n_users: int
    demands_per_user: int
    mode: DeliveryMode
    memory: Fraction
    ach_envelope: Fraction
    ach_formula: Fraction
    lower_bound: Fraction
    cutset: Fraction
    gap: Fraction | None
    gap_formula: Fraction | None
    regime: str
    degenerate: bool

    def to_json_dict(self) -> dict:
        return {
            "N": self.n_files,
            "K": self.n_users,
            "L": self.demands_per_user,
            "mode": self.mode.value,
            "M": format_rational(self.memory),
            "ach_envelope": format_rational(self.ach_envelope),
            "ach_formula": format_rational(self.ach_formula),
            "lower_bound": format_rational(self.lower_bound),
            "cutset": format_rational(self.cutset),
            "gap": format_rational(self.gap) if self.gap is not None else None,
            "gap_formula": (
                format_rational(self.gap_formula) if self.gap_formula is not None else None
            ),
            "regime": self.regime,
            "degenerate": self.degenerate,
        }


def _family(mode: DeliveryMode, l: int) -> str:
    if mode is DeliveryMode.CENTRALIZED:
        return "cen_single" if l == 1 else "cen_multi"
    return "d2d_single" if l == 1 else "d2d_multi"


def regime_classify(config: SystemConfig) -> RegimeLabel:
    """Storage regime of the config under its mode/L gap analysis.

    Boundary values resolve to the lower-indexed regime. D2D single-demand
    interval edges (2/3 and 1) are absolute file counts, so for N >= K the
    two middle intervals are empty and the terminal bound applies from
    max(N/K, 1); the label note records that interpretation.
    """
    n, k, l, m = config.n_files, config.n_users, config.demands_per_user, config.cache_size
    fam = _family(config.mode, l)
    if fam == "cen_single":
        b1 = GAP_CONSTANTS["CEN_SINGLE_BOUNDARY_FACTOR"] * max(Fraction(1), Fraction(n, k))
        b2 = GAP_CONSTANTS["CEN_SINGLE_BOUNDARY_FRACTION"] * n
        if m <= b1:
            return RegimeLabel("regime1", fam, Fraction(0), b1, GAP_THRESHOLDS[fam])
        if m <= b2:
            return RegimeLabel("regime2", fam, b1, b2, GAP_THRESHOLDS[fam])
        return RegimeLabel("regime3", fam, b2, Fraction(n), GAP_THRESHOLDS[fam])
    if fam == "cen_multi":
        b1 = GAP_CONSTANTS["CEN_MULTI_BOUNDARY_FACTOR"] * max(Fraction(l), Fraction(n, k))
        b2 = GAP_CONSTANTS["CEN_MULTI_BOUNDARY_FRACTION"] * n
        if m <= b1:
            return RegimeLabel("regime1", fam, Fraction(0), b1, GAP_THRESHOLDS[fam])
        if m <= b2:
            return RegimeLabel("regime2", fam, b1, b2, GAP_THRESHOLDS[fam])
        return RegimeLabel("regime3", fam, b2, Fraction(n), GAP_THRESHOLDS[fam])
    if fam == "d2d_single":
        m_min = Fraction(n, k)
        note = (
            "interval edges 2/3 and 1 are absolute file counts; empty for N >= K"
            if n >= k
            else ""
        )
        if m == m_min:
            return RegimeLabel(
                "minimum_storage", fam, m_min, m_min, Fraction(1), note
            )
        if m <= GAP_CONSTANTS["D2D_SINGLE_EDGE_LOW"]:
            return RegimeLabel(
                "below_two_thirds",
                fam,
                m_min,
                GAP_CONSTANTS["D2D_SINGLE_EDGE_LOW"],
                Fraction(3),
                note,
            )
        if m <= GAP_CONSTANTS["D2D_SINGLE_EDGE_MID"]:
            return RegimeLabel(
                "below_one",
                fam,
                GAP_CONSTANTS["D2D_SINGLE_EDGE_LOW"],
                GAP_CONSTANTS["D2D_SINGLE_EDGE_MID"],
                Fraction(6),
                note,
            )
        return RegimeLabel(
            "above_one", fam, max(m_min, Fraction(1)), Fraction(n), Fraction(8), note
        )
    # d2d_multi: case split on demand size, then storage regimes
    m_min = Fraction(n, k)
    if Fraction(l) <= GAP_CONSTANTS["D2D_MULTI_DEMAND_SPLIT"] * n:
        b1 = Fraction(l)
        b2 = GAP_CONSTANTS["D2D_MULTI_LOW_BOUNDARY_FRACTION"] * n
        if m <= b1:
            return RegimeLabel("low_demand_regime1", fam, m_min, b1, GAP_THRESHOLDS[fam])
        if m <= b2:
            return RegimeLabel("low_demand_regime2", fam, b1, b2, GAP_THRESHOLDS[fam])
        return RegimeLabel("low_demand_regime3", fam, b2, Fraction(n), GAP_THRESHOLDS[fam])
    b1 = GAP_CONSTANTS["D2D_MULTI_HIGH_BOUNDARY_FRACTION"] * n
    if m <= b1:
        return RegimeLabel("high_demand_regime1", fam, m_min, b1, GAP_THRESHOLDS[fam])
    return RegimeLabel("high_demand_regime2", fam, b1, Fraction(n), GAP_THRESHOLDS[fam])


def gap_at(config: SystemConfig) -> GapRecord:
    """Exact achievable/lower-bound ratio with regime label for one config."""
    n, k, l, m = config.n_files, config.n_users, config.demands_per_user, config.cache_size
    mode = config.mode
    lb = bounds.fast_lower_bound(n, k, l, mode, m)
    cut = bounds.fast_cutset(n, k, l, mode, m)
    env = bounds.fast_envelope(n, k, l, mode, m)
    formula = bounds.fast_formula(n, k, l, mode, m)
    degenerate = lb == 0 and env > 0
    gap: Fraction | None
    if degenerate:
        gap = None
    elif lb == 0:
        gap = Fraction(1)
    else:
        gap = env / lb
    gap_formula: Fraction | None
    if lb == 0:
        gap_formula = None if formula > 0 else Fraction(1)
    else:
        gap_formula = formula / lb
    return GapRecord(
        n_files=n,
        n_users=k,
        demands_per_user=l,
        mode=mode,
        memory=m,
        ach_envelope=env,
        ach_formula=formula,
        lower_bound=lb,
        cutset=cut,
        gap=gap,
        gap_formula=gap_formula,
        regime=regime_classify(config).name,
        degenerate=degenerate,
    )


def memory_grid(
    n: int, k: int, l: int, mode: DeliveryMode, density: int = 20
) -> tuple[Fraction, ...]:
    """Corner points, regime boundaries, and a uniform refinement of M.

    `density` is the number of uniform subdivisions of M/N across [0, 1].
    """
    m_min = Fraction(0) if mode is DeliveryMode.CENTRALIZED else Fraction(n, k)
    points = {Fraction(n)}
    t_lo = 0 if mode is DeliveryMode.CENTRALIZED else 1
    for t in range(t_lo, k + 1):
        points.add(Fraction(n * t, k))
    for i in range(density + 1):
        points.add(Fraction(n * i, density))
    fam = _family(mode, l)
    if fam == "cen_single":
        points.add(GAP_CONSTANTS["CEN_SINGLE_BOUNDARY_FACTOR"] * max(Fraction(1), Fraction(n, k)))
        points.add(GAP_CONSTANTS["CEN_SINGLE_BOUNDARY_FRACTION"] * n)
    elif fam == "cen_multi":
        points.add(GAP_CONSTANTS["CEN_MULTI_BOUNDARY_FACTOR"] * max(Fraction(l), Fraction(n, k)))
        points.add(GAP_CONSTANTS["CEN_MULTI_BOUNDARY_FRACTION"] * n)
    elif fam == "d2d_single":
        points.add(GAP_CONSTANTS["D2D_SINGLE_EDGE_LOW"])
        points.add(GAP_CONSTANTS["D2D_SINGLE_EDGE_MID"])
    else:
        points.add(Fraction(l))
        points.add(GAP_CONSTANTS["D2D_MULTI_LOW_BOUNDARY_FRACTION"] * n)
        points.add(GAP_CONSTANTS["D2D_MULTI_HIGH_BOUNDARY_FRACTION"] * n)
    return tuple(sorted(p for p in points if m_min <= p <= n))


def _l_values(n: int, l_set: Sequence[object]) -> tuple[int, ...]:
    out = set()
    for item in l_set:
        value = n if item in ("N", "n") else int(item)  # "N" means L = N
        if 1 <= value <= n:
            out.add(value)
    return tuple(sorted(out))


def _sweep_family(args) -> list[GapRecord]:
    n, k, l, mode_value, density = args
    mode = DeliveryMode(mode_value)
    records = []
    for m in memory_grid(n, k, l, mode, density):
        config = make_config(n, k, l, m, mode)
        records.append(gap_at(config))
    return records


@dataclass(frozen=True)
class SweepResult:
    records: tuple[GapRecord, ...]
    summary: dict

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2)


def sweep(
    n_range: Iterable[int],
    k_range: Iterable[int],
    l_set: Sequence[object],
    mode: DeliveryMode,
    density: int = 20,
    jobs: int = 1,
) -> SweepResult:
    """Gap records over the product grid plus a threshold-check summary.

    Violations of the gap thresholds are reported in the summary, never
    raised. Records are merged in deterministic (N, K, L, M) order whatever
    the worker count.
    """
    tasks = []
    for n in sorted(set(n_range)):
        for k in sorted(set(k_range)):
            for l in _l_values(n, l_set):
                tasks.append((n, k, l, mode.value, density))
    if jobs > 1:
        with Pool(jobs) as pool:
            chunks = pool.map(_sweep_family, tasks)
    else:
        chunks = [_sweep_family(t) for t in tasks]
    records: list[GapRecord] = [r for chunk in chunks for r in chunk]
    records.sort(
        key=lambda r: (r.n_files, r.n_users, r.demands_per_user, r.memory)
    )
    summary = summarize(records)
    return SweepResult(records=tuple(records), summary=summary)


def summarize(records: Sequence[GapRecord]) -> dict:
    """Max gap, its argmax config, and the per-theorem threshold checks."""
    max_gap = Fraction(1)
    argmax = None
    max_formula_gap: Fraction | None = None
    degenerate_count = 0
    formula_below_lb = 0
    checks: dict[str, str] = {}
    worst_by_family: dict[str, Fraction] = {}
    d2d_single_ok = True
    d2d_single_worst: dict[str, Fraction] = {}
    for r in records:
        if r.degenerate:
            degenerate_count += 1
            continue
        if r.gap is not None and r.gap > max_gap:
            max_gap = r.gap
            argmax = r
        if r.gap_formula is not None:
            if r.gap_formula < 1:
                formula_below_lb += 1
            if max_formula_gap is None or r.gap_formula > max_formula_gap:
                max_formula_gap = r.gap_formula
        fam = _family(r.mode, r.demands_per_user)
        if r.gap is not None:
            worst_by_family[fam] = max(worst_by_family.get(fam, Fraction(1)), r.gap)
            if fam in ("d2d_single", "d2d_multi"):
                worst_by_family["d2d_multi"] = max(
                    worst_by_family.get("d2d_multi", Fraction(1)), r.gap
                )
            if (
                r.mode is DeliveryMode.CENTRALIZED
            ):  # centralized multi-demand threshold covers L = 1 too
                worst_by_family["cen_multi"] = max(
                    worst_by_family.get("cen_multi", Fraction(1)), r.gap
                )
        if fam == "d2d_single" and r.gap is not None:
            bound = dict(D2D_SINGLE_SCHEDULE)[r.regime]
            d2d_single_worst[r.regime] = max(
                d2d_single_worst.get(r.regime, Fraction(1)), r.gap
            )
            if r.gap > bound:
                d2d_single_ok = False
    for fam, threshold in GAP_THRESHOLDS.items():
        if fam in worst_by_family:
            checks[f"{fam}_le_{threshold}"] = (
                "pass" if worst_by_family[fam] <= threshold else "fail"
            )
    if d2d_single_worst:
        checks["d2d_single_intervals"] = "pass" if d2d_single_ok else "fail"
    summary = {
        "max_gap": format_rational(max_gap),
        "argmax": (
            {
                "N": argmax.n_files,
                "K": argmax.n_users,
                "L": argmax.demands_per_user,
                "M": format_rational(argmax.memory),
                "mode": argmax.mode.value,
            }
            if argmax is not None
            else None
        ),
        "max_gap_formula_mode": (
            format_rational(max_formula_gap) if max_formula_gap is not None else None
        ),
        "theorem_checks": checks,
        "worst_by_family": {
            fam: format_rational(v) for fam, v in sorted(worst_by_family.items())
        },
        "d2d_single_worst_by_interval": {
            name: format_rational(v) for name, v in sorted(d2d_single_worst.items())
        },
        "degenerate_records": degenerate_count,
        "formula_mode_below_lower_bound": formula_below_lb,
        "records": len(records),
    }
    return summary


# ---------------------------------------------------------------------------
# Curve data (plot-ready CSV)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveRow:
    memory: Fraction
    lb_new: Fraction
    lb_cutset: Fraction
    rate_envelope: Fraction
    rate_formula: Fraction


def curve(
    n: int, k: int, l: int, mode: DeliveryMode, points: int = 21
) -> tuple[CurveRow, ...]:
    """All four bound columns on a uniform M grid augmented with corners."""
    if points < 2:
        raise DomainError("curve needs at least 2 points")
    m_min = Fraction(0) if mode is DeliveryMode.CENTRALIZED else Fraction(n, k)
    grid = {Fraction(n), m_min}
    for i in range(points):
        grid.add(m_min + (Fraction(n) - m_min) * i / (points - 1))
    t_lo = 0 if mode is DeliveryMode.CENTRALIZED else 1
    for t in range(t_lo, k + 1):
        grid.add(Fraction(n * t, k))
    rows = []
    for m in sorted(grid):
        rows.append(
            CurveRow(
                memory=m,
                lb_new=bounds.fast_lower_bound(n, k, l, mode, m),
                lb_cutset=bounds.fast_cutset(n, k, l, mode, m),
                rate_envelope=bounds.fast_envelope(n, k, l, mode, m),
                rate_formula=bounds.fast_formula(n, k, l, mode, m),
            )
        )
    return tuple(rows)


def curve_csv(rows: Sequence[CurveRow]) -> str:
    """Exact fraction columns plus float twins for plotting."""
    header = (
        "M,lb_new,lb_cutset,rate_envelope,rate_formula,"
        "M_float,lb_new_float,lb_cutset_float,rate_envelope_float,rate_formula_float"
    )
    lines = [header]
    for r in rows:
        exact = [r.memory, r.lb_new, r.lb_cutset, r.rate_envelope, r.rate_formula]
        lines.append(
            ",".join(format_rational(v) for v in exact)
            + ","
            + ",".join(repr(float(v)) for v in exact)
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Case studies: exact reproduction of the worked small-instance inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    ok: bool
    detail: str = ""


def _sample_memories(n: int, k: int, mode: DeliveryMode, count: int = 10) -> list[Fraction]:
    lo = Fraction(0) if mode is DeliveryMode.CENTRALIZED else Fraction(n, k)
    hi = Fraction(n)
    return [lo + (hi - lo) * j / count for j in range(count)]


def _check_term_identity(
    name: str,
    n: int,
    k: int,
    mode: DeliveryMode,
    s: int,
    ell: int,
    closed_form,
) -> IdentityCheck:
    from .bounds import lb_term_centralized, lb_term_d2d

    term = lb_term_centralized if mode is DeliveryMode.CENTRALIZED else lb_term_d2d
    for m in _sample_memories(n, k, mode):
        config = make_config(n, k, 1, m, mode)
        got = term(config, s, ell)
        want = closed_form(m)
        if got != want:
            return IdentityCheck(
                name,
                False,
                f"at M={format_rational(m)}: term={format_rational(got)} "
                f"!= expected {format_rational(want)}",
            )
    return IdentityCheck(name, True)


def case_study(preset: str) -> list[IdentityCheck]:
    """Verify a named small instance's bound lines as exact identities.

    Presets: CEN_N3K3, CEN_N2K2, D2D_N3K3.
    """
    cen, d2d = DeliveryMode.CENTRALIZED, DeliveryMode.D2D
    if preset == "CEN_N3K3":
        checks = [
            _check_term_identity(
                "3R+6M>=8", 3, 3, cen, 2, 1, lambda m: Fraction(8, 3) - 2 * m
            ),
            _check_term_identity(
                "4R+2M>=5", 3, 3, cen, 1, 2, lambda m: (5 - 2 * m) / 4
            ),
            _check_term_identity("R+3M>=3", 3, 3, cen, 3, 1, lambda m: 3 - 3 * m),
            _check_term_identity("3R+M>=3", 3, 3, cen, 1, 3, lambda m: (3 - m) / 3),
        ]
        return checks
    if preset == "CEN_N2K2":
        return [
            _check_term_identity(
                "2R+2M>=3", 2, 2, cen, 1, 1, lambda m: (3 - 2 * m) / 2
            ),
            _check_term_identity("R+2M>=2", 2, 2, cen, 2, 1, lambda m: 2 - 2 * m),
            _check_term_identity("2R+M>=2", 2, 2, cen, 1, 2, lambda m: (2 - m) / 2),
        ]
    if preset == "D2D_N3K3":
        checks = [
            _check_term_identity("R+6M>=8", 3, 3, d2d, 2, 1, lambda m: 8 - 6 * m),
            _check_term_identity(
                "8R+6M>=15", 3, 3, d2d, 1, 2, lambda m: (15 - 6 * m) / 8
            ),
            _check_term_identity("2R+M>=3", 3, 3, d2d, 1, 3, lambda m: (3 - m) / 2),
        ]
        config = make_config(3, 3, 1, 1, d2d)
        value = bounds.lb_d2d(config).value
        checks.append(
            IdentityCheck(
                "lb_d2d(M=1)=2",
                value == 2,
                "" if value == 2 else f"got {format_rational(value)}",
            )
        )
        return checks
    raise DomainError(f"unknown case-study preset {preset!r}")


CASE_STUDY_PRESETS = ("CEN_N3K3", "CEN_N2K2", "D2D_N3K3")
