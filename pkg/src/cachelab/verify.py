"""Named verification checks backing `cachelab verify` and the test suite.

Each check function returns CheckResult items with stable names so CI logs
and the acceptance tests print one line per verified fact. Scales are
parameters: the `--quick` profile keeps everything under half a minute, the
`--full` profile runs the complete grids.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from . import analysis, bounds, schemes
from .core import (
    DeliveryMode,
    SystemConfig,
    format_rational,
    make_config,
    random_demands,
    worst_case_demands,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        suffix = f" ({self.detail})" if self.detail and not self.ok else ""
        return f"{self.name} {status}{suffix}"


def checks_case_studies() -> list[CheckResult]:
    out = []
    for preset in analysis.CASE_STUDY_PRESETS:
        for check in analysis.case_study(preset):
            out.append(
                CheckResult(f"case_study:{preset}:{check.name}", check.ok, check.detail)
            )
    return out


def checks_tight_points(max_nk: int = 12) -> list[CheckResult]:
    """D2D single-demand bound meets the achievable rate at M = N/K."""
    out = []
    config = make_config(3, 3, 1, 1, DeliveryMode.D2D)
    value = bounds.lb_d2d(config).value
    out.append(
        CheckResult(
            "tight_point:d2d_N3K3_M1_equals_2",
            value == 2,
            f"got {format_rational(value)}",
        )
    )
    bad = []
    for n in range(1, max_nk + 1):
        for k in range(1, max_nk + 1):
            m = Fraction(n, k)
            config = make_config(n, k, 1, m, DeliveryMode.D2D)
            lb = bounds.lb_d2d(config).value
            ach = bounds.rate_ach_d2d(config)
            expected = Fraction(min(k - 1, n))
            if not (lb == ach == expected):
                bad.append(
                    f"N={n},K={k}: lb={format_rational(lb)} "
                    f"ach={format_rational(ach)} want={format_rational(expected)}"
                )
    out.append(
        CheckResult(
            f"tight_point:d2d_minimum_storage_grid_NK{max_nk}",
            not bad,
            "; ".join(bad[:3]),
        )
    )
    return out


def checks_simulator(
    max_n: int = 6,
    max_k: int = 6,
    max_l: int = 3,
    demand_matrices: int = 100,
    seed: int = 0,
) -> list[CheckResult]:
    """Measured rate equals the closed form at every corner; decode is exact.

    Demand-independent broadcast deliveries produce the identical log for
    every demand matrix, so their per-user reconstructions are computed once
    and demand coverage is then verified per matrix.
    """
    out = []
    rate_bad: list[str] = []
    decode_bad: list[str] = []
    demand_dep_bad: list[str] = []
    sims = 0
    for mode in (DeliveryMode.CENTRALIZED, DeliveryMode.D2D):
        for n in range(1, max_n + 1):
            for k in range(1, max_k + 1):
                for l in range(1, min(max_l, n) + 1):
                    t_lo = 0 if mode is DeliveryMode.CENTRALIZED else 1
                    for t in range(t_lo, k + 1):
                        m = Fraction(n * t, k)
                        config = make_config(n, k, l, m, mode)
                        sims += _run_corner(
                            config,
                            t,
                            demand_matrices,
                            seed,
                            rate_bad,
                            decode_bad,
                            demand_dep_bad,
                        )
    out.append(
        CheckResult(
            f"simulator:rate_equals_formula_N{max_n}K{max_k}L{max_l}",
            not rate_bad,
            "; ".join(rate_bad[:3]),
        )
    )
    out.append(
        CheckResult(
            f"simulator:decode_bit_exact_{demand_matrices}_matrices",
            not decode_bad,
            "; ".join(decode_bad[:3]),
        )
    )
    out.append(
        CheckResult(
            "simulator:rate_demand_independent",
            not demand_dep_bad,
            "; ".join(demand_dep_bad[:3]),
        )
    )
    return out


def _run_corner(
    config: SystemConfig,
    t: int,
    demand_matrices: int,
    seed: int,
    rate_bad: list[str],
    decode_bad: list[str],
    demand_dep_bad: list[str],
) -> int:
    from .core import Library

    n, k, l = config.n_files, config.n_users, config.demands_per_user
    mode = config.mode
    b = schemes.default_file_bits(k, t)
    library = Library.generate(n, b, seed)
    config = make_config(n, k, l, config.cache_size, mode, file_bits=b)
    if mode is DeliveryMode.CENTRALIZED:
        caches = schemes.place_centralized(config, t, library)
        deliver = lambda d: schemes.deliver_centralized(config, t, caches, d, library)
        formula = bounds.fast_formula(n, k, l, mode, config.cache_size)
    else:
        caches = schemes.place_d2d(config, t, library)
        deliver = lambda d: schemes.deliver_d2d(config, t, caches, d)
        formula = bounds.fast_formula(n, k, l, mode, config.cache_size)
    label = f"{mode.value} N={n} K={k} L={l} t={t}"
    matrices = [worst_case_demands(config)] + [
        random_demands(config, seed + i) for i in range(demand_matrices)
    ]
    broadcast_decoded: dict[int, dict] = {}
    seen_rates = set()
    sims = 0
    for demands in matrices:
        log = deliver(demands)
        measured = Fraction(log.total_bits, b)
        seen_rates.add(measured)
        if measured != formula:
            rate_bad.append(
                f"{label}: measured {format_rational(measured)} "
                f"!= formula {format_rational(formula)}"
            )
            return sims
        if log.strategy == "broadcast":
            # identical log for every matrix: reconstruct whole library once
            for user in range(1, k + 1):
                if user not in broadcast_decoded:
                    broadcast_decoded[user] = _recover_all(config, user, caches, log)
                got = tuple(
                    broadcast_decoded[user].get(d) for d in demands.rows[user - 1]
                )
                expect = tuple(library.files[d - 1] for d in demands.rows[user - 1])
                if got != expect:
                    decode_bad.append(f"{label}: user {user} broadcast decode mismatch")
                    return sims
        else:
            for user in range(1, k + 1):
                got = schemes.decode(
                    config, user, caches.per_user[user - 1], log, demands
                )
                expect = tuple(library.files[d - 1] for d in demands.rows[user - 1])
                if got != expect:
                    decode_bad.append(f"{label}: user {user} decode mismatch")
                    return sims
        sims += 1
    if len(seen_rates) > 1:
        demand_dep_bad.append(f"{label}: rates {sorted(seen_rates)}")
    return sims


def _recover_all(config, user, caches, log):
    """Decode every library file for `user` from a demand-independent log."""
    n, k = config.n_files, config.n_users
    full_config = make_config(
        n, k, n, config.cache_size, config.mode, file_bits=config.file_bits
    )
    everything = tuple(range(1, n + 1))
    from .core import DemandMatrix

    full = DemandMatrix(rows=tuple(everything for _ in range(k)))
    got = schemes.decode(full_config, user, caches.per_user[user - 1], log, full)
    return dict(zip(everything, got))


def checks_dominance_sandwich(
    max_nk: int = 12,
    density: int = 20,
    witness_nk: tuple[int, int] = (5, 5),
) -> list[CheckResult]:
    """lb >= cut-set and lb <= envelope on the grid; strict witnesses at N=K=5."""
    out = []
    dominance_bad: list[str] = []
    sandwich_bad: list[str] = []
    monotonic_bad: list[str] = []
    for mode in (DeliveryMode.CENTRALIZED, DeliveryMode.D2D):
        for n in range(1, max_nk + 1):
            for k in range(1, max_nk + 1):
                for l in analysis._l_values(n, (1, 2, 3, "N")):
                    prev_lb = prev_cut = prev_env = None
                    for m in analysis.memory_grid(n, k, l, mode, density):
                        lb = bounds.fast_lower_bound(n, k, l, mode, m)
                        cut = bounds.fast_cutset(n, k, l, mode, m)
                        env = bounds.fast_envelope(n, k, l, mode, m)
                        label = f"{mode.value} N={n} K={k} L={l} M={format_rational(m)}"
                        if lb < cut:
                            dominance_bad.append(label)
                        if lb > env:
                            sandwich_bad.append(label)
                        if prev_lb is not None and (
                            lb > prev_lb or cut > prev_cut or env > prev_env
                        ):
                            monotonic_bad.append(label)
                        prev_lb, prev_cut, prev_env = lb, cut, env
    out.append(
        CheckResult(
            f"bounds:dominance_lb_ge_cutset_NK{max_nk}",
            not dominance_bad,
            "; ".join(dominance_bad[:3]),
        )
    )
    out.append(
        CheckResult(
            f"bounds:sandwich_lb_le_achievable_NK{max_nk}",
            not sandwich_bad,
            "; ".join(sandwich_bad[:3]),
        )
    )
    out.append(
        CheckResult(
            f"bounds:monotone_nonincreasing_in_M_NK{max_nk}",
            not monotonic_bad,
            "; ".join(monotonic_bad[:3]),
        )
    )
    wn, wk = witness_nk
    for mode in (DeliveryMode.CENTRALIZED, DeliveryMode.D2D):
        for l in (1, 2):
            strict = False
            for m in analysis.memory_grid(wn, wk, l, mode, density):
                if bounds.fast_lower_bound(wn, wk, l, mode, m) > bounds.fast_cutset(
                    wn, wk, l, mode, m
                ):
                    strict = True
                    break
            out.append(
                CheckResult(
                    f"bounds:strict_improvement_{mode.value}_N{wn}K{wk}_L{l}",
                    strict,
                    "no M with lb_new > lb_cutset",
                )
            )
    return out


def checks_gap_theorems(max_nk: int = 20, density: int = 20) -> list[CheckResult]:
    """Constant-gap thresholds hold exactly over the desk-scale grid."""
    out = []
    nk = range(1, max_nk + 1)
    cen = analysis.sweep(nk, nk, (1, 2, 3, "N"), DeliveryMode.CENTRALIZED, density)
    d2d = analysis.sweep(nk, nk, (1, 2, 3, "N"), DeliveryMode.D2D, density)
    cen_checks = cen.summary["theorem_checks"]
    d2d_checks = d2d.summary["theorem_checks"]
    out.append(
        CheckResult(
            f"gap:centralized_single_le_8_NK{max_nk}",
            cen_checks.get("cen_single_le_8") == "pass",
            f"worst {cen.summary['worst_by_family'].get('cen_single')}",
        )
    )
    out.append(
        CheckResult(
            f"gap:centralized_multi_le_11_NK{max_nk}",
            cen_checks.get("cen_multi_le_11") == "pass",
            f"worst {cen.summary['worst_by_family'].get('cen_multi')}",
        )
    )
    out.append(
        CheckResult(
            f"gap:d2d_le_10_NK{max_nk}",
            d2d_checks.get("d2d_multi_le_10") == "pass",
            f"worst {d2d.summary['worst_by_family'].get('d2d_multi')}",
        )
    )
    out.append(
        CheckResult(
            f"gap:d2d_single_interval_schedule_NK{max_nk}",
            d2d_checks.get("d2d_single_intervals") == "pass",
            str(d2d.summary["d2d_single_worst_by_interval"]),
        )
    )
    out.append(
        CheckResult(
            "gap:observed_maxima",
            True,
            f"cen={cen.summary['max_gap']} d2d={d2d.summary['max_gap']}",
        )
    )
    return out


def checks_curves() -> list[CheckResult]:
    """Figure-data reproduction for N=K=5: separations, tightness, determinism."""
    out = []
    for mode in (DeliveryMode.CENTRALIZED, DeliveryMode.D2D):
        for l in (1, 2):
            rows = analysis.curve(5, 5, l, mode, points=26)
            csv1 = analysis.curve_csv(rows)
            csv2 = analysis.curve_csv(analysis.curve(5, 5, l, mode, points=26))
            strict = any(r.lb_new > r.lb_cutset for r in rows)
            out.append(
                CheckResult(
                    f"curve:{mode.value}_N5K5_L{l}_strict_separation",
                    strict,
                    "lb_new never exceeds lb_cutset",
                )
            )
            out.append(
                CheckResult(
                    f"curve:{mode.value}_N5K5_L{l}_reproducible",
                    csv1 == csv2,
                    "outputs differ between runs",
                )
            )
            if mode is DeliveryMode.D2D:
                m_min = Fraction(5, 5)
                row = next(r for r in rows if r.memory == m_min)
                out.append(
                    CheckResult(
                        f"curve:d2d_N5K5_L{l}_tight_at_minimum_storage",
                        row.lb_new == row.rate_envelope,
                        f"lb={format_rational(row.lb_new)} "
                        f"ach={format_rational(row.rate_envelope)}",
                    )
                )
    return out


def run_profile(profile: str) -> list[CheckResult]:
    """Run the named check profile; `quick` stays well under 30 seconds."""
    results: list[CheckResult] = []
    results += checks_case_studies()
    if profile == "quick":
        results += checks_tight_points(max_nk=8)
        results += checks_simulator(max_n=4, max_k=4, max_l=2, demand_matrices=5)
        results += checks_dominance_sandwich(max_nk=6, density=8)
        results += checks_gap_theorems(max_nk=8, density=8)
        results += checks_curves()
    else:
        results += checks_tight_points(max_nk=12)
        results += checks_simulator(max_n=6, max_k=6, max_l=3, demand_matrices=100)
        results += checks_dominance_sandwich(max_nk=12, density=20)
        results += checks_gap_theorems(max_nk=20, density=20)
        results += checks_curves()
    return results
