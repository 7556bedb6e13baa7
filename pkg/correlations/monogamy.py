"""
Integer-power monogamy of the quantum deficit.

For a report (D_AB, D_AC, D_A:BC) the n-th power scan tracks

    delta_n = D_A:BC^n - D_AB^n - D_AC^n

and the minimal monogamous power r is the first n with delta_n >= -tol. The
residual tangle tau_q is delta_r.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
import structlog
from django.core.exceptions import ValidationError

from correlations.deficit import deficit_report
from correlations.exceptions import NumericalError
from correlations.linalg import LogBase
from correlations.states import StateName, StateSpec
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PowerScanRow:
    n: int
    q_pair_n: float
    q_bipart_n: float
    delta_n: float
    # D_AC^n; equals q_pair_n for permutation-symmetric states
    q_ac_n: float | None = None

    def __post_init__(self):
        if self.q_ac_n is None:
            object.__setattr__(self, "q_ac_n", self.q_pair_n)


@dataclass(frozen=True)
class ResidualTangle:
    r: int | None = None
    tau_q: float | None = None

    def __post_init__(self):
        if (self.r is None) != (self.tau_q is None):
            raise ValidationError({"tau_q": "tau_q is present exactly when r is"})
        if self.tau_q is not None and self.tau_q < 0.0:
            raise ValidationError({"tau_q": f"Residual tangle {self.tau_q!r} < 0"})

    @property
    def found(self):
        return self.r is not None


def _check_monotone(report, rows):
    """Once delta_n >= 0 with both pair deficits below D_A:BC, it stays so."""
    if report.d_ab > report.d_a_bc or report.d_ac > report.d_a_bc:
        return
    first = next((row.n for row in rows if row.delta_n >= 0.0), None)
    if first is None:
        return
    broken = [
        row.n
        for row in rows
        if row.n > first and row.delta_n < -settings.MONOGAMY_TOL
    ]
    if broken:
        logger.error("power_scan_not_monotone", first=first, broken=broken)
        raise NumericalError(
            f"Power scan regressed after n={first} at n={broken[0]}", broken=broken
        )


def power_scan(report, n_max=settings.DEFAULT_N_MAX):
    if n_max < 1:
        raise ValidationError({"n_max": f"n_max must be >= 1, got {n_max}"})
    rows = []
    for n in range(1, n_max + 1):
        pair_ab, pair_ac, bipart = report.d_ab**n, report.d_ac**n, report.d_a_bc**n
        rows.append(
            PowerScanRow(
                n=n,
                q_pair_n=pair_ab,
                q_bipart_n=bipart,
                delta_n=bipart - pair_ab - pair_ac,
                q_ac_n=pair_ac,
            )
        )
    _check_monotone(report, rows)
    return rows


def min_monogamy_power(
    report, n_max=settings.DEFAULT_N_MAX, tol=settings.MONOGAMY_TOL
):
    if tol < 0:
        raise ValidationError({"tol": f"Tolerance must be >= 0, got {tol}"})
    for row in power_scan(report, n_max):
        if row.delta_n >= -tol:
            return ResidualTangle(r=row.n, tau_q=max(row.delta_n, 0.0))
    return ResidualTangle()


def monogamy_table(states=(StateName.W, StateName.WWBAR), n_max=5, base=LogBase.NATS):
    """Power-scan rows per named state, in the given state order."""
    table = []
    for name in states:
        spec = StateSpec.named(name)
        report = deficit_report(spec, base)
        table.extend((spec.label, row) for row in power_scan(report, n_max))
    return table


def theta_grid(
    start=settings.THETA_START, stop=settings.THETA_STOP, step=settings.THETA_STEP
):
    """Evenly spaced angles from ``start``; ``stop`` is appended if missed."""
    if step <= 0:
        raise ValidationError({"theta_step": f"Step must be > 0, got {step}"})
    if not 0.0 < start <= stop <= math.pi + 1e-12:
        raise ValidationError(
            {"theta_start": f"Need 0 < start <= stop <= pi, got [{start}, {stop}]"}
        )
    stop = min(stop, math.pi)
    count = math.floor((stop - start) / step + 1e-9)
    grid = [start + k * step for k in range(count + 1)]
    if stop - grid[-1] > 1e-9:
        grid.append(stop)
    return np.asarray(grid)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    n: int
    d_pair_n: float
    d_bipart_n: float
    delta_n: float
    r: int | None


@dataclass(frozen=True, eq=False)
class ThetaSweep:
    thetas: np.ndarray
    powers: tuple[int, ...]
    base: LogBase
    reports: tuple
    # delta[i, j] is delta_{powers[j]} at thetas[i]
    delta: np.ndarray
    min_powers: tuple

    @property
    def max_min_power(self):
        found = [r for r in self.min_powers if r is not None]
        return max(found) if found else None

    def rows(self):
        for theta, report, r in zip(self.thetas, self.reports, self.min_powers):
            for n in self.powers:
                yield SweepRow(
                    theta=float(theta),
                    n=n,
                    d_pair_n=report.d_ab**n,
                    d_bipart_n=report.d_a_bc**n,
                    delta_n=report.d_a_bc**n - report.d_ab**n - report.d_ac**n,
                    r=r,
                )


def _sweep_point(theta, base):
    return deficit_report(StateSpec.from_theta(theta), base)


def theta_sweep(
    grid,
    n_set=settings.FIG1_POWERS,
    base=LogBase.NATS,
    n_max=settings.DEFAULT_N_MAX,
    workers=settings.SWEEP_WORKERS,
):
    thetas = np.asarray(grid, dtype=float)
    if thetas.size == 0:
        raise ValidationError({"theta_grid": "Theta grid must not be empty"})
    powers = tuple(int(n) for n in n_set)
    if not powers or min(powers) < 1:
        raise ValidationError({"n_set": f"Powers must be >= 1, got {powers}"})
    base = LogBase.coerce(base)

    point = partial(_sweep_point, base=base)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = tuple(pool.map(point, thetas.tolist()))
    else:
        reports = tuple(map(point, thetas.tolist()))

    delta = np.array(
        [[r.d_a_bc**n - r.d_ab**n - r.d_ac**n for n in powers] for r in reports]
    )
    min_powers = tuple(min_monogamy_power(r, n_max).r for r in reports)
    logger.info(
        "theta_sweep_finished",
        points=len(reports),
        powers=len(powers),
        base=base.value,
        max_min_power=max((r for r in min_powers if r is not None), default=None),
    )
    return ThetaSweep(
        thetas=thetas,
        powers=powers,
        base=base,
        reports=reports,
        delta=delta,
        min_powers=min_powers,
    )
