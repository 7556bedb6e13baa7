import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from correlations.deficit import DeficitReport
from correlations.monogamy import (
    PowerScanRow,
    ResidualTangle,
    min_monogamy_power,
    monogamy_table,
    power_scan,
    theta_grid,
    theta_sweep,
)

# reference delta column per power 1..5, rounded to 3 decimals
W_DELTAS = (-0.288, -0.022, 0.060, 0.072, 0.062)
WWBAR_DELTAS = (-0.322, -0.095, -0.023, -0.003, 0.0013)


@pytest.fixture(scope="module")
def default_sweep():
    return theta_sweep(theta_grid(), n_set=(1, 2, 3))


def test_power_scan_rows(w_report):
    rows = power_scan(w_report, n_max=5)
    assert [row.n for row in rows] == [1, 2, 3, 4, 5]
    for row in rows:
        assert row.q_pair_n == pytest.approx(w_report.d_ab**row.n)
        assert row.q_bipart_n == pytest.approx(w_report.d_a_bc**row.n)
        assert row.delta_n == pytest.approx(row.q_bipart_n - 2.0 * row.q_pair_n)


def test_power_scan_rejects_bad_n_max(w_report):
    with pytest.raises(ValidationError):
        power_scan(w_report, n_max=0)


def test_monogamy_table_reproduces_printed_values():
    table = monogamy_table()
    assert len(table) == 10
    w_rows = [row for label, row in table if label == "W"]
    wwbar_rows = [row for label, row in table if label == "WWBAR"]
    assert [row.delta_n for row in w_rows] == pytest.approx(W_DELTAS, abs=2e-3)
    assert [row.delta_n for row in wwbar_rows] == pytest.approx(WWBAR_DELTAS, abs=2e-3)
    assert w_rows[2].q_pair_n == pytest.approx(0.098, abs=2e-3)
    assert w_rows[2].q_bipart_n == pytest.approx(0.257, abs=2e-3)
    assert wwbar_rows[4].q_pair_n == pytest.approx(0.008, abs=2e-3)
    assert wwbar_rows[4].q_bipart_n == pytest.approx(0.018, abs=2e-3)


def test_wwbar_fourth_power_is_still_violated(wwbar_report):
    fourth = power_scan(wwbar_report, n_max=4)[-1]
    assert fourth.delta_n < 0.0
    assert fourth.delta_n == pytest.approx(-0.0034, abs=1e-4)


def test_min_power_w(w_report):
    tangle = min_monogamy_power(w_report)
    assert tangle.r == 3
    assert tangle.tau_q == pytest.approx(0.060, abs=2e-3)


def test_min_power_wwbar(wwbar_report):
    tangle = min_monogamy_power(wwbar_report)
    assert tangle.r == 5
    assert tangle.tau_q == pytest.approx(0.0013, abs=5e-4)


def test_min_power_ghz_is_one(ghz_report):
    tangle = min_monogamy_power(ghz_report)
    assert tangle.r == 1
    assert tangle.tau_q == pytest.approx(math.log(2.0))


def test_min_power_not_found_within_n_max(wwbar_report):
    tangle = min_monogamy_power(wwbar_report, n_max=4)
    assert not tangle.found
    assert tangle.tau_q is None


def test_min_power_for_zero_report():
    tangle = min_monogamy_power(DeficitReport(d_ab=0.0, d_ac=0.0, d_a_bc=0.0))
    assert tangle == ResidualTangle(r=1, tau_q=0.0)


def test_residual_tangle_validation():
    with pytest.raises(ValidationError):
        ResidualTangle(r=3)
    with pytest.raises(ValidationError):
        ResidualTangle(r=3, tau_q=-0.1)


def test_min_power_rejects_negative_tol(w_report):
    with pytest.raises(ValidationError):
        min_monogamy_power(w_report, tol=-1.0)


def test_scan_row_defaults_ac_to_pair():
    row = PowerScanRow(n=1, q_pair_n=0.4, q_bipart_n=0.6, delta_n=-0.2)
    assert row.q_ac_n == 0.4


def test_theta_grid():
    grid = theta_grid()
    assert grid[0] == pytest.approx(0.02)
    assert grid[-1] == math.pi
    assert np.all(np.diff(grid) > 0.0)
    assert len(theta_grid(0.5, 0.5, 0.1)) == 1
    with pytest.raises(ValidationError):
        theta_grid(0.0, 1.0, 0.1)
    with pytest.raises(ValidationError):
        theta_grid(0.1, 1.0, 0.0)


def test_sweep_endpoint_matches_w(default_sweep, w_report):
    last = default_sweep.reports[-1]
    assert default_sweep.thetas[-1] == math.pi
    assert last.d_ab == pytest.approx(w_report.d_ab, abs=1e-12)
    assert last.d_a_bc == pytest.approx(w_report.d_a_bc, abs=1e-12)
    assert default_sweep.min_powers[-1] == 3
    assert default_sweep.delta[-1, 2] == pytest.approx(0.060, abs=2e-3)


def test_sweep_first_power_is_polygamous(default_sweep):
    mask = default_sweep.thetas >= 0.1
    assert np.all(default_sweep.delta[mask, 0] < 0.0)


def test_sweep_is_continuous_up_to_tenth_power():
    sweep = theta_sweep(theta_grid(0.1, math.pi, 0.01), n_set=range(1, 11))
    assert np.max(np.abs(np.diff(sweep.delta, axis=0))) <= 0.05


def test_sweep_needs_at_least_two_powers(default_sweep):
    mask = default_sweep.thetas >= 0.1
    powers = np.array(default_sweep.min_powers, dtype=object)[mask]
    assert all(r is not None and r >= 2 for r in powers)


def test_sweep_reaches_high_powers(default_sweep):
    mask = default_sweep.thetas >= 0.1
    powers = [r or 0 for r in np.array(default_sweep.min_powers, dtype=object)[mask]]
    assert default_sweep.max_min_power >= 10
    assert max(powers) >= 10
    peak = default_sweep.thetas[mask][int(np.argmax(powers))]
    assert 2.5 <= peak <= 2.95


def test_sweep_rows(default_sweep):
    rows = list(default_sweep.rows())
    assert len(rows) == len(default_sweep.thetas) * 3
    assert rows[-1].theta == math.pi
    assert rows[-1].n == 3
    assert rows[-1].r == 3


def test_sweep_with_workers_matches_serial():
    grid = theta_grid(1.0, math.pi, 0.5)
    serial = theta_sweep(grid, n_set=(1, 2), workers=1)
    pooled = theta_sweep(grid, n_set=(1, 2), workers=2)
    assert np.array_equal(serial.delta, pooled.delta)
    assert serial.min_powers == pooled.min_powers


def test_sweep_validation():
    with pytest.raises(ValidationError):
        theta_sweep([], n_set=(1,))
    with pytest.raises(ValidationError):
        theta_sweep([1.0], n_set=(0,))


def test_sweep_in_bits_scales_first_power():
    nats = theta_sweep([math.pi], n_set=(1,))
    bits = theta_sweep([math.pi], n_set=(1,), base="bits")
    assert bits.delta[0, 0] == pytest.approx(nats.delta[0, 0] / math.log(2.0))
    assert bits.reports[0].base.value == "bits"
