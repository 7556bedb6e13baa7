"""
Report builders behind the management commands, and their CSV, JSON and
table renderings.
"""

import csv
import io
import json
from dataclasses import dataclass

import structlog

from correlations.classical import (
    CHECKS,
    ClassicalScan,
    classical_batch,
    evaluate_pmf,
)
from correlations.deficit import deficit_report
from correlations.monogamy import (
    min_monogamy_power,
    monogamy_table,
    theta_grid,
    theta_sweep,
)
from correlations.states import StateName, StateSpec
from quantum_monogamy import settings

logger = structlog.get_logger(__name__)

# table1 reports powers 1..5
TABLE1_POWERS = 5


@dataclass
class Output:
    header: tuple
    rows: list
    summary: dict | None = None
    default_format: str = "csv"


def format_number(value):
    """12 significant digits; shared by CSV and JSON so both agree."""
    return f"{value:.{settings.SIGNIFICANT_DIGITS}g}"


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(format_number(value))
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    return value


def _table_value(value):
    if isinstance(value, float):
        return f"{value:.{settings.DISPLAY_DECIMALS}f}"
    return _csv_value(value)


def render_csv(output):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(output.header)
    for row in output.rows:
        writer.writerow(_csv_value(value) for value in row)
    return buffer.getvalue()


def render_json(output):
    document = {"rows": [dict(zip(output.header, row)) for row in output.rows]}
    if output.summary is not None:
        document = {"summary": output.summary} | document
    return json.dumps(_json_value(document), indent=2) + "\n"


def render_table(output):
    cells = [list(output.header)] + [
        [_table_value(value) for value in row] for row in output.rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(output.header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


RENDERERS = {"csv": render_csv, "json": render_json, "table": render_table}


def render(output, fmt=None):
    return RENDERERS[fmt or output.default_format](output)


def build_table1(config):
    rows = [
        (label, row.n, row.q_pair_n, row.q_bipart_n, row.delta_n)
        for label, row in monogamy_table(n_max=TABLE1_POWERS, base=config.base)
    ]
    summary = {"base": config.base.value}
    for name in (StateName.W, StateName.WWBAR):
        tangle = min_monogamy_power(
            deficit_report(StateSpec.named(name), config.base), config.n_max
        )
        summary[name.value] = {"r": tangle.r, "tau_q": tangle.tau_q}
    return Output(
        header=("state", "n", "d_pair_n", "d_bipart_n", "delta_n"),
        rows=rows,
        summary=summary,
        default_format="table",
    )


def build_fig1(config):
    grid = theta_grid(config.theta_start, config.theta_stop, config.theta_step)
    sweep = theta_sweep(
        grid, config.powers, config.base, n_max=config.n_max, workers=config.workers
    )
    rows = [
        (row.theta, row.n, row.d_pair_n, row.d_bipart_n, row.delta_n, row.r)
        for row in sweep.rows()
    ]
    summary = {
        "base": config.base.value,
        "points": len(sweep.thetas),
        "powers": list(sweep.powers),
        "max_min_power": sweep.max_min_power,
        "polygamous_points": sum(
            1 for report in sweep.reports if not report.is_monogamous
        ),
    }
    return Output(
        header=("theta", "n", "d_pair_n", "d_bipart_n", "delta_n", "r"),
        rows=rows,
        summary=summary,
    )


def build_deficit(config):
    spec = config.state
    report = deficit_report(spec, config.base)
    tangle = min_monogamy_power(report, config.n_max)
    row = (
        spec.label,
        report.base.value,
        report.d_ab,
        report.d_ac,
        report.d_a_bc,
        report.monogamy_gap,
        report.degenerate_marginal,
        tangle.r,
        tangle.tau_q,
    )
    summary = {
        "state": spec.to_record(),
        "base": report.base.value,
        "r": tangle.r,
        "tau_q": tangle.tau_q,
        "degenerate_marginal": report.degenerate_marginal,
    }
    return Output(
        header=(
            "state",
            "base",
            "d_AB",
            "d_AC",
            "d_A_BC",
            "monogamy_gap",
            "degenerate_marginal",
            "r",
            "tau_q",
        ),
        rows=[row],
        summary=summary,
        default_format="json",
    )


def build_classical_scan(config):
    if config.pmf is not None:
        scan = ClassicalScan(
            dims=config.pmf.dims,
            seed=config.seed,
            base=config.base,
            rows=[evaluate_pmf(config.pmf, config.base, config.n_max)],
        )
    else:
        scan = classical_batch(
            config.samples,
            config.dims,
            config.seed,
            config.base,
            n_max=config.n_max,
            workers=config.workers,
        )
    rows = [
        (
            row.seed,
            row.triple.x,
            row.triple.y,
            row.triple.z,
            row.triple.h_xz,
            row.min_n,
            *(row.inequalities.slacks[name] for name in CHECKS),
            row.inequalities.conditioning_gap,
        )
        for row in scan.rows
    ]
    return Output(
        header=(
            "seed",
            "x",
            "y",
            "z",
            "h_xz",
            "min_n",
            *(f"slack_{name}" for name in CHECKS),
            "conditioning_gap",
        ),
        rows=rows,
        summary=scan.summary(),
    )


REPORT_BUILDERS = {
    "table1": build_table1,
    "fig1": build_fig1,
    "deficit": build_deficit,
    "classical_scan": build_classical_scan,
}


def run(config):
    output = REPORT_BUILDERS[config.command](config)
    logger.info(
        "report_finished",
        report=config.command,
        base=config.base.value,
        rows=len(output.rows),
    )
    return output


def write(output, config, stream):
    """Write the rendered output to ``config.out``, or to ``stream`` when unset.

    In CSV form the summary goes to a ``.summary.json`` file next to
    ``config.out``, or to the log when writing to a stream.
    """
    fmt = config.format or output.default_format
    text = render(output, fmt)
    if config.out is None:
        stream.write(text)
    else:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        config.out.write_text(text)
    if fmt != "json" and output.summary is not None:
        if config.out is None:
            logger.info("report_summary", report=config.command, **output.summary)
        else:
            summary_path = config.out.with_suffix(".summary.json")
            summary_path.write_text(
                json.dumps(_json_value(output.summary), indent=2) + "\n"
            )
    return text
