"""``voltstab`` command line.

Exit codes: 0 success, 2 configuration or usage error, 3 a simulation that
ended with TerminatedNoRoot (its partial trajectory is still written).
Diagnostics go to stderr; data goes to the ``-o`` file (``-`` for stdout).
"""

from __future__ import annotations

import math
import sys
from contextlib import contextmanager

import click
import numpy as np

from voltstab import benchmark as bm
from voltstab import dynload as dl
from voltstab.errors import ConfigError, VoltstabError
from voltstab.powerflow import pv_curve
from voltstab.scenario_file import load_scenario
from voltstab.simcore import ModelKind, SimulationOutcome, Status, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_ROOT = 3

DL_COLUMNS = ("t", "v2", "delta2", "p2", "q2", "x", "y")
BENCH_COLUMNS = ("t", "v2")
PV_COLUMNS = ("p2", "v_upper", "v_lower")
REGION_COLUMNS = ("x", "y", "valid")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return f"{float(v):.12g}"


def status_line(outcome: SimulationOutcome | None = None) -> str:
    if outcome is None or outcome.status is Status.COMPLETED:
        return "# status=Completed"
    return f"# status=TerminatedNoRoot t={fmt(outcome.terminated_at)}"


def write_csv(stream, columns, rows, status: str) -> None:
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")
    stream.write(status + "\n")


@contextmanager
def _open_output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_CONFIG)


def _load(ctx: click.Context, path: str):
    try:
        scenario = load_scenario(path)
        overrides = {k: v for k, v in ctx.obj.items() if v is not None}
        if overrides:
            scenario = scenario.replace(**overrides)
        return scenario
    except ConfigError as exc:
        _fail(exc)


@click.group()
@click.option("--dt", type=float, default=None, help="Override the scenario time step (s).")
@click.option("--duration", type=float, default=None, help="Override the scenario duration (s).")
@click.pass_context
def cli(ctx: click.Context, dt, duration):
    """Voltage stability simulations of a two-node circuit with dynamic loads."""
    ctx.obj = {"dt": dt, "duration": duration}


@cli.command()
@click.argument("scenario_path", metavar="FILE", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, help="CSV destination ('-' for stdout).")
@click.pass_context
def simulate(ctx, scenario_path, output):
    """Run a scenario and write its trajectory as CSV."""
    scenario = _load(ctx, scenario_path)
    try:
        outcome = run_simulation(scenario)
    except ConfigError as exc:
        _fail(exc)
    if scenario.model is ModelKind.DYNAMIC_LOAD:
        columns = DL_COLUMNS
        rows = ([s.t, s.v2, s.delta2, s.p2, s.q2, s.x, s.y] for s in outcome.samples)
    else:
        columns = BENCH_COLUMNS
        rows = ([s.t, s.v2] for s in outcome.samples)
    with _open_output(output) as fh:
        write_csv(fh, columns, rows, status_line(outcome))
    if outcome.status is Status.TERMINATED_NO_ROOT:
        click.echo(f"simulation terminated at t={fmt(outcome.terminated_at)}: no real positive voltage", err=True)
        sys.exit(EXIT_NO_ROOT)


@cli.command()
@click.argument("scenario_path", metavar="FILE", type=click.Path(dir_okay=False))
@click.pass_context
def equilibria(ctx, scenario_path):
    """Print the equilibrium voltages of a scenario's (undisturbed) model."""
    scenario = _load(ctx, scenario_path)
    try:
        if scenario.model is ModelKind.DYNAMIC_LOAD:
            click.echo("v2")
            for v in dl.dl_equilibria(scenario.load, scenario.network):
                click.echo(f"{v:#.6g}")
        else:
            click.echo(f"{'v2':<12}stability")
            for rep in bm.benchmark_equilibria(scenario.bench):
                click.echo(f"{rep.v_eq:<#12.6g}{rep.classification.value}")
    except VoltstabError as exc:
        _fail(exc)


@cli.command("pv-curve")
@click.argument("scenario_path", metavar="FILE", type=click.Path(dir_okay=False))
@click.option("--k", "k", type=float, required=True, help="Reactive to real power ratio Q2/P2.")
@click.option("--p-max", type=float, required=True, help="Largest real power sample.")
@click.option("-n", "n", type=int, required=True, help="Number of equally spaced samples from 0.")
@click.option("-o", "--output", required=True, help="CSV destination ('-' for stdout).")
@click.pass_context
def pv_curve_cmd(ctx, scenario_path, k, p_max, n, output):
    """P-V nose curve of the scenario's network at a fixed power factor."""
    scenario = _load(ctx, scenario_path)
    if scenario.model is not ModelKind.DYNAMIC_LOAD:
        _fail(ConfigError("pv-curve needs a dynamic_load scenario with a [network] section"))
    if n < 2:
        _fail(ConfigError(f"-n must be at least 2, got {n}"))
    if not (math.isfinite(p_max) and p_max > 0):
        _fail(ConfigError(f"--p-max must be positive, got {p_max}"))
    try:
        points = pv_curve(scenario.network, k, np.linspace(0.0, p_max, n).tolist())
    except (VoltstabError, ValueError) as exc:
        _fail(exc)
    rows = ([pt.p2, pt.v_upper, pt.v_lower] for pt in points if pt.present)
    with _open_output(output) as fh:
        write_csv(fh, PV_COLUMNS, rows, status_line())


@cli.command("region-scan")
@click.argument("scenario_path", metavar="FILE", type=click.Path(dir_okay=False))
@click.option("--x-max", type=float, default=3.0, show_default=True)
@click.option("--y-max", type=float, default=3.0, show_default=True)
@click.option("--resolution", type=int, default=101, show_default=True, help="Grid points per axis.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for the scan.")
@click.option("-o", "--output", required=True, help="CSV destination ('-' for stdout).")
@click.pass_context
def region_scan(ctx, scenario_path, x_max, y_max, resolution, jobs, output):
    """Classify load states by whether they admit two positive voltages."""
    scenario = _load(ctx, scenario_path)
    if scenario.model is not ModelKind.DYNAMIC_LOAD:
        _fail(ConfigError("region-scan needs a dynamic_load scenario"))
    if resolution < 2:
        _fail(ConfigError(f"--resolution must be at least 2, got {resolution}"))
    if jobs < 1:
        _fail(ConfigError(f"--jobs must be at least 1, got {jobs}"))
    try:
        grid = dl.valid_region_scan(
            scenario.load, scenario.network, (0.0, x_max), (0.0, y_max), resolution, jobs=jobs
        )
    except (VoltstabError, ValueError) as exc:
        _fail(exc)
    rows = (
        [x, y, grid.valid[j, i]]
        for i, x in enumerate(grid.xs.tolist())
        for j, y in enumerate(grid.ys.tolist())
    )
    with _open_output(output) as fh:
        write_csv(fh, REGION_COLUMNS, rows, status_line())


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="voltstab", standalone_mode=True)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
