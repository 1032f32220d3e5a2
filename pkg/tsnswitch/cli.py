"""Command line interface of tsnswitch.

Exit codes are 0 on success, 1 if flows are rejected or a condition is infeasible and
2 for usage errors and invalid scenarios.

.. code-block:: bash

    $ tsnswitch count --n 6
    1128960
    $ tsnswitch check-sc2 example1.json
    $ tsnswitch edf-trace --tvector 2,4,8,8 --slots 8

"""
import dataclasses
import itertools
import json
import logging
import sys

import click

from tsnswitch.admission import check_sc1
from tsnswitch.admission import search_sc2
from tsnswitch.config import MAX_COUNT_PORTS
from tsnswitch.edf import TVector
from tsnswitch.edf import edf_trace
from tsnswitch.latin import count_decompositions
from tsnswitch.latin import enumerate_latin_squares
from tsnswitch.pre_processing.scenario_processing import process_scenario
from tsnswitch.shared import InfeasibleUtilizationError
from tsnswitch.shared import ScenarioError
from tsnswitch.shared import TrafficSpec
from tsnswitch.shared import UnsupportedSizeError
from tsnswitch.simulate import get_simulate_func

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


def _load_scenario(scenario):
    """Process a scenario path or example name and turn errors into usage errors."""
    try:
        return process_scenario(scenario)
    except ScenarioError as e:
        raise click.BadParameter(str(e), param_hint="SCENARIO") from e


def _echo_json(obj):
    click.echo(json.dumps(obj, indent=2))


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option("-v", "--verbose", count=True, help="Increase the logging verbosity.")
def cli(verbose):
    """Simulate TSN switches and check the admission of time-sensitive flows."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )


@cli.command()
@click.argument("scenario", type=str)
@click.option("--trace", type=click.Path(dir_okay=False), help="Write trace to CSV.")
@click.option("--slots", type=click.IntRange(min=1), help="Override the horizon.")
@click.option("--n-jobs", type=int, default=1, help="Jobs for the search of SC2.")
@click.pass_context
def simulate(ctx, scenario, trace, slots, n_jobs):
    """Simulate a scenario and print the report as JSON."""
    scenario = _load_scenario(scenario)
    if trace is not None:
        scenario = dataclasses.replace(scenario, emit_trace=True)

    try:
        report = get_simulate_func(scenario, n_jobs)(slots)
    except (ScenarioError, UnsupportedSizeError) as e:
        raise click.BadParameter(str(e), param_hint="SCENARIO") from e

    _echo_json(report.to_dict())
    if trace is not None:
        report.trace.to_csv(trace, index=False)

    if report.rejected:
        ctx.exit(1)


@cli.command("check-sc1")
@click.argument("scenario", type=str)
@click.pass_context
def check_sc1_command(ctx, scenario):
    """Check whether all flows of a scenario have periods of at least N slots."""
    scenario = _load_scenario(scenario)
    holds = check_sc1(TrafficSpec.from_flows(scenario.n, scenario.ts_flows))

    _echo_json({"sc1": holds})
    if not holds:
        ctx.exit(1)


@cli.command("check-sc2")
@click.argument("scenario", type=str)
@click.option("--n-jobs", type=int, default=1, help="Number of parallel jobs.")
@click.pass_context
def check_sc2_command(ctx, scenario, n_jobs):
    """Search a decomposition set and T-vector which satisfy SC2."""
    scenario = _load_scenario(scenario)
    try:
        cert = search_sc2(TrafficSpec.from_flows(scenario.n, scenario.ts_flows), n_jobs)
    except UnsupportedSizeError as e:
        raise click.BadParameter(str(e), param_hint="SCENARIO") from e

    if cert is None:
        _echo_json({"sc2": "INFEASIBLE"})
        ctx.exit(1)
    else:
        _echo_json({"sc2": "FEASIBLE", "certificate": cert.to_dict()})


@cli.command("enumerate")
@click.option("--n", "n", type=int, required=True, help="Number of ports.")
@click.option("--limit", type=click.IntRange(min=0), help="Print at most this many.")
def enumerate_command(n, limit):
    """Print all Latin squares with a fixed first row, one per line."""
    try:
        squares = enumerate_latin_squares(n)
    except UnsupportedSizeError as e:
        raise click.BadParameter(str(e), param_hint="--n") from e

    for latin in itertools.islice(squares, limit):
        click.echo(json.dumps(latin.to_rows()))


@cli.command("count")
@click.option("--n", "n", type=int, required=True, help="Number of ports.")
@click.option(
    "--method",
    type=click.Choice(["table", "enumerate"]),
    default="table",
    help=f"Use the table of reduced Latin squares (n <= {MAX_COUNT_PORTS}) or count "
    "the enumerated decomposition sets.",
)
def count_command(n, method):
    """Print the number of flow decomposition sets."""
    try:
        click.echo(count_decompositions(n, method))
    except UnsupportedSizeError as e:
        raise click.BadParameter(str(e), param_hint="--n") from e


@cli.command("edf-trace")
@click.option("--tvector", required=True, help="Periods like 2,4,8,8 or 3,6,6,inf.")
@click.option("--slots", type=click.IntRange(min=1), required=True)
def edf_trace_command(tvector, slots):
    """Print the task served by EDF in every slot as CSV."""
    try:
        tv = TVector.from_string(tvector)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--tvector") from e

    try:
        trace = edf_trace(tv, slots)
    except InfeasibleUtilizationError as e:
        raise click.ClickException(str(e)) from e

    click.echo(trace.to_frame().to_csv(index=False), nl=False)


def main(argv=None):
    """Run the command line interface and return the exit status."""
    try:
        rv = cli.main(args=argv, prog_name="tsnswitch", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return 1

    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
