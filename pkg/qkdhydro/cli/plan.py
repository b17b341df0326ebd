from typing import Optional

import typer

from qkdhydro.common.response import Response
from qkdhydro.core.middleware import command
from qkdhydro.schema import PlanReport, Scenario
from qkdhydro.service import pipelineService

cliRouter = typer.Typer()


@cliRouter.command(help="Choose between one-time pad and authentication-only for a traffic budget.")
@command
def plan(
    bandwidth: float = typer.Option(..., "--bandwidth", help="📶 Traffic to protect, bits per second"),
    skr: Optional[float] = typer.Option(None, "--skr", help="🔑 Secret key rate, bits per second"),
    scenario: Optional[str] = typer.Option(None, "--scenario", help="⚙️ Scenario whose analytic rate is used"),
):
    config = Scenario.load(scenario) if scenario else None
    report = pipelineService.plan(bandwidth, skr, config)
    typer.echo(Response[PlanReport](data=report).dump(), nl=False)
