from typing import Optional

import typer

from qkdhydro.core.middleware import command
from qkdhydro.db import write_csv
from qkdhydro.schema import Scenario, SweepEngine, SweepMode
from qkdhydro.service import parse_grid, pipelineService
from qkdhydro.service.finitekey import CURVE_HEADERS, curve_records
from qkdhydro.service.pipeline import SweepKind

cliRouter = typer.Typer()


def _sweep(
    kind: SweepKind,
    scenario: str,
    grid: str,
    out: str,
    mode: Optional[SweepMode],
    engine: Optional[SweepEngine],
    block_size: Optional[float],
    seed: Optional[int],
) -> None:
    config = Scenario.load(scenario).with_seed(seed)
    values = parse_grid(grid, kind)
    block = int(round(block_size)) if block_size is not None else None
    rows = pipelineService.sweep(config, kind, values, mode, engine, block)
    write_csv(out, CURVE_HEADERS[kind], curve_records(rows))
    typer.echo(out)


@cliRouter.command(name="sweep-distance", help="Secure key rate over a grid of fiber lengths (km).")
@command
def sweep_distance(
    scenario: str = typer.Option(..., "--scenario", help="⚙️ Scenario file"),
    grid: str = typer.Option(..., "--grid", help="📏 Comma separated lengths in km"),
    out: str = typer.Option(..., "--out", help="📄 CSV file to write"),
    mode: Optional[SweepMode] = typer.Option(None, "--mode", help="Overrides [sweep] mode"),
    engine: Optional[SweepEngine] = typer.Option(None, "--engine", help="Overrides [sweep] engine"),
    block_size: Optional[float] = typer.Option(None, "--block-size", help="Overrides [sweep] block_size"),
    seed: Optional[int] = typer.Option(None, "--seed", help="🎲 Overrides [simulation] seed"),
):
    _sweep("distance", scenario, grid, out, mode, engine, block_size, seed)


@cliRouter.command(name="sweep-misalignment", help="Secure key rate over a grid of misalignment angles.")
@command
def sweep_misalignment(
    scenario: str = typer.Option(..., "--scenario", help="⚙️ Scenario file"),
    grid: str = typer.Option(..., "--grid", help="📐 Comma separated angles in rad, or degrees ending in deg"),
    out: str = typer.Option(..., "--out", help="📄 CSV file to write"),
    mode: Optional[SweepMode] = typer.Option(None, "--mode", help="Overrides [sweep] mode"),
    engine: Optional[SweepEngine] = typer.Option(None, "--engine", help="Overrides [sweep] engine"),
    block_size: Optional[float] = typer.Option(None, "--block-size", help="Overrides [sweep] block_size"),
    seed: Optional[int] = typer.Option(None, "--seed", help="🎲 Overrides [simulation] seed"),
):
    _sweep("misalignment", scenario, grid, out, mode, engine, block_size, seed)
