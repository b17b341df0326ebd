import typer

from qkdhydro.core.middleware import command
from qkdhydro.db import write_text
from qkdhydro.schema import Scenario

cliRouter = typer.Typer()


@cliRouter.command(help="Write the reference scenario with every default spelled out.")
@command
def init(
    out: str = typer.Option(..., "--out", help="📄 Scenario file to write"),
):
    write_text(out, Scenario.reference().to_ini())
    typer.echo(out)
