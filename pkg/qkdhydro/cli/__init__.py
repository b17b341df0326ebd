import sentry_sdk
import typer

from qkdhydro.cli.cipher import cliRouter as cipherRouter
from qkdhydro.cli.plan import cliRouter as planRouter
from qkdhydro.cli.scenario import cliRouter as scenarioRouter
from qkdhydro.cli.session import cliRouter as sessionRouter
from qkdhydro.cli.sweep import cliRouter as sweepRouter
from qkdhydro.core.config import settings

app = typer.Typer(
    name="qkdhydro",
    help="🔐 Decoy-state BB84 simulator and key toolkit for hydropower fiber links.",
    no_args_is_help=True,
    add_completion=False,
)
app.add_typer(scenarioRouter)
app.add_typer(sessionRouter)
app.add_typer(sweepRouter)
app.add_typer(cipherRouter)
app.add_typer(planRouter)


@app.callback()
def main():
    # error reporting stays off unless a DSN is configured
    if settings.SENTRY_DSN:
        sentry_sdk.init(
            dsn=settings.SENTRY_DSN,
            server_name=settings.APP_NAME,
            release=settings.APP_VERSION,
            attach_stacktrace=True,
        )


__all__ = ["app"]
