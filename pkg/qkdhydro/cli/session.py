from typing import Optional

import typer

from qkdhydro.common.exception import ProtocolAbort, VerificationFailed
from qkdhydro.common.response import Response
from qkdhydro.core.middleware import command
from qkdhydro.db import KeyStore, write_text
from qkdhydro.schema import Scenario, SessionReport
from qkdhydro.service import pipelineService
from qkdhydro.service.montecarlo import tally_to_csv

cliRouter = typer.Typer()


@cliRouter.command(help="Run one simulated session and write the secure key.")
@command
def simulate(
    scenario: str = typer.Option(..., "--scenario", help="⚙️ Scenario file"),
    out: str = typer.Option(..., "--out", help="🔑 Key file, written only when a key was distilled"),
    report: Optional[str] = typer.Option(None, "--report", help="📄 Session report file, stdout when omitted"),
    seed: Optional[int] = typer.Option(None, "--seed", help="🎲 Overrides [simulation] seed"),
    tally: Optional[str] = typer.Option(None, "--tally", help="📊 Per-intensity tally CSV file"),
):
    config = Scenario.load(scenario).with_seed(seed)
    outcome = pipelineService.simulate(config)
    document = Response[SessionReport](data=outcome.report).dump()
    if report:
        write_text(report, document)
    else:
        typer.echo(document, nl=False)
    if tally and outcome.tally is not None:
        write_text(tally, tally_to_csv(outcome.tally))

    result = outcome.report
    if result.keys_match is False:
        raise VerificationFailed(key_length_bits=result.key_length_bits)
    if result.aborted:
        raise ProtocolAbort(
            f"QBER {result.qber:.4f} above threshold {config.postproc.qber_threshold}",
            qber=result.qber,
        )
    if outcome.key is not None:
        KeyStore.write_key_file(out, [outcome.key.bits])
