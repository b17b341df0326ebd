from qkdhydro.main import cli

cli()
