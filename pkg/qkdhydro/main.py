from qkdhydro.cli import app


def cli() -> None:
    app(prog_name="qkdhydro")


if __name__ == "__main__":
    cli()
