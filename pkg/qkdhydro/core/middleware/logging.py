import functools
import json
import time
from datetime import datetime
from typing import Any, Callable, Dict

import sentry_sdk
import typer
from loguru import logger
from pydantic import ValidationError

from qkdhydro.common.exception import QKDError
from qkdhydro.common.message import ErrorCode, get_message
from qkdhydro.core.config import settings
from qkdhydro.core.middleware.trace import traced


def _arguments(kwargs: Dict[str, Any]) -> Dict[str, Any]:
    """Paths and scalars only; anything else is logged by type name."""
    arguments = {}
    for name, value in kwargs.items():
        if value is None or isinstance(value, (str, int, float, bool)):
            arguments[name] = value
        else:
            arguments[name] = str(value) if hasattr(value, "__fspath__") else type(value).__name__
    return arguments


def _classify(e: Exception) -> tuple[int, ErrorCode, str]:
    if isinstance(e, QKDError):
        return e.exit_code, e.error, e.message
    elif isinstance(e, ValidationError):
        return 2, ErrorCode.CONFIG_ERROR, "\n".join(f"{error['msg']} {error['loc']}" for error in e.errors())
    elif isinstance(e, OSError):
        return 2, ErrorCode.CONFIG_ERROR, f"{e.strerror or e}: {e.filename}" if e.filename else str(e)
    sentry_sdk.capture_exception(e)
    return 1, ErrorCode.SERVER_ERROR, get_message(ErrorCode.SERVER_ERROR, settings.LANGUAGE)


def command(func: Callable) -> Callable:
    """Wraps a CLI verb: one JSON log record per invocation and exit codes from the error table."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        request_time = datetime.now()
        start_time = time.time()
        with traced() as run_id:
            log_data = {
                "timestamp": request_time.isoformat(),
                "run_id": run_id,
                "command": func.__name__.replace("_", "-"),
                "arguments": _arguments(kwargs),
            }
            try:
                result = func(*args, **kwargs)
            except (typer.Exit, typer.Abort):
                raise
            except Exception as e:
                exit_code, error, message = _classify(e)
                log_data.update(duration=time.time() - start_time, exit_code=exit_code, error=type(e).__name__)
                logger.error(json.dumps(log_data))
                typer.echo(f"{get_message(error, settings.LANGUAGE)}: {message}", err=True)
                raise typer.Exit(code=exit_code) from e
            log_data.update(duration=time.time() - start_time, exit_code=0, error=None)
            logger.info(json.dumps(log_data))
            return result

    return wrapper
