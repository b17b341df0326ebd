import uuid
from contextlib import contextmanager
from typing import Iterator

from loguru import logger


def new_run_id() -> str:
    return str(uuid.uuid4())


@contextmanager
def traced(run_id: str | None = None) -> Iterator[str]:
    # every log line written inside carries the run id in its extra fields
    run_id = run_id or new_run_id()
    with logger.contextualize(run_id=run_id):
        yield run_id
