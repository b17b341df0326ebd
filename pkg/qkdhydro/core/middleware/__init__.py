from qkdhydro.core.middleware.logging import command
from qkdhydro.core.middleware.trace import new_run_id, traced

__all__ = ["command", "new_run_id", "traced"]
