from .montecarlo import monteCarloService
from .pipeline import SessionOutcome, parse_grid, pipelineService

__all__ = [
    "monteCarloService",
    "pipelineService",
    "SessionOutcome",
    "parse_grid",
]
