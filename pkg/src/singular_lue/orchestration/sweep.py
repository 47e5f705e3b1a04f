"""Fan independent grid points out to a worker pool and collect them in input order."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Optional, Sequence, TypeVar

import structlog

logger = structlog.get_logger(__name__)

P = TypeVar("P")
R = TypeVar("R")


@dataclass(frozen=True)
class SweepOutcome(Generic[P, R]):
    point: P
    result: Optional[R] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_sweep(
    points: Sequence[P],
    task: Callable[[P], R],
    max_workers: Optional[int] = None,
) -> List[SweepOutcome[P, R]]:
    """Run ``task`` on every point; failures are captured per point.

    Tasks must not share mpmath contexts; each builds its own PrecisionContext.
    """
    if max_workers == 1 or len(points) <= 1:
        return [_run_one(task, p, i) for i, p in enumerate(points)]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(_run_one, task, p, i) for i, p in enumerate(points)]
        return [f.result() for f in futures]


def _run_one(task: Callable[[P], R], point: P, index: int) -> SweepOutcome[P, R]:
    try:
        result = task(point)
    except Exception as e:
        logger.warning("sweep.point_failed", index=index, point=repr(point), error=str(e))
        return SweepOutcome(point=point, error=e)
    logger.debug("sweep.point_done", index=index)
    return SweepOutcome(point=point, result=result)
