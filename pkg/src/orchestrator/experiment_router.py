import logging
from typing import Any, Callable, Dict, List

from src.models import ExperimentCall
from src.orchestrator.engine import Event, RunContext
from src.orchestrator.protocols import (
    run_boundary,
    run_heights,
    run_mission,
    run_oneshot,
    run_transfer,
)
from src.orchestrator.state import RunState


logger = logging.getLogger(__name__)


class ExperimentRouter:
    """Routes experiment calls to their protocol implementations."""

    def __init__(self, ctx: RunContext):
        self.ctx = ctx
        self.protocols: Dict[str, Callable[..., RunState]] = {
            "transfer": run_transfer,
            "boundary": run_boundary,
            "oneshot": run_oneshot,
            "heights": run_heights,
            "mission": run_mission,
        }

    @property
    def names(self) -> List[str]:
        return sorted(self.protocols)

    def dispatch(
        self, call: ExperimentCall, on_event: Callable[[Event], None] = lambda e: None
    ) -> RunState:
        """Run one protocol; unknown names and protocol failures are logged and re-raised."""
        logger.info(f"Dispatching experiment: {call.name}")
        protocol = self.protocols.get(call.name)
        if protocol is None:
            error_msg = f"Unknown experiment: {call.name} (expected one of {', '.join(self.names)})"
            logger.error(error_msg)
            raise KeyError(error_msg)

        try:
            run = protocol(self.ctx, on_event=on_event, **call.args)
        except Exception as e:
            logger.error(f"Experiment {call.name} failed: {e}", exc_info=True)
            raise
        logger.info(f"Experiment {call.name} completed successfully")
        for stage, seconds in run.timings.items():
            logger.info(f"  {stage}: {seconds:.2f}s")
        return run

    def dispatch_all(self, calls: List[ExperimentCall]) -> Dict[str, Any]:
        """Run several protocols in order, returning their summaries keyed by name."""
        return {call.name: self.dispatch(call).to_json() for call in calls}
