from .engine import (
    Event, RunContext, StreamResult, new_knowledge, load_knowledge, make_gate, run_frames,
    train_stream, evaluate_stream, evaluate_sets, run_curve, write_metrics,
)
from .state import RunState
from .experiment_router import ExperimentRouter

__all__ = [
    "Event", "RunContext", "StreamResult", "new_knowledge", "load_knowledge", "make_gate",
    "run_frames", "train_stream", "evaluate_stream", "evaluate_sets", "run_curve",
    "write_metrics", "RunState", "ExperimentRouter",
]
