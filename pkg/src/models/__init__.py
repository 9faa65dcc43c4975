from .detection import Detection
from .metrics import MetricsRecord
from .experiment import ExperimentConfig, PhaseSpec, ExperimentCall

__all__ = ["Detection", "MetricsRecord", "ExperimentConfig", "PhaseSpec", "ExperimentCall"]
