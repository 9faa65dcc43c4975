from .io_helpers import (
    write_text_atomic, write_json, write_jsonl, iter_jsonl, ensure_dir,
)
from .timers import Timer
from .config_loader import load_config, apply_cli_overrides, output_paths
from .validators import (
    validate_settings, validate_scenario, validate_snapshot, validate_label_map,
)
from .errors import (
    UmlError, InputDomainError, DimensionError, NodeNotFoundError, ClassNotFoundError,
    ConfigError, SnapshotFormatError, SnapshotVersionError, MissingArtifactError,
    AssociationConflictError,
)

__all__ = [
    "write_text_atomic", "write_json", "write_jsonl", "iter_jsonl", "ensure_dir",
    "Timer", "load_config", "apply_cli_overrides", "output_paths",
    "validate_settings", "validate_scenario", "validate_snapshot", "validate_label_map",
    "UmlError", "InputDomainError", "DimensionError", "NodeNotFoundError",
    "ClassNotFoundError", "ConfigError", "SnapshotFormatError", "SnapshotVersionError",
    "MissingArtifactError", "AssociationConflictError",
]
