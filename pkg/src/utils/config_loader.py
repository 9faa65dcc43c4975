import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

from src.utils.errors import ConfigError
from src.utils.validators import validate_settings

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "src/config/settings.yaml"

# Environment variables that override individual settings after .env is loaded.
ENV_OVERRIDES = {
    "UML_SEED": ("simulation", "seed", int),
    "UML_OUTPUT_DIR": ("output", "dir", str),
    "UML_LOG_LEVEL": ("logging", "level", str.upper),
}


def load_config(config_path: Union[str, Path] = DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    """Load configuration from YAML file, apply environment overrides and validate it."""
    path = Path(config_path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            config = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"Invalid YAML in {path}: {exc}") from exc

    load_dotenv()
    for env_name, (section, key, cast) in ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is None or raw == "":
            continue
        try:
            value = cast(raw)
        except ValueError as exc:
            raise ConfigError(f"Invalid value for {env_name}: {raw!r}") from exc
        config.setdefault(section, {})[key] = value
        logger.debug(f"Applied {env_name} override to {section}.{key}")

    errors = validate_settings(config)
    if errors:
        raise ConfigError(f"Invalid config {path}: " + "; ".join(errors))
    return config


def apply_cli_overrides(
    config: Dict[str, Any], seed: Optional[int] = None, out_dir: Optional[Union[str, Path]] = None
) -> Dict[str, Any]:
    """Return a copy of ``config`` with ``--seed`` / ``--out`` applied."""
    updated = {section: dict(values) if isinstance(values, dict) else values
               for section, values in config.items()}
    if seed is not None:
        updated.setdefault("simulation", {})["seed"] = seed
    if out_dir is not None:
        updated.setdefault("output", {})["dir"] = str(out_dir)
    return updated


def output_paths(config: Dict[str, Any]) -> Dict[str, Path]:
    """Resolve the output, data and model directories from config."""
    out = Path(config["output"]["dir"])
    paths = config.get("paths", {})
    return {
        "out": out,
        "data": out / paths.get("data_dir", "data"),
        "models": out / paths.get("models_dir", "models"),
    }
