"""
Configuration handler for kernel-queues.

Defaults come from config/config.yaml and can be overridden through the
environment (a .env file is honoured), e.g. KQ_ORDER=256.
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "config.yaml"
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

BUILTIN_DEFAULTS: Dict[str, Any] = {
    "order": 128,
    "r_max": 40,
    "truncation": 200,
    "tol": 1e-12,
    "max_iterations": 1_000_000,
    "jobs": 1,
}

ENV_OVERRIDES = {
    "order": "KQ_ORDER",
    "r_max": "KQ_RMAX",
    "truncation": "KQ_TRUNCATION",
    "tol": "KQ_TOL",
    "max_iterations": "KQ_MAX_ITERATIONS",
    "jobs": "KQ_JOBS",
}

_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """Configuration handler for the application."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize the configuration handler.

        Args:
            config_path: Path to the YAML configuration file. Falls back to
                $KQ_CONFIG, then to config/config.yaml; a missing default
                file means built-in defaults.

        Raises:
            FileNotFoundError: If an explicitly named file does not exist
            ValueError: If the file is not a YAML mapping
        """
        load_dotenv()  # KQ_* variables may live in .env
        self.logger = logging.getLogger(__name__)
        explicit = config_path or os.getenv("KQ_CONFIG")
        self.config_path = Path(explicit) if explicit else DEFAULT_CONFIG_PATH
        self.config = self._load_config(required=bool(explicit))

    def _load_config(self, required: bool) -> Dict[str, Any]:
        """Load configuration from the YAML file.

        Returns:
            dict: Configuration dictionary (empty when the default file is absent)
        """
        if not self.config_path.exists() and not required:
            self.logger.debug(f"No configuration at {self.config_path}; using built-in defaults")
            return {}
        with open(self.config_path, "r") as f:
            loaded = yaml.safe_load(f)
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ValueError(f"Configuration file {self.config_path} must contain a mapping")
        return loaded

    def _validate_defaults(self, config: Dict[str, Any]) -> None:
        """Validate the analysis defaults.

        Raises:
            ValueError: If a field is missing or out of range
        """
        for field, value in config.items():
            if field not in BUILTIN_DEFAULTS:
                raise ValueError(f"Unknown field '{field}' in defaults configuration")
            if field == "tol":
                if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                    raise ValueError(f"Field 'tol' must be a positive number, got {value!r}")
            elif isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError(f"Field '{field}' must be a non-negative integer, got {value!r}")
        for field in ("order", "max_iterations", "jobs"):
            if config[field] < 1:
                raise ValueError(f"Field '{field}' must be at least 1")

    def _env_value(self, field: str) -> Optional[Any]:
        raw = os.getenv(ENV_OVERRIDES[field])
        if raw is None or raw.strip() == "":
            return None
        try:
            return float(raw) if field == "tol" else int(raw)
        except ValueError:
            raise ValueError(f"Environment variable {ENV_OVERRIDES[field]}={raw!r} "
                             f"is not a valid value for '{field}'") from None

    @property
    def defaults(self) -> Dict[str, Any]:
        """Analysis defaults: built-in < YAML 'defaults' section < environment.

        Returns:
            dict: order, r_max, truncation, tol, max_iterations, jobs

        Raises:
            ValueError: If configuration is invalid
        """
        section = self.config.get("defaults") or {}
        if not isinstance(section, dict):
            raise ValueError("The 'defaults' section must be a mapping")
        merged = {**BUILTIN_DEFAULTS, **section}
        for field in ENV_OVERRIDES:
            value = self._env_value(field)
            if value is not None:
                merged[field] = value
        self._validate_defaults(merged)
        return merged

    @property
    def logging_config(self) -> Dict[str, Any]:
        section = self.config.get("logging") or {}
        if not isinstance(section, dict):
            raise ValueError("The 'logging' section must be a mapping")
        return section

    @property
    def log_level(self) -> str:
        """Log level name: $KQ_LOG_LEVEL, else logging.level, else INFO."""
        level = os.getenv("KQ_LOG_LEVEL") or self.logging_config.get("level", "INFO")
        level = str(level).upper()
        if level not in _LEVELS:
            raise ValueError(f"Invalid log level '{level}'; expected one of {', '.join(_LEVELS)}")
        return level

    @property
    def log_format(self) -> str:
        return self.logging_config.get("format", DEFAULT_LOG_FORMAT)
