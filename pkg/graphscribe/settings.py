"""
Central runtime settings for graphscribe.
Reads from environment variables (and a local .env file) and provides typed access.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

from dotenv import load_dotenv

load_dotenv()

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}


@dataclass
class RuntimeConfig:
    """Where runs go and how they are executed."""
    run_root: Path = field(default_factory=lambda: Path("./runs"))
    device: str = "cpu"
    seed: int = 13


@dataclass
class ObservabilityConfig:
    """Logging configuration."""
    log_level: str = "INFO"
    debug: bool = False

    @property
    def level(self) -> int:
        return logging.DEBUG if self.debug else getattr(logging, self.log_level.upper(), logging.INFO)


@dataclass
class Settings:
    """Main settings container."""
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)
    observability: ObservabilityConfig = field(default_factory=ObservabilityConfig)

    @classmethod
    def from_env(cls) -> "Settings":
        """Load settings from environment variables."""
        return cls(
            runtime=RuntimeConfig(
                run_root=Path(os.getenv("GRAPHSCRIBE_RUN_ROOT", "./runs")),
                device=os.getenv("GRAPHSCRIBE_DEVICE", "cpu"),
                seed=int(os.getenv("GRAPHSCRIBE_SEED", "13")),
            ),
            observability=ObservabilityConfig(
                log_level=os.getenv("GRAPHSCRIBE_LOG_LEVEL", "INFO"),
                debug=os.getenv("GRAPHSCRIBE_DEBUG", "false").lower() == "true",
            ),
        )

    def validate(self) -> List[str]:
        """Validate settings and return list of warnings."""
        warnings = []

        if self.observability.log_level.upper() not in _LOG_LEVELS:
            warnings.append(
                f"Unknown log level '{self.observability.log_level}', falling back to INFO."
            )

        device = self.runtime.device
        if not (device == "cpu" or device == "mps" or device.startswith("cuda")):
            warnings.append(f"Unknown device '{device}'. Expected cpu, mps or cuda[:N].")

        return warnings


# Global settings instance
settings = Settings.from_env()
