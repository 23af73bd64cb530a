"""Configuration management for pathwise."""

import os
from typing import Optional, Any
from dataclasses import dataclass, field
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

_TRUTHY = {"1", "true", "yes", "on"}


def env_flag(name: str, default: bool = False) -> bool:
    """Read a boolean flag from the environment."""
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in _TRUTHY


@dataclass
class KeggConfig:
    """KEGG REST client configuration."""

    base_url: str = "https://rest.kegg.jp"
    cache_dir: Path = field(
        default_factory=lambda: Path(
            os.getenv("PATHWISE_CACHE_DIR", str(Path.home() / ".cache" / "pathwise" / "kegg"))
        )
    )
    network_enabled: bool = field(default_factory=lambda: not env_flag("PATHWISE_NO_NETWORK"))
    max_retries: int = 3
    backoff_seconds: float = 1.0
    rate_limit_per_second: float = 3.0
    timeout: float = 30.0  # seconds


@dataclass
class DaaDefaults:
    """Defaults for differential abundance runs."""

    p_adjust: str = "BH"
    alpha: float = 0.05
    seed: int = 42
    mc_instances: int = 128
    pseudo_count: float = 0.5


@dataclass
class PlotDefaults:
    """Defaults shared by the SVG renderers."""

    width_px: int = 960
    height_px: int = 640
    font_family: str = "Arial"
    font_size: float = 12.0
    max_features: int = 30


@dataclass
class Config:
    """Main application configuration."""

    # Environment
    env: str = field(default_factory=lambda: os.getenv("ENV", "production"))
    log_level: str = field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))
    log_file: Optional[Path] = field(
        default_factory=lambda: Path(p) if (p := os.getenv("PATHWISE_LOG_FILE")) else None
    )

    # Sub-configurations
    kegg: KeggConfig = field(default_factory=KeggConfig)
    daa: DaaDefaults = field(default_factory=DaaDefaults)
    plot: PlotDefaults = field(default_factory=PlotDefaults)

    # Paths
    base_dir: Path = field(default_factory=lambda: Path(__file__).parent)
    data_dir: Path = field(default_factory=lambda: Path(__file__).parent / "data")

    @classmethod
    def from_env(cls) -> "Config":
        """Create configuration from environment variables."""
        return cls()

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "env": self.env,
            "log_level": self.log_level,
            "kegg": {
                **self.kegg.__dict__,
                "cache_dir": str(self.kegg.cache_dir),
            },
            "daa": self.daa.__dict__,
            "plot": self.plot.__dict__,
        }


# Global configuration instance
config = Config.from_env()
