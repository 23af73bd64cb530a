"""Pipeline configuration and shared state between pipeline stages."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, field_validator

from src.pathwise.config import config
from src.pathwise.exceptions import ConfigError, PathwiseError
from src.pathwise.methods.base import DaaMethodName
from src.pathwise.stats.multitest import PAdjustMethod
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_METHODS = ["linda", "aldex2", "welch_t", "wilcoxon"]
_PATH_FIELDS = ("input_path", "metadata_path", "output_dir", "map_path", "annotation_table")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class PipelineConfig(BaseModel):
    """Validated configuration of a full ``run``."""

    model_config = {"extra": "forbid"}

    input_path: Path
    metadata_path: Path
    group_column: str = "group"
    feature_kind: Optional[str] = None
    convert_ko_to_kegg: bool = True
    map_path: Optional[Path] = None
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    p_adjust: str = Field(default_factory=lambda: config.daa.p_adjust)
    alpha: float = Field(default_factory=lambda: config.daa.alpha, gt=0.0, lt=1.0)
    min_agree: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default_factory=lambda: config.daa.seed, ge=0, lt=2 ** 64)
    mc_instances: int = Field(default_factory=lambda: config.daa.mc_instances, ge=2)
    reference_group: Optional[str] = None
    covariates: List[str] = Field(default_factory=list)
    output_dir: Path = Path("pathwise-output")
    annotation_mode: str = "offline"
    annotation_table: Optional[Path] = None
    max_features: int = Field(default_factory=lambda: config.plot.max_features, ge=1)
    sort_by: str = "class_then_p"
    width_px: int = Field(default_factory=lambda: config.plot.width_px, ge=100)
    height_px: int = Field(default_factory=lambda: config.plot.height_px, ge=100)
    pca_scale: bool = False

    @field_validator("methods", "covariates", mode="before")
    @classmethod
    def _comma_lists(cls, value):
        return _split_list(value)

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one DA method is required")
        try:
            methods = [DaaMethodName.parse(m).value for m in value]
        except PathwiseError as e:
            raise ValueError(str(e)) from None
        if len(set(methods)) != len(methods):
            raise ValueError("DA methods must not repeat")
        return methods

    @field_validator("p_adjust")
    @classmethod
    def _known_adjustment(cls, value: str) -> str:
        try:
            return PAdjustMethod.parse(value).value
        except PathwiseError as e:
            raise ValueError(str(e)) from None

    @field_validator("annotation_mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("offline", "kegg_rest", "auto"):
            raise ValueError("annotation_mode must be offline, kegg_rest or auto")
        return value

    @field_validator("sort_by")
    @classmethod
    def _known_sort(cls, value: str) -> str:
        if value not in ("adjusted_p", "class_then_p", "effect"):
            raise ValueError("sort_by must be adjusted_p, class_then_p or effect")
        return value

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "PipelineConfig":
        """
        Build a config from a ``key = value`` file and command-line overrides.

        Relative paths in the file are resolved against the file's directory.
        Overrides whose value is None are ignored.
        """
        values: Dict[str, Any] = {}
        if config_file is not None:
            values.update(read_config_file(config_file))
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.model_validate(values)

    def check_output_dir(self) -> None:
        target = self.output_dir
        existing = target if target.exists() else next(
            (p for p in target.parents if p.exists()), Path.cwd()
        )
        if not existing.is_dir():
            raise ConfigError(f"output directory is not a directory: {target}")
        if not os.access(existing, os.W_OK):
            raise ConfigError(f"output directory is not writable: {target}")


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a flat ``key = value`` file with ``#`` comments."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = dotenv_values(path, encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path} is not valid UTF-8 (byte offset {e.start})") from None
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        key = key.strip().lower()
        if value is None:
            raise ConfigError(f"{path}: key '{key}' has no value")
        if key not in PipelineConfig.model_fields:
            raise ConfigError(f"{path}: unknown key '{key}'")
        if key in _PATH_FIELDS and value and not Path(value).is_absolute():
            value = str(path.parent / value)
        values[key] = value
    logger.bind(path=str(path), keys=sorted(values)).debug("Read config file")
    return values


@dataclass
class PipelineState:
    """Shared state passed between pipeline stages; every field is a graph channel."""

    config: PipelineConfig
    work_dir: Optional[Path] = None

    table: Any = None
    meta: Any = None
    conversion_report: Any = None
    ko_map: Any = None
    results: Dict[str, list] = field(default_factory=dict)
    consensus_tables: list = field(default_factory=list)
    annotations: Dict[str, Any] = field(default_factory=dict)
    reference_data: Dict[str, str] = field(default_factory=dict)

    artifacts: Dict[str, Path] = field(default_factory=dict)
    stage_history: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    success: bool = False

    def enter_stage(self, name: str) -> None:
        self.stage_history.append(name)
        logger.bind(stage=name).info("Executing stage")

    def add_artifact(self, name: str, path: Path) -> None:
        self.artifacts[name] = path

    def add_error(self, error: str) -> None:
        self.errors.append(error)
        logger.bind(stage=self.stage_history[-1] if self.stage_history else None).error(error)
