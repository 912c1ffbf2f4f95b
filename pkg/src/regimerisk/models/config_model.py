"""
regimerisk.models.config_model
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Run configuration for the two-stage pipeline. A single JSON file drives a whole run; CLI
flags override `output_dir`, `seed` and `force`.

Classes:
    - PipelineConfig: Root configuration model.
"""
import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union, get_args

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from regimerisk.exceptions import ConfigError
from regimerisk.models.cluster_model import ClusterMethod
from regimerisk.models.copula_model import CopulaFamily
from regimerisk.models.dcc_model import ScoreSource
from regimerisk.models.dist_model import DistFamily
from regimerisk.models.garch_model import ArmaEgarchOrders
from regimerisk.models.market_model import Frequency
from regimerisk.models.risk_model import RiskLevels

SelectionCriterion = Literal["aic", "bic", "hqic", "shibata"]


class DataConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    prices_path: str
    format: Literal["wide", "long"] = "wide"
    frequency: Frequency = "weekly"
    meta_path: Optional[str] = None


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    orders: ArmaEgarchOrders = Field(default_factory=ArmaEgarchOrders)
    dist_family: Union[DistFamily, Literal["auto"]] = "skew_student_t"
    dist_candidates: List[DistFamily] = Field(default_factory=lambda: list(get_args(DistFamily)))
    dist_criterion: SelectionCriterion = "bic"
    copula_family: Union[CopulaFamily, Literal["auto"]] = "student"
    copula_candidates: List[CopulaFamily] = Field(default_factory=lambda: list(get_args(CopulaFamily)))
    copula_criterion: SelectionCriterion = "aic"
    dcc_order: Tuple[int, int] = (1, 1)
    score_source: ScoreSource = "copula"

    @field_validator("dist_candidates", "copula_candidates")
    @classmethod
    def _check_candidates(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one candidate family is required.")
        return list(dict.fromkeys(value))

    def margin_settings(self) -> list:
        """
        The settings a fitted margin depends on; the candidates only matter under "auto".
        """
        if self.dist_family == "auto":
            return ["auto", self.dist_candidates, self.dist_criterion]
        return [self.dist_family]

    def copula_settings(self) -> list:
        if self.copula_family == "auto":
            return ["auto", self.copula_candidates, self.copula_criterion]
        return [self.copula_family]

    @field_validator("dcc_order")
    @classmethod
    def _check_dcc_order(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] < 1 or value[1] < 0:
            raise ValueError("DCC order must have m >= 1 and n >= 0.")
        return value


class ClusteringConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    methods: List[ClusterMethod] = Field(default_factory=lambda: ["ward", "pam", "kmeans"])
    k_range: List[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6])
    restarts: int = Field(10, ge=1)
    metric: str = "euclidean"
    log_features: bool = False

    @field_validator("k_range")
    @classmethod
    def _check_k_range(cls, value: List[int]) -> List[int]:
        if not value or min(value) < 2:
            raise ValueError("k_range must be non-empty with every k >= 2.")
        return sorted(set(value))


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    starts: int = Field(3, ge=1, le=3)
    maxiter: int = Field(2000, ge=1)
    tol: float = Field(1e-8, gt=0.0)


class LoggingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    json_format: bool = Field(False, alias="json")
    file: Optional[str] = None


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    data: DataConfig
    index_ticker: str
    insurer_tickers: List[str] = Field(default_factory=list)
    panel_tickers: Optional[List[str]] = Field(
        None, description="Instruments of the stage-1 panel; defaults to the insurers.")
    model: ModelConfig = Field(default_factory=ModelConfig)
    clustering: ClusteringConfig = Field(default_factory=ClusteringConfig)
    risk: RiskLevels = Field(default_factory=RiskLevels)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    seed: int = 12345
    output_dir: str = "out"
    workers: int = Field(1, ge=1)
    force: bool = False

    @model_validator(mode="after")
    def _check_tickers(self) -> "PipelineConfig":
        if self.index_ticker in self.insurer_tickers:
            raise ValueError(f"Index ticker '{self.index_ticker}' must not be one of the insurers.")
        if len(set(self.insurer_tickers)) != len(self.insurer_tickers):
            raise ValueError("Insurer tickers must be unique.")
        return self

    @property
    def stage1_tickers(self) -> List[str]:
        if self.panel_tickers:
            return list(self.panel_tickers)
        return list(self.insurer_tickers) or [self.index_ticker]

    @property
    def all_tickers(self) -> List[str]:
        return list(dict.fromkeys([*self.stage1_tickers, self.index_ticker, *self.insurer_tickers]))

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude={"output_dir", "force", "workers", "logging"})
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()

    @classmethod
    def load(cls, path: Union[str, Path], **overrides) -> "PipelineConfig":
        """
        Load a configuration file and apply overrides.

        Args:
            path (str | Path): Path to the JSON configuration.
            **overrides: Top-level keys to override; None values are ignored.

        Returns:
            PipelineConfig: The validated configuration.

        Raises:
            ConfigError: If the file is missing, unparsable or invalid.
        """
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Configuration file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Configuration file {path} is not valid JSON: {e}")
        payload.update({key: value for key, value in overrides.items() if value is not None})
        base_dir = path.parent
        data = payload.get("data", {})
        for key in ("prices_path", "meta_path"):
            if data.get(key) and not Path(data[key]).is_absolute():
                data[key] = str(base_dir / data[key])
        return cls.from_dict(payload)

    @classmethod
    def from_dict(cls, payload: dict) -> "PipelineConfig":
        try:
            return cls.model_validate(payload)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}")
