from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from regimerisk.models.cluster_model import FeatureMatrix, Partition, ValidityReport
from regimerisk.models.dcc_model import DccFit
from regimerisk.models.garch_model import UnivariateFit
from regimerisk.models.market_model import InstrumentMeta, ReturnPanel
from regimerisk.models.risk_model import CoVaRSeries, RegimeSummary
from regimerisk.models.types import FloatArray


class IngestResult(BaseModel):
    """
    Log returns of every configured instrument on one common calendar.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    panel: ReturnPanel
    meta: Dict[str, InstrumentMeta] = Field(default_factory=dict)
    data_hash: str

    @property
    def dates(self) -> List[pd.Timestamp]:
        return self.panel.dates


class DccResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    panel: Optional[DccFit] = None
    pairs: Dict[str, DccFit] = Field(default_factory=dict)
    failures: Dict[str, str] = Field(default_factory=dict)


class RegimeResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: FeatureMatrix
    report: ValidityReport
    partition: Partition
    silhouette_widths: FloatArray


class CovarResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    series: Dict[str, CoVaRSeries] = Field(default_factory=dict)
    covar_summaries: Dict[str, RegimeSummary] = Field(default_factory=dict)
    pair_correlation_summaries: Dict[str, RegimeSummary] = Field(default_factory=dict)
    panel_correlation_summaries: Dict[str, RegimeSummary] = Field(default_factory=dict)
    variance_summaries: Dict[str, RegimeSummary] = Field(default_factory=dict)


class Stage1Artifacts(BaseModel):
    """
    Panel margins and correlation model, the variance features and the identified regimes.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ingest: IngestResult
    margins: Dict[str, UnivariateFit]
    panel_dcc: Optional[DccFit] = None
    regimes: RegimeResult


class Stage2Artifacts(BaseModel):
    """
    Bivariate index/insurer fits, CoVaR paths and per-regime summaries.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pair_fits: Dict[str, DccFit] = Field(default_factory=dict)
    covar: CovarResult = Field(default_factory=CovarResult)
    failures: Dict[str, str] = Field(default_factory=dict)


class Manifest(BaseModel):
    config_hash: str
    data_hash: Optional[str] = None
    versions: Dict[str, str] = Field(default_factory=dict)
    stages: List[str] = Field(default_factory=list)
    files: List[str] = Field(default_factory=list)
    failures: Dict[str, str] = Field(default_factory=dict)
