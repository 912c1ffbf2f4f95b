from typing import Any, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from regimerisk.models.types import FloatArray, IntArray


ClusterMethod = Literal["ward", "kmeans", "pam"]
INDEX_NAMES = ("silhouette", "calinski_harabasz", "dunn", "xie_beni")
INDEX_LABELS = {
    "silhouette": "Silhouette",
    "calinski_harabasz": "Calinski Harabasz index",
    "dunn": "Dunn index",
    "xie_beni": "Xie-Beni index",
}


class FeatureMatrix(BaseModel):
    """
    Conditional variances h[t, i], one row per period, one column per instrument.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dates: List[pd.Timestamp]
    tickers: List[str]
    values: FloatArray

    @model_validator(mode="after")
    def _check_values(self) -> "FeatureMatrix":
        if self.values.ndim != 2:
            raise ValueError("Feature values must be a 2-D matrix.")
        if self.values.shape != (len(self.dates), len(self.tickers)):
            raise ValueError("Feature matrix dimensions must match dates x tickers.")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise ValueError("Conditional variances must be finite and strictly positive.")
        return self

    def transformed(self, log_features: bool) -> np.ndarray:
        return np.log(self.values) if log_features else self.values


class Partition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: IntArray
    k: int
    method: ClusterMethod
    centers: Optional[FloatArray] = None
    medoids: Optional[List[int]] = None
    dates: Optional[List[pd.Timestamp]] = None
    wss: float = float("nan")
    wss_history: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_labels(self) -> "Partition":
        present = set(np.unique(self.labels).tolist())
        if present != set(range(1, self.k + 1)):
            raise ValueError("Labels must cover 1..k with every cluster non-empty.")
        return self

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def to_frame(self) -> pd.DataFrame:
        index = pd.DatetimeIndex(self.dates, name="date") if self.dates is not None else None
        return pd.DataFrame({"label": self.labels}, index=index)


class ValidityEntry(BaseModel):
    method: ClusterMethod
    k: int
    silhouette: float
    calinski_harabasz: float
    dunn: float
    xie_beni: float


class ValidityReport(BaseModel):
    entries: List[ValidityEntry] = Field(default_factory=list)

    def methods(self) -> List[str]:
        return list(dict.fromkeys(entry.method for entry in self.entries))

    def k_values(self) -> List[int]:
        return sorted({entry.k for entry in self.entries})

    def get(self, method: str, k: int) -> ValidityEntry:
        for entry in self.entries:
            if entry.method == method and entry.k == k:
                return entry
        raise KeyError(f"No validity entry for method '{method}' and k={k}.")

    def best_k(self, method: str, index: str) -> int:
        """
        Optimal cluster count for one method under one criterion. Xie-Beni is minimised,
        the other indices maximised.
        """
        candidates = [entry for entry in self.entries if entry.method == method]
        if index == "xie_beni":
            return min(candidates, key=lambda entry: (entry.xie_beni, entry.k)).k
        return max(candidates, key=lambda entry: (getattr(entry, index), -entry.k)).k

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()
