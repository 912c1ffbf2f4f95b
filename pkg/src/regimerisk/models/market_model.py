from typing import Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator


Frequency = Literal["weekly", "daily"]


class InstrumentMeta(BaseModel):
    ticker: str
    name: Optional[str] = None
    country: Optional[str] = None
    total_assets_bn_usd: Optional[float] = Field(None, description="Total assets in billions of USD.")


class PriceTable(BaseModel):
    """
    Dated price matrix, one column per instrument. Missing quotes are NaN.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    prices: pd.DataFrame
    meta: Dict[str, InstrumentMeta] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_invariants(self) -> "PriceTable":
        index = self.prices.index
        if not isinstance(index, pd.DatetimeIndex):
            raise ValueError("prices must be indexed by a DatetimeIndex")
        if not index.is_monotonic_increasing or index.has_duplicates:
            raise ValueError("price dates must be strictly increasing")
        values = self.prices.to_numpy(dtype=float)
        observed = values[~np.isnan(values)]
        if np.any(observed <= 0):
            raise ValueError("every observed price must be strictly positive")
        return self

    @property
    def dates(self) -> List[pd.Timestamp]:
        return list(self.prices.index)

    @property
    def tickers(self) -> List[str]:
        return [str(column) for column in self.prices.columns]

    @property
    def shape(self):
        return self.prices.shape


class ReturnPanel(BaseModel):
    """
    Dated log-return matrix r[t, i]. A panel produced by `align` has no missing cells.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    returns: pd.DataFrame
    frequency: Frequency = "weekly"

    @property
    def dates(self) -> List[pd.Timestamp]:
        return list(self.returns.index)

    @property
    def tickers(self) -> List[str]:
        return [str(column) for column in self.returns.columns]

    @property
    def values(self) -> np.ndarray:
        return self.returns.to_numpy(dtype=float)

    @property
    def is_complete(self) -> bool:
        return not self.returns.isna().to_numpy().any()

    def column(self, ticker: str) -> np.ndarray:
        if ticker not in self.returns.columns:
            raise KeyError(f"Ticker '{ticker}' is not in the return panel.")
        return self.returns[ticker].to_numpy(dtype=float)

    def select(self, tickers: List[str]) -> "ReturnPanel":
        return ReturnPanel(returns=self.returns.loc[:, tickers], frequency=self.frequency)
