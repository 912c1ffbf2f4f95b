from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from regimerisk.models.types import FloatArray, Probability


class RiskLevels(BaseModel):
    """
    alpha: distress level of the conditioning institution j; beta: CoVaR level of i.
    """
    model_config = ConfigDict(frozen=True)

    alpha: Probability = 0.05
    beta: Probability = 0.05


class CoVaRSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dates: List[pd.Timestamp]
    values: FloatArray
    var_j: FloatArray
    rho: FloatArray
    u_star: FloatArray
    pair: Tuple[str, str]
    levels: RiskLevels

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"covar": self.values, "var_j": self.var_j, "rho_t": self.rho},
            index=pd.DatetimeIndex(self.dates, name="date"),
        )


class RegimeStatistics(BaseModel):
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "RegimeStatistics":
        values = np.asarray(values, dtype=float)
        q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
        return cls(count=int(values.size), mean=float(values.mean()), median=float(median),
                   q1=float(q1), q3=float(q3), min=float(values.min()), max=float(values.max()))


class RegimeSummary(BaseModel):
    """
    Distribution of one measure per regime, keyed by regime id.
    """
    measure: str
    regimes: Dict[int, RegimeStatistics]

    def to_dict(self) -> Dict[str, Any]:
        return {"measure": self.measure,
                "regimes": {str(label): stats.model_dump() for label, stats in self.regimes.items()}}
