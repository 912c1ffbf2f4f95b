from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from regimerisk.models.copula_model import CopulaSpec
from regimerisk.models.types import FloatArray


ScoreSource = Literal["copula", "garch"]


class DccParams(BaseModel):
    """
    Scalar DCC(m, n) parameters with the unconditional matrix Qbar and the copula.
    """
    model_config = ConfigDict(frozen=True)

    c: List[float] = Field(default_factory=lambda: [0.0])
    d: List[float] = Field(default_factory=lambda: [0.0])
    qbar: List[List[float]]
    copula: CopulaSpec = Field(default_factory=CopulaSpec)

    @model_validator(mode="after")
    def _check_invariants(self) -> "DccParams":
        if any(value < 0 for value in self.c) or any(value < 0 for value in self.d):
            raise ValueError("DCC scalars must be non-negative.")
        if sum(self.c) + sum(self.d) >= 1.0:
            raise ValueError("DCC scalars must satisfy sum(c) + sum(d) < 1.")
        qbar = np.asarray(self.qbar, dtype=float)
        if qbar.ndim != 2 or qbar.shape[0] != qbar.shape[1]:
            raise ValueError("Qbar must be a square matrix.")
        if not np.allclose(qbar, qbar.T, atol=1e-12):
            raise ValueError("Qbar must be symmetric.")
        if np.linalg.eigvalsh(qbar).min() < -1e-10:
            raise ValueError("Qbar must be positive semi-definite.")
        return self

    @property
    def order(self) -> Tuple[int, int]:
        return len(self.c), len(self.d)

    @property
    def dimension(self) -> int:
        return len(self.qbar)

    @property
    def qbar_array(self) -> np.ndarray:
        return np.asarray(self.qbar, dtype=float)

    def parameter_names(self) -> List[str]:
        names = [f"c_{j + 1}" for j in range(len(self.c))] + [f"d_{j + 1}" for j in range(len(self.d))]
        if self.copula.family == "student":
            names.append("shape")
        return names

    def to_vector(self) -> np.ndarray:
        values = [*self.c, *self.d]
        if self.copula.family == "student":
            values.append(self.copula.shape)
        return np.asarray(values, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {"c": list(self.c), "d": list(self.d), "qbar": [list(row) for row in self.qbar],
                "copula": self.copula.to_dict()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "DccParams":
        return cls(c=payload["c"], d=payload["d"], qbar=payload["qbar"], copula=CopulaSpec(**payload["copula"]))


class CorrelationPath(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    R: FloatArray
    Q: FloatArray

    def pair(self, i: int, j: int) -> np.ndarray:
        return self.R[:, i, j]

    def __len__(self) -> int:
        return self.R.shape[0]


class DccDiagnostics(BaseModel):
    converged: bool
    message: str = ""
    iterations: int = 0
    loglik: float = float("nan")
    nobs: int = 0
    hessian_ok: bool = True
    score_source: ScoreSource = "copula"
    information_criteria: Dict[str, float] = Field(default_factory=dict)


class DccFit(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tickers: List[str] = Field(default_factory=list)
    params: DccParams
    path: CorrelationPath
    se: FloatArray
    pvalues: FloatArray
    diagnostics: DccDiagnostics
    selection: Dict[str, Dict[str, float]] = Field(default_factory=dict)

    def table_rows(self) -> List[Tuple[str, float, float, float]]:
        names = self.params.parameter_names()
        return [(name, float(estimate), float(se), float(pvalue))
                for name, estimate, se, pvalue in zip(names, self.params.to_vector(), self.se, self.pvalues)]

    def to_dict(self, include_path: bool = False) -> Dict[str, Any]:
        payload = {
            "tickers": list(self.tickers),
            **self.params.to_dict(),
            "parameters": [
                {"parameter": name, "estimate": estimate, "se": se, "pvalue": pvalue}
                for name, estimate, se, pvalue in self.table_rows()
            ],
            "diagnostics": self.diagnostics.model_dump(),
        }
        if self.selection:
            payload["selection"] = self.selection
        if include_path:
            payload["R"] = self.path.R.tolist()
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any], path: Optional[CorrelationPath] = None) -> "DccFit":
        params = DccParams.from_dict(payload)
        rows = payload.get("parameters", [])
        if path is None:
            R = np.asarray(payload["R"], dtype=float)
            path = CorrelationPath(R=R, Q=R)
        return cls(
            tickers=payload.get("tickers", []),
            params=params,
            path=path,
            se=[row["se"] for row in rows],
            pvalues=[row["pvalue"] for row in rows],
            diagnostics=DccDiagnostics(**payload["diagnostics"]),
            selection=payload.get("selection", {}),
        )
