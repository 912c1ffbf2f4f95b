from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from regimerisk.models.dist_model import DistFamily, DistSpec, SHAPED_FAMILIES, SKEWED_FAMILIES
from regimerisk.models.types import FloatArray


class ArmaEgarchOrders(BaseModel):
    """
    Orders of the ARMA mean and eGARCH variance equations.

    `p_var` counts the shock lags (alpha, gamma), `q_var` the log-variance lags (beta).
    """
    model_config = ConfigDict(frozen=True)

    p_mean: int = Field(1, ge=0)
    q_mean: int = Field(1, ge=0)
    p_var: int = Field(2, ge=0)
    q_var: int = Field(2, ge=0)

    @property
    def max_lag(self) -> int:
        return max(self.p_mean, self.q_mean, self.p_var, self.q_var)


class ArmaEgarchSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    orders: ArmaEgarchOrders = Field(default_factory=ArmaEgarchOrders)
    family: DistFamily = "skew_student_t"


class ArmaEgarchParams(BaseModel):
    """
    Parameters of r_t = mu_t + y_t, y_t = sqrt(h_t) z_t with

        mu_t     = mu0 + sum phi_j r_{t-j} + sum theta_j y_{t-j}
        log h_t  = omega + sum (alpha_j eps_{t-j} + gamma_j (|eps_{t-j}| - E|eps|)) + sum beta_j log h_{t-j}

    alpha multiplies the signed shock (leverage), gamma the centred magnitude.
    """
    model_config = ConfigDict(frozen=True)

    mu0: float = 0.0
    phi: List[float] = Field(default_factory=list)
    theta: List[float] = Field(default_factory=list)
    omega: float = 0.0
    alpha: List[float] = Field(default_factory=list)
    gamma: List[float] = Field(default_factory=list)
    beta: List[float] = Field(default_factory=list)
    dist: DistSpec = Field(default_factory=DistSpec)

    @model_validator(mode="after")
    def _check_orders(self) -> "ArmaEgarchParams":
        if len(self.alpha) != len(self.gamma):
            raise ValueError("alpha and gamma must have the same length (shock lags).")
        return self

    @property
    def orders(self) -> ArmaEgarchOrders:
        return ArmaEgarchOrders(p_mean=len(self.phi), q_mean=len(self.theta),
                                p_var=len(self.alpha), q_var=len(self.beta))

    @property
    def persistence(self) -> float:
        return float(np.sum(self.beta))

    def parameter_names(self) -> List[str]:
        names = ["mu"]
        names += [f"phi_{j + 1}" for j in range(len(self.phi))]
        names += [f"theta_{j + 1}" for j in range(len(self.theta))]
        names += ["omega"]
        names += [f"alpha_{j + 1}" for j in range(len(self.alpha))]
        names += [f"beta_{j + 1}" for j in range(len(self.beta))]
        names += [f"gamma_{j + 1}" for j in range(len(self.gamma))]
        if self.dist.family in SKEWED_FAMILIES:
            names.append("skew")
        if self.dist.family in SHAPED_FAMILIES:
            names.append("shape")
        return names

    def to_vector(self) -> np.ndarray:
        """
        Flatten to the natural-scale vector ordered as `parameter_names`.
        """
        values = [self.mu0, *self.phi, *self.theta, self.omega, *self.alpha, *self.beta, *self.gamma]
        if self.dist.family in SKEWED_FAMILIES:
            values.append(self.dist.skew)
        if self.dist.family in SHAPED_FAMILIES:
            values.append(self.dist.shape)
        return np.asarray(values, dtype=float)

    @classmethod
    def from_vector(cls, vector: np.ndarray, orders: ArmaEgarchOrders, family: str) -> "ArmaEgarchParams":
        """
        Rebuild parameters from a natural-scale vector.

        Args:
            vector (np.ndarray): Values ordered as `parameter_names`.
            orders (ArmaEgarchOrders): The model orders.
            family (str): The innovation family.

        Returns:
            ArmaEgarchParams: The parameters.
        """
        vector = np.asarray(vector, dtype=float)
        position = 0

        def take(count: int) -> List[float]:
            nonlocal position
            chunk = vector[position:position + count].tolist()
            position += count
            return chunk

        mu0 = take(1)[0]
        phi = take(orders.p_mean)
        theta = take(orders.q_mean)
        omega = take(1)[0]
        alpha = take(orders.p_var)
        beta = take(orders.q_var)
        gamma = take(orders.p_var)
        skew = take(1)[0] if family in SKEWED_FAMILIES else 1.0
        shape = take(1)[0] if family in SHAPED_FAMILIES else None
        return cls(mu0=mu0, phi=phi, theta=theta, omega=omega, alpha=alpha, gamma=gamma, beta=beta,
                   dist=DistSpec(family=family, skew=skew, shape=shape))

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "ArmaEgarchParams":
        """
        Parameters of a fit serialized by `UnivariateFit.to_dict`.
        """
        orders = ArmaEgarchOrders(**payload["orders"])
        return cls.from_vector([row["estimate"] for row in payload["parameters"]], orders, payload["dist"]["family"])


class FilterOutput(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu: FloatArray
    h: FloatArray
    z: FloatArray
    loglik: float

    @property
    def residuals(self) -> np.ndarray:
        return self.z * np.sqrt(self.h)


class OptimizerDiagnostics(BaseModel):
    converged: bool
    message: str = ""
    iterations: int = 0
    evaluations: int = 0
    objective: float = float("nan")
    start_index: int = 0
    hessian_ok: bool = True
    boundary: List[str] = Field(default_factory=list)


class UnivariateFit(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ticker: Optional[str] = None
    params: ArmaEgarchParams
    filter: FilterOutput
    se: FloatArray
    pvalues: FloatArray
    convergence: OptimizerDiagnostics
    nobs: int
    information_criteria: Dict[str, float] = Field(default_factory=dict)
    selection: Dict[str, Dict[str, float]] = Field(default_factory=dict)

    def table_rows(self) -> List[Tuple[str, float, float, float]]:
        """
        Rows of (parameter, estimate, standard error, p-value) in report order.
        """
        names = self.params.parameter_names()
        estimates = self.params.to_vector()
        return [(name, float(estimate), float(se), float(pvalue))
                for name, estimate, se, pvalue in zip(names, estimates, self.se, self.pvalues)]

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "ticker": self.ticker,
            "nobs": self.nobs,
            "dist": self.params.dist.to_dict(),
            "orders": self.params.orders.model_dump(),
            "parameters": [
                {"parameter": name, "estimate": estimate, "se": se, "pvalue": pvalue}
                for name, estimate, se, pvalue in self.table_rows()
            ],
            "loglik": self.filter.loglik,
            "information_criteria": self.information_criteria,
            "convergence": self.convergence.model_dump(),
        }
        if self.selection:
            payload["selection"] = self.selection
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any], filter: FilterOutput) -> "UnivariateFit":
        """
        Rebuild a fit written by `to_dict`; the filter output is recomputed by the caller.
        """
        rows = payload["parameters"]
        params = ArmaEgarchParams.from_payload(payload)
        return cls(
            ticker=payload.get("ticker"),
            params=params,
            filter=filter,
            se=np.asarray([row["se"] for row in rows], dtype=float),
            pvalues=np.asarray([row["pvalue"] for row in rows], dtype=float),
            convergence=OptimizerDiagnostics(**payload["convergence"]),
            nobs=payload["nobs"],
            information_criteria=payload.get("information_criteria", {}),
            selection=payload.get("selection", {}),
        )
