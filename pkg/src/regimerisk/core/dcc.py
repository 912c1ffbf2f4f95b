"""
regimerisk.core.dcc
~~~~~~~~~~~~~~~~~~~
DCC(m, n) correlation dynamics and the second step of the two-step (margins first) copula
estimation.

    Q_t = (1 - sum c - sum d) Qbar + sum_j c_j eps_{t-j} eps_{t-j}' + sum_j d_j Q_{t-j}
    R_t = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}

Before the sample both eps eps' and Q equal Qbar, so Q_1 = Qbar. Qbar is set by correlation
targeting on the scores that drive the recursion: copula scores of the PIT panel by default,
or the GARCH standardized residuals.

Functions:
    - dcc_filter, dcc_path, dcc_copula_loglik, fit_dcc, simulate_dcc
    - select_copula_family, conditional_covariance
    - clamp_pit, dcc_scores, correlation_target
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from scipy import special

from regimerisk.core.copula import copula_logdensity_path
from regimerisk.core.numerics import (
    hessian_standard_errors,
    information_criteria_from_loglik,
    multistart_minimize,
)
from regimerisk.exceptions import InvalidParameterError, NonFiniteLikelihoodError, NotPositiveDefiniteError
from regimerisk.models.config_model import OptimizerConfig
from regimerisk.models.copula_model import CopulaFamily, CopulaSpec
from regimerisk.models.dcc_model import CorrelationPath, DccDiagnostics, DccFit, DccParams, ScoreSource

logger = logging.getLogger(__name__)

PIT_FLOOR = 1e-10
MIN_RECOMMENDED_OBS = 200
MAX_SHAPE = 100.0
MIN_SHAPE_EXCESS = 0.05
FAILED_OBJECTIVE = 1e10


@njit(cache=True)
def _q_step(t, eps, Q, qbar, intercept, c, d):
    k = qbar.shape[0]
    q = intercept.copy()
    for j in range(c.shape[0]):
        lag = t - j - 1
        for a in range(k):
            for b in range(k):
                q[a, b] += c[j] * (eps[lag, a] * eps[lag, b] if lag >= 0 else qbar[a, b])
    for j in range(d.shape[0]):
        lag = t - j - 1
        for a in range(k):
            for b in range(k):
                q[a, b] += d[j] * (Q[lag, a, b] if lag >= 0 else qbar[a, b])
    return q


@njit(cache=True)
def _normalize(q):
    k = q.shape[0]
    r = np.empty_like(q)
    for a in range(k):
        for b in range(k):
            r[a, b] = q[a, b] / np.sqrt(q[a, a] * q[b, b])
        r[a, a] = 1.0
    return r


@njit(cache=True)
def _dcc_kernel(eps, qbar, c, d):
    T, k = eps.shape
    Q = np.empty((T, k, k))
    R = np.empty((T, k, k))
    intercept = (1.0 - c.sum() - d.sum()) * qbar
    for t in range(T):
        q = _q_step(t, eps, Q, qbar, intercept, c, d)
        Q[t] = q
        R[t] = _normalize(q)
    return Q, R


@njit(cache=True)
def _dcc_simulate_kernel(normals, mixing, qbar, c, d, score_scale):
    T, k = normals.shape
    Q = np.empty((T, k, k))
    R = np.empty((T, k, k))
    x = np.empty((T, k))
    eps = np.empty((T, k))
    intercept = (1.0 - c.sum() - d.sum()) * qbar
    for t in range(T):
        q = _q_step(t, eps, Q, qbar, intercept, c, d)
        Q[t] = q
        R[t] = _normalize(q)
        L = np.linalg.cholesky(R[t])
        z = L @ normals[t]
        for a in range(k):
            x[t, a] = z[a] / np.sqrt(mixing[t])
            eps[t, a] = x[t, a] * score_scale
    return x, Q, R


def clamp_pit(U: np.ndarray) -> np.ndarray:
    """
    Clamp PIT values to [1e-10, 1 - 1e-10], warning when any value moves.
    """
    U = np.asarray(U, dtype=float)
    clamped = np.clip(U, PIT_FLOOR, 1.0 - PIT_FLOOR)
    moved = int(np.count_nonzero(clamped != U))
    if moved:
        logger.warning("clamped %d PIT values to [%g, %g]", moved, PIT_FLOOR, 1.0 - PIT_FLOOR)
    return clamped


def dcc_scores(copula: CopulaSpec, U: np.ndarray) -> np.ndarray:
    """
    Recursion scores of a PIT panel: normal quantiles, or t_eta quantiles rescaled to unit variance.
    """
    if copula.family == "gaussian":
        return special.ndtri(U)
    eta = copula.shape
    return special.stdtrit(eta, U) * np.sqrt((eta - 2.0) / eta)


def correlation_target(scores: np.ndarray) -> np.ndarray:
    """
    Sample correlation of the scores with an exact unit diagonal.
    """
    scores = np.asarray(scores, dtype=float)
    target = np.atleast_2d(np.corrcoef(scores, rowvar=False))
    target = 0.5 * (target + target.T)
    np.fill_diagonal(target, 1.0)
    return target


def dcc_filter(params: DccParams, eps: np.ndarray) -> CorrelationPath:
    """
    Run the Q recursion over a complete T x k panel of scores.

    Args:
        params (DccParams): Scalars, Qbar and copula.
        eps (np.ndarray): Standardized residuals or copula scores, T x k.

    Returns:
        CorrelationPath: R_t and Q_t for every period.

    Raises:
        InvalidParameterError: If the panel width does not match Qbar.
    """
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    if eps.ndim != 2 or eps.shape[1] != params.dimension:
        raise InvalidParameterError(
            f"panel of shape {eps.shape} does not match a {params.dimension}-dimensional Qbar")
    if not np.all(np.isfinite(eps)):
        raise InvalidParameterError("panel must be complete and finite")
    Q, R = _dcc_kernel(eps, params.qbar_array, np.asarray(params.c, dtype=np.float64),
                       np.asarray(params.d, dtype=np.float64))
    return CorrelationPath(R=R, Q=Q)


def _recursion_input(params: DccParams, U: np.ndarray, score_source: ScoreSource,
                     residuals: Optional[np.ndarray]) -> np.ndarray:
    if score_source == "garch":
        if residuals is None:
            raise InvalidParameterError("score_source 'garch' requires the standardized residuals")
        return np.asarray(residuals, dtype=float)
    return dcc_scores(params.copula, U)


def dcc_copula_loglik(params: DccParams, U: np.ndarray, score_source: ScoreSource = "copula",
                      residuals: Optional[np.ndarray] = None) -> float:
    """
    Summed copula log-density of a PIT panel under the DCC correlation path.

    Args:
        params (DccParams): The parameters.
        U (np.ndarray): PIT panel, T x k. Boundary values are clamped with a warning.
        score_source (str): "copula" (scores of U) or "garch" (standardized residuals drive Q).
        residuals (np.ndarray, optional): GARCH standardized residuals for "garch".

    Returns:
        float: The log-likelihood.
    """
    U = clamp_pit(U)
    path = dcc_filter(params, _recursion_input(params, U, score_source, residuals))
    return float(np.sum(copula_logdensity_path(params.copula, U, path.R)))


def _unpack(x: np.ndarray, m: int, n: int, family: CopulaFamily) -> Tuple[np.ndarray, np.ndarray, Optional[float]]:
    logits = np.exp(x[:m + n] - max(0.0, float(np.max(x[:m + n]))))
    weights = logits / (np.exp(-max(0.0, float(np.max(x[:m + n])))) + logits.sum())
    shape = 2.0 + float(np.exp(x[m + n])) if family == "student" else None
    return weights[:m], weights[m:], shape


def _pack(c: Sequence[float], d: Sequence[float], shape: Optional[float]) -> np.ndarray:
    weights = np.asarray([*c, *d], dtype=float)
    rest = 1.0 - weights.sum()
    x = list(np.log(weights / rest))
    if shape is not None:
        x.append(np.log(shape - 2.0))
    return np.asarray(x, dtype=float)


class _DccObjective:
    """
    Likelihood of (c, d, eta) with Qbar re-targeted whenever the scores change with eta.
    """

    def __init__(self, U: np.ndarray, family: CopulaFamily, score_source: ScoreSource,
                 residuals: Optional[np.ndarray]):
        self.U = U
        self.family = family
        self.score_source = score_source
        self.residuals = None if residuals is None else np.asarray(residuals, dtype=float)
        self._fixed_target = correlation_target(self.residuals) if score_source == "garch" else None

    def params(self, c: Sequence[float], d: Sequence[float], shape: Optional[float]) -> DccParams:
        copula = CopulaSpec(family=self.family, shape=shape)
        if self._fixed_target is not None:
            qbar = self._fixed_target
        else:
            qbar = correlation_target(dcc_scores(copula, self.U))
        return DccParams(c=list(map(float, c)), d=list(map(float, d)), qbar=qbar.tolist(), copula=copula)

    def loglik(self, params: DccParams) -> float:
        recursion = _recursion_input(params, self.U, self.score_source, self.residuals)
        path = dcc_filter(params, recursion)
        return float(np.sum(copula_logdensity_path(params.copula, self.U, path.R)))

    def natural(self, vector: np.ndarray, m: int) -> float:
        """
        Summed negative log-likelihood on the natural scale (c..., d..., eta).
        """
        n = len(vector) - m - (1 if self.family == "student" else 0)
        shape = float(vector[m + n]) if self.family == "student" else None
        try:
            return -self.loglik(self.params(vector[:m], vector[m:m + n], shape))
        except (ValueError, NotPositiveDefiniteError, NonFiniteLikelihoodError):
            return np.inf


def fit_dcc(U: np.ndarray, family: CopulaFamily = "student", order: Tuple[int, int] = (1, 1),
            opts: Optional[OptimizerConfig] = None, score_source: ScoreSource = "copula",
            residuals: Optional[np.ndarray] = None, seed: int = 0, tickers: Optional[List[str]] = None,
            attempt: int = 0) -> DccFit:
    """
    Maximum-likelihood fit of the DCC scalars and the Student shape with Qbar targeted.

    c and d are logistic weights, so c, d >= 0 and sum c + sum d < 1 hold by construction;
    eta = 2 + exp(b) is kept in (2, 100]. Standard errors come from the numerical Hessian on
    the natural scale.

    Args:
        U (np.ndarray): PIT panel, T x k.
        family (str): "gaussian" or "student".
        order (Tuple[int, int]): (m, n).
        opts (OptimizerConfig, optional): Optimizer settings.
        score_source (str): What drives the Q recursion.
        residuals (np.ndarray, optional): GARCH standardized residuals for score_source "garch".
        seed (int): Seed of the perturbed start.
        tickers (List[str], optional): Column names carried into the fit.
        attempt (int): Retry counter; each retry perturbs the starts.

    Returns:
        DccFit: Parameters, correlation path, standard errors and diagnostics.
    """
    opts = opts or OptimizerConfig()
    U = clamp_pit(np.atleast_2d(np.asarray(U, dtype=float)))
    T, k = U.shape
    m, n = order
    if m < 1 or n < 0:
        raise InvalidParameterError(f"invalid DCC order {order}")
    if T < MIN_RECOMMENDED_OBS:
        logger.warning("DCC panel has %d periods; at least %d are recommended", T, MIN_RECOMMENDED_OBS)
    objective_model = _DccObjective(U, family, score_source, residuals)

    def objective(x: np.ndarray) -> float:
        try:
            c, d, shape = _unpack(x, m, n, family)
            value = -objective_model.loglik(objective_model.params(c, d, shape)) / T
        except (ValueError, NotPositiveDefiniteError, NonFiniteLikelihoodError):
            return FAILED_OBJECTIVE
        return value if np.isfinite(value) else FAILED_OBJECTIVE

    def split(total: float, count: int) -> List[float]:
        return [total / count] * count if count else []

    shape_bounds = [(np.log(MIN_SHAPE_EXCESS), np.log(MAX_SHAPE - 2.0))] if family == "student" else []
    bounds = [(-20.0, 20.0)] * (m + n) + shape_bounds
    starts = [
        _pack(split(0.02, m), split(0.95, n), 8.0 if family == "student" else None),
        _pack(split(0.05, m), split(0.90, n), 15.0 if family == "student" else None),
    ]
    rng = np.random.default_rng([seed, attempt])
    starts.append(starts[0] + rng.normal(0.0, 0.1 * (1 + attempt), size=starts[0].size))
    if attempt:
        starts = [start + rng.normal(0.0, 0.1 * attempt, size=start.size) for start in starts]
    result, _ = multistart_minimize(objective, starts[:opts.starts], bounds, opts.maxiter, opts.tol)

    c, d, shape = _unpack(result.x, m, n, family)
    params = objective_model.params(c, d, shape)
    loglik = objective_model.loglik(params)
    path = dcc_filter(params, _recursion_input(params, U, score_source, residuals))
    se, pvalues, hessian_ok = hessian_standard_errors(lambda v: objective_model.natural(v, m), params.to_vector())
    if not result.success:
        logger.warning("DCC fit did not converge (%s)", result.message)
    n_params = len(params.to_vector())
    diagnostics = DccDiagnostics(
        converged=bool(result.success),
        message=str(result.message),
        iterations=int(result.nit),
        loglik=loglik,
        nobs=T,
        hessian_ok=hessian_ok,
        score_source=score_source,
        information_criteria=information_criteria_from_loglik(loglik, n_params, T),
    )
    return DccFit(tickers=list(tickers or []), params=params, path=path, se=se, pvalues=pvalues,
                  diagnostics=diagnostics)


def select_copula_family(U: np.ndarray, families: Sequence[CopulaFamily] = ("gaussian", "student"),
                         order: Tuple[int, int] = (1, 1), opts: Optional[OptimizerConfig] = None,
                         seed: int = 0, criterion: str = "aic",
                         **kwargs) -> Tuple[DccFit, Dict[str, Dict[str, float]]]:
    """
    Fit each copula family and keep the one with the smallest information criterion.

    Returns:
        Tuple[DccFit, dict]: The selected fit and every family's criteria.
    """
    if not families:
        raise InvalidParameterError("at least one copula family is required")
    fits = {family: fit_dcc(U, family, order, opts, seed=seed, **kwargs) for family in families}
    table = {family: fit.diagnostics.information_criteria for family, fit in fits.items()}
    best = min(families, key=lambda family: table[family][criterion])
    logger.info("selected the %s copula by %s", best, criterion)
    return fits[best], table


def simulate_dcc(params: DccParams, n: int, seed: int, burn: int = 0) -> Tuple[np.ndarray, CorrelationPath]:
    """
    Simulate a PIT panel whose copula correlation follows the DCC recursion driven by its own
    copula scores.

    Args:
        params (DccParams): Scalars, Qbar and copula.
        n (int): Number of returned periods.
        seed (int): Seed of the numpy generator.
        burn (int): Discarded warm-up periods.

    Returns:
        Tuple[np.ndarray, CorrelationPath]: The n x k panel of uniforms and its R_t path.
    """
    if n < 1 or burn < 0:
        raise InvalidParameterError(f"invalid simulation length n={n}, burn={burn}")
    rng = np.random.default_rng(seed)
    total, k = n + burn, params.dimension
    normals = rng.standard_normal((total, k))
    copula = params.copula
    if copula.family == "student":
        mixing = rng.chisquare(copula.shape, size=total) / copula.shape
        score_scale = float(np.sqrt((copula.shape - 2.0) / copula.shape))
    else:
        mixing = np.ones(total)
        score_scale = 1.0
    x, Q, R = _dcc_simulate_kernel(normals, mixing, params.qbar_array, np.asarray(params.c, dtype=np.float64),
                                   np.asarray(params.d, dtype=np.float64), score_scale)
    U = special.ndtr(x) if copula.family == "gaussian" else special.stdtr(copula.shape, x)
    return U[burn:], CorrelationPath(R=R[burn:], Q=Q[burn:])


def conditional_covariance(h: np.ndarray, path: CorrelationPath) -> np.ndarray:
    """
    H_t = D_t R_t D_t with D_t = diag(sqrt(h_t)).

    Args:
        h (np.ndarray): Conditional variances, T x k.
        path (CorrelationPath): The correlation path.

    Returns:
        np.ndarray: T x k x k covariance matrices.
    """
    sd = np.sqrt(np.asarray(h, dtype=float))
    if sd.shape != path.R.shape[:2]:
        raise InvalidParameterError(f"variances of shape {sd.shape} do not match the path {path.R.shape}")
    return path.R * sd[:, :, None] * sd[:, None, :]


def dcc_path(params: DccParams, U: np.ndarray, score_source: ScoreSource = "copula",
             residuals: Optional[np.ndarray] = None) -> CorrelationPath:
    """
    Correlation path of a PIT panel under given parameters, with the same score handling as the fit.
    """
    U = clamp_pit(np.atleast_2d(np.asarray(U, dtype=float)))
    return dcc_filter(params, _recursion_input(params, U, score_source, residuals))
