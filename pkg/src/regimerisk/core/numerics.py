"""
regimerisk.core.numerics
~~~~~~~~~~~~~~~~~~~~~~~~
Maximum-likelihood helpers shared by the marginal and the correlation fits.

Functions:
    - multistart_minimize: L-BFGS-B from several starts, best objective wins.
    - hessian_standard_errors: Standard errors from the inverse numerical Hessian.
    - information_criteria_from_loglik: AIC, BIC, Hannan-Quinn and Shibata criteria.
"""
import logging
import warnings
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special
from statsmodels.tools.numdiff import approx_hess

logger = logging.getLogger(__name__)


def multistart_minimize(objective: Callable[[np.ndarray], float], starts: Sequence[np.ndarray],
                        bounds: List[Tuple[Optional[float], Optional[float]]], maxiter: int = 2000,
                        tol: float = 1e-8) -> Tuple[optimize.OptimizeResult, int]:
    """
    Minimize from each start and keep the lowest finite objective. Ties go to the earlier start.

    Args:
        objective (Callable): Function of the working-space vector.
        starts (Sequence[np.ndarray]): Starting points, clipped into the bounds.
        bounds (list): Box constraints per coordinate.
        maxiter (int): Iteration cap per start.
        tol (float): Objective tolerance.

    Returns:
        Tuple[OptimizeResult, int]: The best result and the index of its start.
    """
    lower = np.array([-np.inf if low is None else low for low, _ in bounds])
    upper = np.array([np.inf if high is None else high for _, high in bounds])
    best, best_index = None, -1
    for index, start in enumerate(starts):
        x0 = np.clip(np.asarray(start, dtype=float), lower, upper)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = optimize.minimize(objective, x0, method="L-BFGS-B", bounds=bounds,
                                       options={"maxiter": maxiter, "ftol": tol, "gtol": 1e-6})
        logger.debug("start %d: objective=%.10g success=%s nit=%d", index, result.fun, result.success, result.nit)
        if not np.isfinite(result.fun):
            continue
        if best is None or result.fun < best.fun:
            best, best_index = result, index
    if best is None:
        best = result
        best_index = len(starts) - 1
    return best, best_index


def hessian_standard_errors(neg_loglik: Callable[[np.ndarray], float],
                            estimate: np.ndarray) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Standard errors and two-sided normal p-values from the numerical Hessian of the summed
    negative log-likelihood at the estimate (natural parameter scale).

    Args:
        neg_loglik (Callable): Summed negative log-likelihood of the natural parameters.
        estimate (np.ndarray): The estimate.

    Returns:
        Tuple[np.ndarray, np.ndarray, bool]: se, p-values and whether the Hessian was positive
        definite. When it is not, se and p-values are NaN.
    """
    estimate = np.asarray(estimate, dtype=float)
    unavailable = np.full(estimate.shape, np.nan)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            hessian = approx_hess(estimate, neg_loglik)
        except (ValueError, FloatingPointError, ArithmeticError) as e:
            logger.warning("Numerical Hessian failed: %s", e)
            return unavailable, unavailable.copy(), False
    if not np.all(np.isfinite(hessian)):
        return unavailable, unavailable.copy(), False
    hessian = 0.5 * (hessian + hessian.T)
    try:
        np.linalg.cholesky(hessian)
    except np.linalg.LinAlgError:
        logger.warning("Hessian is not positive definite; standard errors unavailable")
        return unavailable, unavailable.copy(), False
    covariance = np.linalg.inv(hessian)
    se = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    return se, two_sided_pvalues(estimate, se), True


def two_sided_pvalues(estimate: np.ndarray, se: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        statistic = np.abs(np.asarray(estimate) / np.asarray(se))
    pvalues = 2.0 * special.ndtr(-statistic)
    return np.where(np.isfinite(se), np.nan_to_num(pvalues, nan=1.0), np.nan)


def information_criteria_from_loglik(loglik: float, n_params: int, nobs: int) -> Dict[str, float]:
    """
    Information criteria on the summed log-likelihood (smaller is better).
    """
    k, n = float(n_params), float(nobs)
    deviance = -2.0 * loglik
    return {
        "aic": deviance + 2.0 * k,
        "bic": deviance + k * np.log(n),
        "hqic": deviance + 2.0 * k * np.log(np.log(n)),
        "shibata": deviance + n * np.log((n + 2.0 * k) / n),
    }
