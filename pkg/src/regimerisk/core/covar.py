"""
regimerisk.core.covar
~~~~~~~~~~~~~~~~~~~~~
Value-at-Risk and copula CoVaR.

The CoVaR of the market i given the distress of institution j solves

    P(r_i <= CoVaR, r_j <= VaR_j(alpha)) = alpha * beta

which by Sklar's theorem becomes C_t(u*, alpha) = alpha * beta on the probability scale. The root
u* is found once per period and mapped through the market marginal quantile.

Functions:
    - conditional_var, solve_u_star, covar_at, covar_series
    - regime_summary, regime_correlation_summary
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize

from regimerisk.core.copula import bivariate_copula_cdf
from regimerisk.core.distributions import dist_quantile
from regimerisk.exceptions import ConvergenceError, DataError, InvalidParameterError, RootNotBracketedError
from regimerisk.models.cluster_model import Partition
from regimerisk.models.copula_model import CopulaSpec
from regimerisk.models.dcc_model import CorrelationPath, DccFit
from regimerisk.models.dist_model import DistSpec
from regimerisk.models.garch_model import UnivariateFit
from regimerisk.models.risk_model import CoVaRSeries, RegimeStatistics, RegimeSummary, RiskLevels

logger = logging.getLogger(__name__)

ROOT_LOWER = 1e-12
ROOT_UPPER = 1.0 - 1e-12
ROOT_XTOL = 1e-12
MAX_RESIDUAL = 1e-10


def conditional_var(mu: Union[float, np.ndarray], h: Union[float, np.ndarray], dist: DistSpec,
                    alpha: float) -> Union[float, np.ndarray]:
    """
    VaR = mu + sqrt(h) * q(alpha) under the standardized innovation law.

    Raises:
        InvalidParameterError: If alpha is outside (0, 1) or a variance is not positive.
    """
    h_arr = np.asarray(h, dtype=float)
    if np.any(~(h_arr > 0)):
        raise InvalidParameterError("Conditional variances must be strictly positive.")
    value = np.asarray(mu, dtype=float) + np.sqrt(h_arr) * dist_quantile(dist, alpha)
    return float(value) if np.ndim(value) == 0 else value


def solve_u_star(copula: CopulaSpec, rho: float, levels: RiskLevels) -> float:
    """
    Solve C(u, alpha) = alpha * beta for u.

    Args:
        copula (CopulaSpec): The copula family.
        rho (float): Pair correlation at t.
        levels (RiskLevels): Distress and CoVaR levels.

    Returns:
        float: The root u*.

    Raises:
        RootNotBracketedError: If the equation has no sign change on the search interval.
        ConvergenceError: If the residual at the root exceeds 1e-10.
    """
    alpha, beta = levels.alpha, levels.beta
    if copula.family == "gaussian" and rho == 0.0:
        return float(beta)
    target = alpha * beta

    def equation(u: float) -> float:
        return bivariate_copula_cdf(copula, u, alpha, rho) - target

    low, high = equation(ROOT_LOWER), equation(ROOT_UPPER)
    if low * high > 0:
        raise RootNotBracketedError(
            f"CoVaR equation not bracketed for rho={rho}: f({ROOT_LOWER})={low}, f({ROOT_UPPER})={high}")
    u_star = optimize.brentq(equation, ROOT_LOWER, ROOT_UPPER, xtol=ROOT_XTOL)
    residual = abs(equation(u_star))
    if residual >= MAX_RESIDUAL:
        raise ConvergenceError(f"CoVaR root residual {residual:.3e} for rho={rho}")
    return float(u_star)


def covar_at(copula: CopulaSpec, rho: float, mu: float, h: float, dist: DistSpec,
             levels: RiskLevels) -> float:
    """
    CoVaR of the market at one period: mu + sqrt(h) * q(u*).
    """
    return conditional_var(mu, h, dist, solve_u_star(copula, rho, levels))


def covar_series(dcc_fit: DccFit, index_fit: UnivariateFit, insurer_fit: UnivariateFit,
                 dates: Sequence[pd.Timestamp], levels: Optional[RiskLevels] = None) -> CoVaRSeries:
    """
    CoVaR path of the market conditional on one insurer's distress.

    Args:
        dcc_fit (DccFit): Bivariate fit with the market first and the insurer second.
        index_fit (UnivariateFit): Marginal fit of the market.
        insurer_fit (UnivariateFit): Marginal fit of the insurer.
        dates (Sequence[pd.Timestamp]): Period dates of the pair panel.
        levels (RiskLevels): Distress and CoVaR levels.

    Returns:
        CoVaRSeries: CoVaR, the insurer VaR, the pair correlation and the roots per period.
    """
    levels = levels or RiskLevels()
    rho = dcc_fit.path.pair(0, 1)
    T = rho.shape[0]
    if len(dates) != T:
        raise DataError(f"Expected {T} dates, got {len(dates)}.")
    if index_fit.filter.h.shape[0] != T or insurer_fit.filter.h.shape[0] != T:
        raise DataError("Marginal filters and the correlation path are not aligned.")
    u_star = np.empty(T)
    cache: Dict[float, float] = {}
    for t in range(T):
        key = float(rho[t])
        if key not in cache:
            cache[key] = solve_u_star(dcc_fit.params.copula, key, levels)
        u_star[t] = cache[key]
    values = index_fit.filter.mu + np.sqrt(index_fit.filter.h) * dist_quantile(index_fit.params.dist, u_star)
    var_j = conditional_var(insurer_fit.filter.mu, insurer_fit.filter.h, insurer_fit.params.dist, levels.alpha)
    pair = tuple(dcc_fit.tickers[:2]) if len(dcc_fit.tickers) >= 2 else (index_fit.ticker, insurer_fit.ticker)
    logger.debug(f"CoVaR for {pair}: {len(cache)} distinct correlation values solved")
    return CoVaRSeries(dates=list(dates), values=values, var_j=np.atleast_1d(var_j), rho=rho, u_star=u_star,
                       pair=pair, levels=levels)


def _measure_frame(values: Union[CoVaRSeries, np.ndarray, pd.Series], dates: Optional[Sequence]) -> pd.Series:
    if isinstance(values, CoVaRSeries):
        return pd.Series(values.values, index=pd.DatetimeIndex(values.dates))
    if isinstance(values, pd.Series):
        return values
    values = np.asarray(values, dtype=float)
    return pd.Series(values, index=pd.DatetimeIndex(dates) if dates is not None else None)


def regime_summary(values: Union[CoVaRSeries, np.ndarray, pd.Series], partition: Partition,
                   measure: str = "covar", dates: Optional[Sequence] = None) -> RegimeSummary:
    """
    Per-regime count, mean, median, quartiles and range of a measure.

    Dated inputs are matched to the partition on common dates; undated inputs must have the
    partition's length.

    Args:
        values (CoVaRSeries | np.ndarray | pd.Series): The measure.
        partition (Partition): Regime labels.
        measure (str): Name reported in the summary.
        dates (Sequence): Dates of a plain array.

    Returns:
        RegimeSummary: Statistics keyed by regime id.

    Raises:
        DataError: If the inputs do not align or a regime has no observation.
    """
    series = _measure_frame(values, dates)
    if isinstance(series.index, pd.DatetimeIndex) and partition.dates is not None:
        labels = partition.to_frame()["label"]
        joined = pd.concat([series.rename("value"), labels], axis=1, join="inner")
        measure_values, label_values = joined["value"].to_numpy(float), joined["label"].to_numpy(int)
    else:
        if len(series) != partition.labels.shape[0]:
            raise DataError(f"Measure of length {len(series)} does not match {partition.labels.shape[0]} labels.")
        measure_values, label_values = series.to_numpy(float), partition.labels
    regimes = {}
    for label in range(1, partition.k + 1):
        members = measure_values[label_values == label]
        if members.size == 0:
            raise DataError(f"Regime {label} has no observation of '{measure}'.")
        regimes[label] = RegimeStatistics.from_values(members)
    return RegimeSummary(measure=measure, regimes=regimes)


def regime_correlation_summary(path: CorrelationPath, dates: Sequence[pd.Timestamp], partition: Partition,
                               pairs: Optional[List[Tuple[int, int]]] = None,
                               tickers: Optional[Sequence[str]] = None) -> Dict[str, RegimeSummary]:
    """
    Per-regime distribution of each pairwise dynamic correlation.

    Returns:
        Dict[str, RegimeSummary]: Summaries keyed by "ticker_a|ticker_b".
    """
    k = path.R.shape[1]
    if pairs is None:
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    tickers = list(tickers) if tickers else [str(i) for i in range(k)]
    summaries = {}
    for i, j in pairs:
        name = f"{tickers[i]}|{tickers[j]}"
        summaries[name] = regime_summary(path.pair(i, j), partition, measure=f"rho[{name}]", dates=dates)
    return summaries
