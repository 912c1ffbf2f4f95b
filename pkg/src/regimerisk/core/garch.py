"""
regimerisk.core.garch
~~~~~~~~~~~~~~~~~~~~~
Univariate ARMA(p, q) mean with eGARCH(p, q) variance: filtering, likelihood, maximum
likelihood fitting, simulation and margin-family selection.

    mu_t    = mu0 + sum_j phi_j r_{t-j} + sum_j theta_j y_{t-j}
    log h_t = omega + sum_j (alpha_j eps_{t-j} + gamma_j (|eps_{t-j}| - E|eps|)) + sum_j beta_j log h_{t-j}

alpha multiplies the signed standardized shock and gamma its centred magnitude. Before the
sample y (hence eps) is 0, log h is the log sample variance and r is the sample mean.

Functions:
    - arma_egarch_filter, arma_egarch_loglik, loglik_gradient
    - fit_arma_egarch, select_margin_distribution, information_criteria
    - simulate_arma_egarch
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from statsmodels.tools.numdiff import approx_fprime

from regimerisk.core.distributions import dist_abs_moment, dist_draw, dist_logpdf
from regimerisk.core.numerics import (
    hessian_standard_errors,
    information_criteria_from_loglik,
    multistart_minimize,
)
from regimerisk.exceptions import (
    DegenerateSeriesError,
    InsufficientDataError,
    InvalidParameterError,
    NonFiniteLikelihoodError,
)
from regimerisk.models.config_model import OptimizerConfig
from regimerisk.models.dist_model import DistFamily, DistSpec, SHAPED_FAMILIES, SKEWED_FAMILIES, T_FAMILIES
from regimerisk.models.garch_model import (
    ArmaEgarchOrders,
    ArmaEgarchParams,
    ArmaEgarchSpec,
    FilterOutput,
    OptimizerDiagnostics,
    UnivariateFit,
)

logger = logging.getLogger(__name__)

MIN_RECOMMENDED_OBS = 100
ALL_FAMILIES: Tuple[DistFamily, ...] = ("normal", "skew_normal", "student_t", "skew_student_t", "ged")
FAILED_OBJECTIVE = 1e10
LOG_H_LIMIT = 700.0


@njit(cache=True)
def _egarch_kernel(r, z_in, simulate, mu0, phi, theta, omega, alpha, gamma, beta, abs_moment, r_pre, log_h_pre):
    n = z_in.shape[0] if simulate else r.shape[0]
    r_out = np.empty(n)
    mu = np.empty(n)
    log_h = np.empty(n)
    z = np.empty(n)
    y = np.empty(n)
    for t in range(n):
        m = mu0
        for j in range(phi.shape[0]):
            lag = t - j - 1
            m += phi[j] * (r_out[lag] if lag >= 0 else r_pre)
        for j in range(theta.shape[0]):
            lag = t - j - 1
            if lag >= 0:
                m += theta[j] * y[lag]
        lh = omega
        for j in range(alpha.shape[0]):
            lag = t - j - 1
            if lag >= 0:
                lh += alpha[j] * z[lag] + gamma[j] * (abs(z[lag]) - abs_moment)
            else:
                lh -= gamma[j] * abs_moment
        for j in range(beta.shape[0]):
            lag = t - j - 1
            lh += beta[j] * (log_h[lag] if lag >= 0 else log_h_pre)
        mu[t] = m
        log_h[t] = lh
        sd = np.exp(0.5 * lh)
        if simulate:
            z[t] = z_in[t]
            y[t] = sd * z[t]
            r_out[t] = m + y[t]
        else:
            r_out[t] = r[t]
            y[t] = r[t] - m
            z[t] = y[t] / sd
    return r_out, mu, log_h, z


def _vectors(params: ArmaEgarchParams):
    as_array = lambda values: np.asarray(values, dtype=np.float64)
    return (as_array(params.phi), as_array(params.theta), as_array(params.alpha),
            as_array(params.gamma), as_array(params.beta))


def _check_finite(log_h: np.ndarray, z: np.ndarray, context: str):
    if not (np.all(np.isfinite(log_h)) and np.all(np.isfinite(z))) or np.max(np.abs(log_h)) > LOG_H_LIMIT:
        raise NonFiniteLikelihoodError(f"{context}: the variance recursion diverged")


def arma_egarch_filter(params: ArmaEgarchParams, series: np.ndarray) -> FilterOutput:
    """
    Run the mean and log-variance recursions over a return series.

    Args:
        params (ArmaEgarchParams): The model parameters.
        series (np.ndarray): Returns r_1..r_T.

    Returns:
        FilterOutput: mu_t, h_t, z_t and the summed conditional log-density.

    Raises:
        InsufficientDataError: If the series is not longer than the largest lag.
        NonFiniteLikelihoodError: If any intermediate value is not finite.
    """
    r = np.ascontiguousarray(series, dtype=np.float64)
    if r.ndim != 1 or r.size <= params.orders.max_lag or r.size < 2:
        raise InsufficientDataError(
            f"series of length {r.size} is too short for orders {params.orders.model_dump()}")
    phi, theta, alpha, gamma, beta = _vectors(params)
    with np.errstate(divide="ignore"):
        log_h_pre = float(np.log(np.var(r, ddof=1)))
    _, mu, log_h, z = _egarch_kernel(r, np.empty(0), False, params.mu0, phi, theta, params.omega, alpha,
                                     gamma, beta, dist_abs_moment(params.dist), float(np.mean(r)), log_h_pre)
    _check_finite(log_h, z, "filter")
    loglik = float(np.sum(-0.5 * log_h + dist_logpdf(params.dist, z)))
    if not np.isfinite(loglik):
        raise NonFiniteLikelihoodError("filter: log-likelihood is not finite")
    return FilterOutput(mu=mu, h=np.exp(log_h), z=z, loglik=loglik)


def arma_egarch_loglik(params: ArmaEgarchParams, series: np.ndarray) -> float:
    return arma_egarch_filter(params, series).loglik


def loglik_gradient(params: ArmaEgarchParams, series: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """
    Central-difference score vector in the natural parameter order, relative step `step`.
    """
    vector = params.to_vector()
    orders, family = params.orders, params.dist.family

    def loglik(x: np.ndarray) -> float:
        return arma_egarch_loglik(ArmaEgarchParams.from_vector(x, orders, family), series)

    epsilon = step * np.maximum(np.abs(vector), 1.0)
    return approx_fprime(vector, loglik, epsilon=epsilon, centered=True)


def information_criteria(fit: UnivariateFit) -> Dict[str, float]:
    return information_criteria_from_loglik(fit.filter.loglik, len(fit.params.to_vector()), fit.nobs)


class _WorkingSpace:
    """
    Maps natural parameters to the optimizer's box-constrained space: skew by log,
    t shape by log(nu - 2), GED shape by log.
    """

    def __init__(self, orders: ArmaEgarchOrders, family: str, log_variance: float):
        self.orders = orders
        self.family = family
        names = ArmaEgarchParams(
            phi=[0.0] * orders.p_mean, theta=[0.0] * orders.q_mean, alpha=[0.0] * orders.p_var,
            gamma=[0.0] * orders.p_var, beta=[0.0] * orders.q_var,
            dist=DistSpec.default_for(family)).parameter_names()
        self.names = names
        omega_span = max(30.0, 2.0 * abs(log_variance))
        bounds = []
        for name in names:
            if name.startswith(("phi", "theta")):
                bounds.append((-0.999, 0.999))
            elif name == "omega":
                bounds.append((-omega_span, omega_span))
            elif name.startswith(("alpha", "gamma")):
                bounds.append((-2.0, 2.0))
            elif name.startswith("beta"):
                bounds.append((-1.0, 1.0))
            elif name == "skew":
                bounds.append((np.log(0.2), np.log(5.0)))
            elif name == "shape":
                bounds.append((np.log(0.05), np.log(200.0)) if family in T_FAMILIES else (np.log(0.3), np.log(10.0)))
            else:
                bounds.append((None, None))
        self.bounds = bounds

    def to_natural(self, x: np.ndarray) -> np.ndarray:
        natural = np.array(x, dtype=float)
        for index, name in enumerate(self.names):
            if name == "skew":
                natural[index] = np.exp(x[index])
            elif name == "shape":
                natural[index] = 2.0 + np.exp(x[index]) if self.family in T_FAMILIES else np.exp(x[index])
        return natural

    def to_working(self, natural: np.ndarray) -> np.ndarray:
        x = np.array(natural, dtype=float)
        for index, name in enumerate(self.names):
            if name == "skew":
                x[index] = np.log(natural[index])
            elif name == "shape":
                x[index] = np.log(natural[index] - 2.0) if self.family in T_FAMILIES else np.log(natural[index])
        return x

    def params(self, x: np.ndarray) -> ArmaEgarchParams:
        return ArmaEgarchParams.from_vector(self.to_natural(x), self.orders, self.family)

    def boundary(self, x: np.ndarray) -> List[str]:
        flagged = []
        for name, value, (low, high) in zip(self.names, x, self.bounds):
            if low is None:
                continue
            tol = 1e-6 * (high - low)
            if value <= low + tol or value >= high - tol:
                flagged.append(name)
        return flagged


def _start_vector(orders: ArmaEgarchOrders, family: str, mean: float, log_variance: float,
                  beta1: float, alpha1: float, gamma1: float, shape: float) -> np.ndarray:
    values = [mean]
    values += [0.0] * orders.p_mean
    values += [0.0] * orders.q_mean
    values += [(1.0 - (beta1 if orders.q_var else 0.0)) * log_variance]
    values += [alpha1] + [0.0] * (orders.p_var - 1) if orders.p_var else []
    values += [beta1] + [0.0] * (orders.q_var - 1) if orders.q_var else []
    values += [gamma1] + [0.0] * (orders.p_var - 1) if orders.p_var else []
    if family in SKEWED_FAMILIES:
        values.append(1.0)
    if family in SHAPED_FAMILIES:
        values.append(shape if family in T_FAMILIES else 1.5)
    return np.asarray(values, dtype=float)


def fit_arma_egarch(spec: ArmaEgarchSpec, series: np.ndarray, opts: Optional[OptimizerConfig] = None,
                    seed: int = 0, ticker: Optional[str] = None, attempt: int = 0) -> UnivariateFit:
    """
    Maximum-likelihood fit of an ARMA-eGARCH model.

    Runs L-BFGS-B on the per-observation negative log-likelihood from up to three starts
    (moment-based, conservative, seeded perturbation) with |sum beta| < 1 as a penalty.
    Non-convergence is reported in the diagnostics, not raised.

    Args:
        spec (ArmaEgarchSpec): Orders and innovation family.
        series (np.ndarray): Returns.
        opts (OptimizerConfig, optional): Number of starts, iteration cap and tolerance.
        seed (int): Seed of the perturbed start.
        ticker (str, optional): Series name carried into the fit and error messages.
        attempt (int): Retry counter; each retry perturbs all starts further.

    Returns:
        UnivariateFit: Estimates, filter output, standard errors and p-values.

    Raises:
        DegenerateSeriesError: If the series is constant.
        InsufficientDataError: If the series is shorter than the largest lag.
    """
    opts = opts or OptimizerConfig()
    r = np.asarray(series, dtype=float)
    label = ticker or "series"
    if r.size < 2 or np.ptp(r) == 0.0:
        raise DegenerateSeriesError(f"{label} is constant; the variance is not identified")
    if r.size < MIN_RECOMMENDED_OBS:
        logger.warning("%s has %d observations; at least %d are recommended", label, r.size, MIN_RECOMMENDED_OBS)
    orders, family = spec.orders, spec.family
    if r.size <= orders.max_lag:
        raise InsufficientDataError(f"{label} of length {r.size} is too short for the model orders")
    log_variance = float(np.log(np.var(r, ddof=1)))
    mean = float(np.mean(r))
    space = _WorkingSpace(orders, family, log_variance)
    nobs = r.size

    def objective(x: np.ndarray) -> float:
        try:
            params = space.params(x)
            value = -arma_egarch_loglik(params, r) / nobs
        except (NonFiniteLikelihoodError, ValueError, FloatingPointError):
            return FAILED_OBJECTIVE
        excess = abs(params.persistence) - (1.0 - 1e-6)
        if excess > 0.0:
            value += 1e4 * excess * excess
        return value if np.isfinite(value) else FAILED_OBJECTIVE

    rng = np.random.default_rng([seed, attempt])
    moments = _start_vector(orders, family, mean, log_variance, 0.9, -0.05, 0.1, 8.0)
    conservative = _start_vector(orders, family, mean, log_variance, 0.5, 0.0, 0.05, 10.0)
    starts = [space.to_working(moments), space.to_working(conservative)]
    perturbed = starts[0] + rng.normal(0.0, 0.05 * (1 + attempt), size=starts[0].size)
    starts.append(perturbed)
    if attempt:
        starts = [start + rng.normal(0.0, 0.05 * attempt, size=start.size) for start in starts]
    starts = starts[:opts.starts]

    result, start_index = multistart_minimize(objective, starts, space.bounds, opts.maxiter, opts.tol)
    params = space.params(result.x)
    filtered = arma_egarch_filter(params, r)

    def neg_loglik(natural: np.ndarray) -> float:
        try:
            return -arma_egarch_loglik(ArmaEgarchParams.from_vector(natural, orders, family), r)
        except (NonFiniteLikelihoodError, ValueError, FloatingPointError):
            return np.inf

    se, pvalues, hessian_ok = hessian_standard_errors(neg_loglik, params.to_vector())
    boundary = space.boundary(result.x)
    if abs(params.persistence) >= 1.0 - 1e-4:
        boundary.append("persistence")
    if boundary:
        logger.warning("%s: boundary solution for %s", label, ", ".join(boundary))
    if not result.success:
        logger.warning("%s: optimizer did not converge (%s)", label, result.message)
    diagnostics = OptimizerDiagnostics(
        converged=bool(result.success),
        message=str(result.message),
        iterations=int(result.nit),
        evaluations=int(result.nfev),
        objective=float(result.fun),
        start_index=start_index,
        hessian_ok=hessian_ok,
        boundary=boundary,
    )
    fit = UnivariateFit(ticker=ticker, params=params, filter=filtered, se=se, pvalues=pvalues,
                        convergence=diagnostics, nobs=nobs)
    return fit.model_copy(update={"information_criteria": information_criteria(fit)})


def select_margin_distribution(series: np.ndarray, orders: ArmaEgarchOrders,
                               families: Sequence[str] = ALL_FAMILIES, opts: Optional[OptimizerConfig] = None,
                               seed: int = 0, ticker: Optional[str] = None,
                               criterion: str = "bic") -> Tuple[UnivariateFit, Dict[str, Dict[str, float]]]:
    """
    Fit every candidate innovation family and keep the one with the smallest criterion.

    Returns:
        Tuple[UnivariateFit, dict]: The selected fit and the criteria of every family.
    """
    if not families:
        raise InvalidParameterError("at least one candidate family is required")
    fits = {family: fit_arma_egarch(ArmaEgarchSpec(orders=orders, family=family), series, opts, seed, ticker)
            for family in families}
    table = {family: fit.information_criteria for family, fit in fits.items()}
    best = min(families, key=lambda family: table[family][criterion])
    logger.info("%s: selected %s margins by %s", ticker or "series", best, criterion)
    return fits[best], table


def _unconditional_state(params: ArmaEgarchParams) -> Tuple[float, float]:
    phi_sum = float(np.sum(params.phi))
    mean = params.mu0 / (1.0 - phi_sum) if abs(phi_sum) < 1.0 else params.mu0
    if abs(params.persistence) < 1.0:
        log_h = params.omega / (1.0 - params.persistence)
    else:
        log_h = params.omega
    return mean, log_h


def simulate_arma_egarch(params: ArmaEgarchParams, n: int, burn: int = 500, seed: int = 0,
                         return_variance: bool = False):
    """
    Simulate returns from the model, discarding the first `burn` values.

    The recursion starts from the unconditional mean and log-variance. Innovations are drawn by
    inverse transform, so a skewed family at xi = 1 gives the symmetric path.

    Args:
        params (ArmaEgarchParams): The model parameters.
        n (int): Number of returned observations.
        burn (int): Discarded warm-up length.
        seed (int): Seed of the numpy generator.
        return_variance (bool): Also return the simulated h_t.

    Returns:
        np.ndarray | Tuple[np.ndarray, np.ndarray]: Returns, and h_t if requested.

    Raises:
        NonFiniteLikelihoodError: If the parameters are explosive.
    """
    if n < 1 or burn < 0:
        raise InvalidParameterError(f"invalid simulation length n={n}, burn={burn}")
    if abs(params.persistence) >= 1.0:
        logger.warning("simulating with |sum beta| = %.4f >= 1; the log-variance is not stationary",
                       abs(params.persistence))
    rng = np.random.default_rng(seed)
    innovations = np.ascontiguousarray(dist_draw(params.dist, rng, n + burn))
    phi, theta, alpha, gamma, beta = _vectors(params)
    mean, log_h_pre = _unconditional_state(params)
    r, _, log_h, z = _egarch_kernel(np.empty(0), innovations, True, params.mu0, phi, theta, params.omega,
                                    alpha, gamma, beta, dist_abs_moment(params.dist), mean, log_h_pre)
    _check_finite(log_h, r, "simulation")
    if return_variance:
        return r[burn:], np.exp(log_h[burn:])
    return r[burn:]
