"""
regimerisk.core.copula
~~~~~~~~~~~~~~~~~~~~~~
Gaussian and Student elliptical copulas.

The k-variate density is the elliptical density ratio evaluated at the family quantiles of
u. The bivariate CDF integrates the closed-form conditional law of the first score given
the second over the second score:

    Gaussian: C(u, v) = int_{-inf}^{k} Phi((h - rho y) / sqrt(1 - rho^2)) phi(y) dy
    Student:  C(u, v) = int_{-inf}^{k} T_{eta+1}((h - rho y) / sqrt((eta + y^2)(1 - rho^2) / (eta + 1))) t_eta(y) dy

with h, k the quantiles of u and v. The integrand changes regime at y = h / rho, where the
integral is split.

Functions:
    - copula_scores, copula_density, copula_logdensity_path
    - bivariate_copula_cdf, conditional_copula_cdf, simulate_copula
"""
import math
from typing import Union

import numpy as np
from scipy import integrate, special

from regimerisk.exceptions import InvalidParameterError, NotPositiveDefiniteError
from regimerisk.models.copula_model import CopulaSpec

CDF_ABS_TOL = 1e-13
CDF_REL_TOL = 1e-12


def copula_scores(c: CopulaSpec, u: np.ndarray) -> np.ndarray:
    """
    Family quantiles of u: normal quantiles (Gaussian) or unscaled t_eta quantiles (Student).
    """
    u = np.asarray(u, dtype=float)
    if c.family == "gaussian":
        return special.ndtri(u)
    return special.stdtrit(c.shape, u)


def _check_interior(u: np.ndarray):
    if np.any(~np.isfinite(u)) or np.any(u <= 0.0) or np.any(u >= 1.0):
        raise InvalidParameterError("copula arguments must lie strictly inside (0, 1)")


def _cholesky(R: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("correlation matrix is not positive definite")


def _student_constant(eta: float, k: int) -> float:
    return (special.gammaln((eta + k) / 2.0) + (k - 1) * special.gammaln(eta / 2.0)
            - k * special.gammaln((eta + 1.0) / 2.0))


def copula_logdensity_path(c: CopulaSpec, U: np.ndarray, R_path: np.ndarray) -> np.ndarray:
    """
    Log copula density for every row of a T x k panel, each row with its own R_t.

    Args:
        c (CopulaSpec): The copula family.
        U (np.ndarray): PIT panel, T x k, entries strictly inside (0, 1).
        R_path (np.ndarray): Correlation matrices, T x k x k (or a single k x k matrix).

    Returns:
        np.ndarray: log c(u_t; R_t) of length T.

    Raises:
        InvalidParameterError: If a PIT value is on the boundary.
        NotPositiveDefiniteError: If some R_t is not positive definite.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    _check_interior(U)
    T, k = U.shape
    R_path = np.asarray(R_path, dtype=float)
    if R_path.ndim == 2:
        R_path = np.broadcast_to(R_path, (T, k, k))
    if R_path.shape != (T, k, k):
        raise InvalidParameterError(f"correlation path of shape {R_path.shape} does not match panel {U.shape}")
    x = copula_scores(c, U)
    L = _cholesky(R_path)
    log_det = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    solved = np.linalg.solve(L, x[..., None])[..., 0]
    quad = np.sum(solved * solved, axis=1)
    if c.family == "gaussian":
        return -0.5 * log_det - 0.5 * (quad - np.sum(x * x, axis=1))
    eta = c.shape
    return (_student_constant(eta, k) - 0.5 * log_det
            - 0.5 * (eta + k) * np.log1p(quad / eta)
            + 0.5 * (eta + 1.0) * np.sum(np.log1p(x * x / eta), axis=1))


def copula_density(c: CopulaSpec, u: np.ndarray, R: np.ndarray) -> float:
    """
    Copula density at a single point u given the correlation matrix R.

    Raises:
        InvalidParameterError: If u is on the boundary or R lacks a unit diagonal.
        NotPositiveDefiniteError: If R is not positive definite.
    """
    R = np.asarray(R, dtype=float)
    if not np.allclose(np.diag(R), 1.0, atol=1e-12) or not np.allclose(R, R.T, atol=1e-12):
        raise InvalidParameterError("R must be symmetric with a unit diagonal")
    u = np.asarray(u, dtype=float).reshape(1, -1)
    return float(np.exp(copula_logdensity_path(c, u, R)[0]))


def _check_rho(rho: float):
    if not np.isfinite(rho) or abs(rho) >= 1.0:
        raise InvalidParameterError(f"correlation must lie in (-1, 1), got {rho}")


def _integrate_split(integrand, upper: float, split: float) -> float:
    points = [-np.inf]
    if np.isfinite(split) and split < upper:
        points.append(split)
    points.append(upper)
    total = 0.0
    for low, high in zip(points[:-1], points[1:]):
        value, _ = integrate.quad(integrand, low, high, epsabs=CDF_ABS_TOL, epsrel=CDF_REL_TOL, limit=200)
        total += value
    return total


def bivariate_copula_cdf(c: CopulaSpec, u: float, v: float, rho: float) -> float:
    """
    C(u, v) of the bivariate copula with correlation rho.

    Exact on the boundary: C(u, 0) = C(0, v) = 0, C(u, 1) = u and C(1, v) = v.

    Args:
        c (CopulaSpec): The copula family.
        u (float): First argument in [0, 1].
        v (float): Second argument in [0, 1].
        rho (float): Correlation in (-1, 1).

    Returns:
        float: The joint probability.

    Raises:
        InvalidParameterError: If |rho| >= 1 or an argument is outside [0, 1].
    """
    _check_rho(rho)
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise InvalidParameterError(f"copula arguments must lie in [0, 1], got ({u}, {v})")
    if u == 0.0 or v == 0.0:
        return 0.0
    if u == 1.0:
        return float(v)
    if v == 1.0:
        return float(u)
    if rho == 0.0 and c.family == "gaussian":
        return float(u * v)
    h, k = (float(value) for value in copula_scores(c, np.array([u, v])))
    complement = math.sqrt(1.0 - rho * rho)
    split = h / rho if rho != 0.0 else np.inf
    if c.family == "gaussian":
        norm = 1.0 / math.sqrt(2.0 * math.pi)

        def integrand(y: float) -> float:
            return special.ndtr((h - rho * y) / complement) * norm * math.exp(-0.5 * y * y)
    else:
        eta = c.shape
        log_norm = special.gammaln((eta + 1.0) / 2.0) - special.gammaln(eta / 2.0) - 0.5 * math.log(math.pi * eta)
        eta_next = eta + 1.0

        def integrand(y: float) -> float:
            scale = math.sqrt((eta + y * y) * (1.0 - rho * rho) / eta_next)
            density = math.exp(log_norm - 0.5 * eta_next * math.log1p(y * y / eta))
            return special.stdtr(eta_next, (h - rho * y) / scale) * density
    value = _integrate_split(integrand, k, split)
    return float(min(max(value, max(u + v - 1.0, 0.0)), min(u, v)))


def conditional_copula_cdf(c: CopulaSpec, u: Union[float, np.ndarray], v: Union[float, np.ndarray],
                           rho: float) -> Union[float, np.ndarray]:
    """
    h-function P(U <= u | V = v).
    """
    _check_rho(rho)
    u_arr, v_arr = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    _check_interior(u_arr)
    _check_interior(v_arr)
    x, y = copula_scores(c, u_arr), copula_scores(c, v_arr)
    if c.family == "gaussian":
        value = special.ndtr((x - rho * y) / math.sqrt(1.0 - rho * rho))
    else:
        eta = c.shape
        scale = np.sqrt((eta + y * y) * (1.0 - rho * rho) / (eta + 1.0))
        value = special.stdtr(eta + 1.0, (x - rho * y) / scale)
    return float(value) if np.ndim(value) == 0 else value


def simulate_copula(c: CopulaSpec, R: np.ndarray, n: int, seed: Union[int, np.random.Generator]) -> np.ndarray:
    """
    Draw an n x k panel of uniforms from the elliptical copula.

    Args:
        c (CopulaSpec): The copula family.
        R (np.ndarray): Correlation matrix.
        n (int): Number of draws.
        seed (int | np.random.Generator): Seed or generator.

    Returns:
        np.ndarray: n x k panel in (0, 1).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    L = _cholesky(np.asarray(R, dtype=float))
    z = rng.standard_normal((n, L.shape[0])) @ L.T
    if c.family == "gaussian":
        return special.ndtr(z)
    w = rng.chisquare(c.shape, size=(n, 1)) / c.shape
    return special.stdtr(c.shape, z / np.sqrt(w))
