"""
Bessel functions of real order, their zeros and the brane eigenvalue condition
"""

import logging
import math
from typing import Callable, List, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp

from kktower.core.config import get_settings
from kktower.core.errors import ConvergenceError, DomainError
from kktower.schemas.reports import EigenConditionDiagnostic

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_SCAN_START = 1e-2
_SCAN_CHUNK = 256


def _check_order(order: float, lower: float = 0.0, strict: bool = False) -> None:
    if not math.isfinite(order) or order < lower or (strict and order == lower):
        raise DomainError(f"order {order} outside the supported range")


def _as_result(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def bessel_j(order: float, x: ArrayLike) -> ArrayLike:
    """J_order(x) for real order >= 0 and x >= 0"""
    _check_order(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("bessel_j needs finite x >= 0")
    return _as_result(jv(order, arr), arr.ndim == 0)


def bessel_j_deriv(order: float, x: ArrayLike) -> ArrayLike:
    """J'_order(x) for real order >= 0 and x > 0"""
    _check_order(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("bessel_j_deriv needs finite x > 0")
    return _as_result(jvp(order, arr), arr.ndim == 0)


def mcmahon_seed(order: float, k: int) -> float:
    """Leading McMahon estimate of the k-th positive zero of J_order"""
    beta = (k + order / 2.0 - 0.25) * math.pi
    return beta - (4.0 * order * order - 1.0) / (8.0 * beta)


def robin_function(order: float, x: ArrayLike) -> ArrayLike:
    """g(x) = 2 J_order(x) + x J'_order(x)"""
    return 2.0 * jv(order, x) + np.asarray(x) * jvp(order, x)


def _scan_roots(func: Callable[[np.ndarray], np.ndarray], count: int, label: str) -> List[float]:
    """First `count` sign changes of func on (_SCAN_START, inf), refined by brentq"""
    settings = get_settings()
    step = settings.ROOT_SCAN_STEP
    roots: List[float] = []
    x0 = _SCAN_START
    f0 = float(func(np.array([x0]))[0])
    scanned = 0
    while len(roots) < count:
        if scanned >= settings.ROOT_MAX_SCAN:
            raise ConvergenceError(f"{label}: found {len(roots)} of {count} roots within the scan budget")
        xs = x0 + step * np.arange(1, _SCAN_CHUNK + 1)
        fs = func(xs)
        scanned += _SCAN_CHUNK
        for x1, f1 in zip(xs, fs):
            if f1 == 0.0:
                roots.append(float(x1))
            elif f0 != 0.0 and math.copysign(1.0, f0) != math.copysign(1.0, f1):
                root, info = brentq(
                    lambda x: float(func(np.array([x]))[0]),
                    x0,
                    x1,
                    xtol=1e-15,
                    maxiter=200,
                    full_output=True,
                    disp=False,
                )
                if not info.converged:
                    raise ConvergenceError(f"{label}: bracket [{x0}, {x1}] did not converge ({info.flag})")
                roots.append(float(root))
            x0, f0 = float(x1), float(f1)
            if len(roots) >= count:
                break
    return roots[:count]


def bessel_zeros(order: float, count: int) -> List[float]:
    """First `count` positive zeros of J_order, increasing"""
    _check_order(order)
    if count < 1:
        raise DomainError("count must be at least 1")
    roots = _scan_roots(lambda x: jv(order, x), count, f"zeros of J_{order}")
    drift = max(abs(r - mcmahon_seed(order, k)) for k, r in enumerate(roots, start=1))
    logger.debug(f"J_{order}: {count} zeros, max distance to McMahon seed {drift:.3e}")
    return roots


def robin_eigenvalues(order: float, count: int) -> List[float]:
    """First `count` positive roots of 2 J_order(x) + x J'_order(x)"""
    _check_order(order, strict=True)
    if count < 1:
        raise DomainError("count must be at least 1")
    roots = _scan_roots(lambda x: robin_function(order, x), count, f"Robin roots for lambda={order}")
    for n, root in enumerate(roots):
        if jv(order, root) == 0.0:
            raise ConvergenceError(f"Robin root {n} coincides with a zero of J_{order}")
    logger.debug(f"lambda={order}: {count} Robin roots, largest {roots[-1]:.6f}")
    return roots


def eigen_condition_diagnostic(order: float, count: int) -> EigenConditionDiagnostic:
    """Compare the Robin roots with the zeros of J_(order - 1)

    The two sets coincide only for order 2, where 2 J_2 + x J_2' = x J_1.
    """
    _check_order(order, strict=True)
    robin = robin_eigenvalues(order, count)
    shifted = _scan_roots(lambda x: jv(order - 1.0, x), count, f"zeros of J_{order - 1}")
    difference = max(abs(a - b) for a, b in zip(robin, shifted))
    agree = difference < 1e-9
    if not agree:
        logger.info(f"lambda={order}: Robin roots differ from zeros of J_(lambda-1) by {difference:.3e}")
    return EigenConditionDiagnostic(
        order=order,
        robin_roots=robin,
        bessel_roots=shifted,
        max_difference=difference,
        conditions_agree=agree,
    )
