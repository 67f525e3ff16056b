"""
Upper incomplete gamma function and exponential integral.

Γ(a, x) uses the power series for x < a + 1 and a modified-Lentz continued
fraction otherwise; integer shapes up to 30 use the exact finite sum
Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k / k!.  E₁(x) = Γ(0, x) uses its
convergent series below 1 and the same continued fraction above.  The finite
sum is accumulated in log space, so huge x underflows to 0 instead of inf

All functions are pure and thread-safe.
"""
import math
from typing import Union

import numpy as np
from scipy import special

from core.errors import DomainError

ArrayLike = Union[float, np.ndarray]

EULER_GAMMA = 0.57721566490153286061
INTEGER_FAST_PATH_MAX = 30

_MAX_ITER = 1000
_EPS = 1e-16
_FPMIN = 1e-300
# exp() underflows below this
_LOG_UNDERFLOW = -745.0


def _is_integer(a: float) -> bool:
    return float(a).is_integer()


def _log_prefactor(a: float, x: float) -> float:
    """log(x^a e^{-x}), x > 0."""
    return a * math.log(x) - x


def _lower_gamma_series(a: float, x: float) -> float:
    """γ(a, x) by its power series; converges fast for x < a + 1."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    log_pre = _log_prefactor(a, x)
    if log_pre < _LOG_UNDERFLOW:
        return 0.0
    return total * math.exp(log_pre)


def _legendre_fraction(a: float, x: float) -> float:
    """Modified-Lentz value h of the Legendre fraction; Γ(a, x) = x^a e^{-x} h. Valid for a >= 0, x > 0."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def _upper_gamma_continued_fraction(a: float, x: float) -> float:
    """Γ(a, x) by the Legendre continued fraction. Valid for a >= 0, x > 0."""
    log_pre = _log_prefactor(a, x) if a > 0 else -x
    if log_pre < _LOG_UNDERFLOW:
        return 0.0
    return math.exp(log_pre) * _legendre_fraction(a, x)


def _log_finite_sum(n: int, x: float) -> float:
    """log Σ_{k<n} x^k / k! for x > 0, without forming x^k."""
    logs = [k * math.log(x) - math.lgamma(k + 1) for k in range(n)]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def _integer_upper_gamma(n: int, x: float) -> float:
    """Γ(n, x) for integer n from the exact finite sum, evaluated in log space."""
    if x == 0.0:
        return float(math.factorial(n - 1))
    log_value = math.lgamma(n) - x + _log_finite_sum(n, x)
    if log_value < _LOG_UNDERFLOW:
        return 0.0
    return math.exp(log_value)


def upper_incomplete_gamma(a: float, x: float) -> float:
    """
    Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt.

    Args:
        a: shape, a > 0
        x: lower limit, x >= 0

    Returns:
        Γ(a, x); 0.0 when the result underflows.

    Raises:
        DomainError: a <= 0 or x < 0
    """
    if not a > 0:
        raise DomainError(f"upper_incomplete_gamma requires a > 0, got a={a}")
    if not x >= 0:
        raise DomainError(f"upper_incomplete_gamma requires x >= 0, got x={x}")
    a = float(a)
    x = float(x)
    if math.isinf(x):
        return 0.0
    if _is_integer(a) and a <= INTEGER_FAST_PATH_MAX:
        return _integer_upper_gamma(int(a), x)
    if x == 0.0:
        return math.gamma(a)
    if x < a + 1.0:
        return math.gamma(a) - _lower_gamma_series(a, x)
    return _upper_gamma_continued_fraction(a, x)


def exp_integral_gamma0(x: float) -> float:
    """
    Γ(0, x) = E₁(x) for x > 0.

    Raises:
        DomainError: x <= 0 (the integral diverges at 0)
    """
    if not x > 0:
        raise DomainError(f"exp_integral_gamma0 requires x > 0, got x={x}")
    x = float(x)
    if math.isinf(x):
        return 0.0
    if x >= 1.0:
        return _upper_gamma_continued_fraction(0.0, x)
    # E1(x) = -γ - ln x - Σ_{k>=1} (-x)^k / (k k!)
    total = 0.0
    fact = 1.0
    for k in range(1, _MAX_ITER + 1):
        fact *= -x / k
        term = fact / k
        total += term
        if abs(term) < _EPS * max(abs(total), 1e-300):
            break
    return -EULER_GAMMA - math.log(x) - total


def scaled_exp_integral(x: float) -> float:
    """
    eˣ E₁(x) for x > 0, finite for every x where E₁ alone would underflow
    or eˣ would overflow.

    Raises:
        DomainError: x <= 0
    """
    if not x > 0:
        raise DomainError(f"scaled_exp_integral requires x > 0, got x={x}")
    x = float(x)
    if math.isinf(x):
        return 0.0
    if x >= 1.0:
        return _legendre_fraction(0.0, x)
    return math.exp(x) * exp_integral_gamma0(x)


def _regularized_upper_gamma_array(n: int, x: np.ndarray) -> np.ndarray:
    k = np.arange(n, dtype=float).reshape((n,) + (1,) * x.ndim)
    positive = np.isfinite(x) & (x > 0)
    safe_x = np.where(positive, x, 1.0)
    log_terms = k * np.log(safe_x) - special.gammaln(k + 1.0)
    log_q = -safe_x + special.logsumexp(log_terms, axis=0)
    with np.errstate(under="ignore"):
        out = np.minimum(np.exp(log_q), 1.0)
    out = np.where(x == 0.0, 1.0, out)
    return np.where(np.isinf(x), 0.0, out)


def regularized_upper_gamma(n: int, x: ArrayLike) -> ArrayLike:
    """
    Q(n, x) = Γ(n, x) / Γ(n, 0) for integer n >= 1.

    ``x`` may be a scalar or a numpy array; the result has the same shape.
    The result lies in [0, 1] and is nonincreasing in x.

    Raises:
        DomainError: n < 1, n not an integer, or any x < 0
    """
    if isinstance(n, bool) or not float(n).is_integer() or n < 1:
        raise DomainError(f"regularized_upper_gamma requires an integer n >= 1, got n={n}")
    n = int(n)
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("regularized_upper_gamma requires x >= 0")
    if arr.ndim == 0:
        value = float(arr)
        if n <= INTEGER_FAST_PATH_MAX:
            return float(_regularized_upper_gamma_array(n, np.array([value]))[0])
        return upper_incomplete_gamma(n, value) / math.gamma(n)
    if n <= INTEGER_FAST_PATH_MAX:
        return _regularized_upper_gamma_array(n, arr)
    gamma_n = math.gamma(n)
    return np.vectorize(lambda v: upper_incomplete_gamma(n, v) / gamma_n, otypes=[float])(arr)
