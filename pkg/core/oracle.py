"""
Numerical ground truth for the closed forms.

Adaptive quadrature is scipy's QUADPACK (embedded Gauss-Kronrod 21/10 pair
with bisection).  Semi-infinite integrals are truncated at a + T where the
caller's exponential decay hint bounds the dropped tail by TRUNCATION_EPS.
Integrals over mixed laws are split at every support edge, density
discontinuity and atom; atoms contribute their mass exactly.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from config import config
from core.errors import DomainError, NumericError
from core.mixed_dist import DensityHandle, MixedDistribution
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_TOL = config.QUAD_TOL
TRUNCATION_EPS = 1e-14
MAX_SUBDIVISIONS = 500
# an error estimate this many times above tol is a failure even without a subdivision overrun
_ACCEPT_FACTOR = 1e3


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise DomainError("abs_error_estimate must be nonnegative")
        if self.evaluations <= 0:
            raise DomainError("a quadrature result needs at least one evaluation")

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.abs_error_estimate + other.abs_error_estimate,
            self.evaluations + other.evaluations,
        )

    def __float__(self) -> float:
        return float(self.value)


class Weight(Enum):
    IDENTITY = "identity"
    LOG1P = "log1p"

    def apply(self, z: float) -> float:
        return z if self is Weight.IDENTITY else math.log1p(z)


def integrate(f: Callable[[float], float], a: float, b: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """
    Adaptive quadrature of f over the finite interval [a, b].

    Raises:
        DomainError: a >= b or a non-finite limit
        NumericError: subdivision limit reached, non-finite value or error estimate far above tol
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate needs finite limits; use integrate_semi_infinite")
    if not a < b:
        raise DomainError(f"integrate requires a < b, got [{a}, {b}]")
    out = sp_integrate.quad(
        lambda t: float(f(t)), a, b, epsabs=tol, epsrel=tol, limit=MAX_SUBDIVISIONS, full_output=1
    )
    value, abserr, info = out[0], out[1], out[2]
    if not (math.isfinite(value) and math.isfinite(abserr)):
        logger.error("Quadrature produced a non-finite value on [%g, %g]", a, b)
        raise NumericError(f"quadrature produced a non-finite value on [{a}, {b}]")
    if len(out) > 3:
        if info.get("last", 0) >= MAX_SUBDIVISIONS or abserr > _ACCEPT_FACTOR * tol:
            logger.error("Quadrature failed on [%g, %g]: %s", a, b, out[3])
            raise NumericError(f"quadrature did not converge on [{a}, {b}]: {out[3]}")
        logger.warning("Quadrature warning accepted on [%g, %g] (abserr=%.3g): %s", a, b, abserr, out[3])
    logger.debug("integrate [%g, %g]: value=%.17g abserr=%.3g neval=%d", a, b, value, abserr, info["neval"])
    return QuadratureResult(float(value), float(abserr), int(info["neval"]))


def truncation_length(decay_rate: float, eps: float = TRUNCATION_EPS) -> float:
    """Length T with e^{-decay_rate * T} = eps."""
    if not decay_rate > 0:
        raise DomainError(f"decay rate must be positive, got {decay_rate}")
    return -math.log(eps) / decay_rate


def integrate_semi_infinite(
    f: Callable[[float], float], a: float, tol: float = DEFAULT_TOL, decay_rate: Optional[float] = None
) -> QuadratureResult:
    """
    ∫_a^∞ f for an integrand bounded by an exponential envelope e^{-decay_rate (x - a)}.

    The integral is truncated at a + T; the tail bound eps / decay_rate is folded
    into the error estimate.
    """
    if decay_rate is None:
        raise DomainError("integrate_semi_infinite needs a decay-rate hint")
    upper = a + truncation_length(decay_rate)
    result = integrate(f, a, upper, tol)
    return QuadratureResult(result.value, result.abs_error_estimate + TRUNCATION_EPS / decay_rate, result.evaluations)


def _integrate_pieces(f: Callable[[float], float], points: Sequence[float], tol: float) -> Optional[QuadratureResult]:
    total: Optional[QuadratureResult] = None
    for lo, hi in zip(points, points[1:]):
        if hi <= lo:
            continue
        piece = integrate(f, lo, hi, tol)
        total = piece if total is None else total + piece
    return total


def _law_pieces(law: MixedDistribution, upper: float) -> list:
    """Split points of the continuous part of ``law`` on [support_lo, upper]."""
    cap = upper
    if law.decay_rate is not None:
        cap = min(cap, law.support_lo + truncation_length(law.decay_rate))
    cap = min(cap, law.support_hi)
    if not math.isfinite(cap):
        raise DomainError(f"law '{law.description}' has unbounded support and no decay-rate hint")
    inner = [x for x in law.split_points() if law.support_lo < x < cap]
    return [law.support_lo, *inner, cap]


def law_expectation(
    law: MixedDistribution, g: Callable[[float], float], tol: float = DEFAULT_TOL
) -> QuadratureResult:
    """E[g(Y)] = ∫ g(y) f_c(y) dy + Σ g(location) * mass over a mixed law."""
    points = _law_pieces(law, math.inf)
    continuous = _integrate_pieces(lambda y: g(y) * law.continuous_pdf_at(y), points, tol)
    if continuous is None:
        continuous = QuadratureResult(0.0, 0.0, 1)
    atoms = sum(g(atom.location) * atom.mass for atom in law.atoms)
    return QuadratureResult(continuous.value + atoms, continuous.abs_error_estimate, continuous.evaluations + len(law.atoms))


def law_continuous_mass(law: MixedDistribution, x: float, tol: float = DEFAULT_TOL) -> float:
    """∫_{support_lo}^{x} of the continuous part of ``law``."""
    if x <= law.support_lo:
        return 0.0
    result = _integrate_pieces(law.continuous_pdf_at, _law_pieces(law, x), tol)
    return 0.0 if result is None else result.value


def law_normalization(law: MixedDistribution, tol: float = DEFAULT_TOL) -> float:
    """Continuous mass by quadrature plus the atom masses; 1 for a valid law."""
    return law_expectation(law, lambda y: 1.0, tol).value


def ratio_density(
    numerator_rate: float, p: float, denom_law: MixedDistribution, z: float, tol: float = DEFAULT_TOL
) -> float:
    """
    Density at z of X / Y with X = γp, γ ~ Exp(numerator_rate), Y ~ denom_law, X and Y independent:

        f_Z(z) = ∫ y (λ₁/p) e^{-λ₁ y z / p} dF_Y(y)

    Atoms of Y enter exactly as y (λ₁/p) e^{-λ₁ y z / p} * mass.
    """
    if z < 0:
        return 0.0
    if not denom_law.support_lo > 0:
        raise DomainError("ratio_density needs a denominator law supported away from zero")
    rate = numerator_rate / p
    return law_expectation(denom_law, lambda y: y * rate * math.exp(-rate * y * z), tol).value


def density_mass(density: DensityHandle, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """∫ density over its support."""
    return _integrate_pieces(density, density.split_points(), tol)


def density_cdf(density: DensityHandle, x: float, tol: float = DEFAULT_TOL) -> float:
    """∫_{lo}^{x} density."""
    if x <= density.lo:
        return 0.0
    upper = min(x, density.hi)
    points = [p for p in density.split_points() if p < upper] + [upper]
    result = _integrate_pieces(density, points, tol)
    return 0.0 if result is None else result.value


def functional_mean(density: DensityHandle, weight: Weight = Weight.IDENTITY, tol: float = DEFAULT_TOL) -> float:
    """∫ w(z) f(z) dz with w the identity (mean) or log1p (mean capacity in nats)."""
    weight = Weight(weight)
    return _integrate_pieces(lambda z: weight.apply(z) * density(z), density.split_points(), tol).value


def sup_norm_difference(f: Callable, g: Callable, grid: Iterable[float]) -> float:
    """max |f - g| over the grid points."""
    return max(abs(float(f(x)) - float(g(x))) for x in grid)


def vectorized_max_difference(f: Callable, g: Callable, grid: np.ndarray) -> float:
    """sup-norm difference when both handles accept arrays."""
    return float(np.max(np.abs(np.asarray(f(grid)) - np.asarray(g(grid)))))
