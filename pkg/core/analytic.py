"""
Closed-form primary-user metrics under peak power adaptation at the SUs.

Model: the PU signal power gain γ ~ Exp(λ₁) and each SU-to-PBS gain
αᵢ ~ Exp(λ₂).  The aggregate interference seen by the PBS is
I = min{p Σαᵢ, q}, so the noise-plus-interference Y = σ² + I is a capped
gamma law with an atom at σ² + q, and SINR = γp / Y.

Mean SINR, outage and mean capacity have closed forms only for one SU with
λ₁ = λ₂ = σ² = 1; every other scenario goes through the quadrature
functionals at the bottom of this module.
"""
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, Sequence, Union

import numpy as np

from core import oracle
from core.errors import DomainError, UnsupportedScenarioError
from core.mixed_dist import Atom, DensityHandle, MixedDistribution
from core.special_functions import regularized_upper_gamma, scaled_exp_integral
from utils.logger import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

# Mass of the SINR law the Z_MAX truncation is allowed to drop.
Z_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class ScenarioParams:
    """
    Model constants.

    p: SU peak transmit power (linear); also the PU transmit power in the SINR numerator
    q: interference temperature (linear)
    sigma2: AWGN variance
    lambda1: rate of the PU -> PBS power gain γ
    lambda2: rate of the SU -> PBS power gain α
    n_su: number of SUs
    """

    p: float
    q: float
    sigma2: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    n_su: int = 1

    def __post_init__(self):
        for name in ("p", "q", "sigma2", "lambda1", "lambda2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be a finite positive number, got {value!r}")
        if isinstance(self.n_su, bool) or not float(self.n_su).is_integer() or self.n_su < 1:
            raise DomainError(f"n_su must be an integer >= 1, got {self.n_su!r}")
        object.__setattr__(self, "n_su", int(self.n_su))

    @property
    def lambda_bar(self) -> float:
        """Scaled SU rate λ₂ / p."""
        return self.lambda2 / self.p

    @property
    def lambda1_bar(self) -> float:
        """Scaled PU rate λ₁ / p."""
        return self.lambda1 / self.p

    @property
    def is_unit_rate(self) -> bool:
        return self.lambda1 == 1.0 and self.lambda2 == 1.0 and self.sigma2 == 1.0

    @property
    def scenario_id(self) -> str:
        parts = [f"p{self.p:g}", f"q{self.q:g}", f"n{self.n_su}"]
        if not self.is_unit_rate:
            parts += [f"s{self.sigma2:g}", f"l1{self.lambda1:g}", f"l2{self.lambda2:g}"]
        return "_".join(parts)

    def replace(self, **changes) -> "ScenarioParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DensityCurve:
    """A density or CDF evaluated on a grid (one CSV curve)."""

    grid: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise DomainError("grid and values must be 1-D and of equal length")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise DomainError("curve grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError(f"curve '{self.label}' has non-finite values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def evaluate(cls, handle: Callable[[np.ndarray], np.ndarray], grid: Sequence[float], label: str) -> "DensityCurve":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(handle(grid), dtype=float), label)


def _require_unit_single(params: ScenarioParams, what: str) -> None:
    if not params.is_unit_rate:
        raise UnsupportedScenarioError(
            f"{what} closed form holds only for lambda1 = lambda2 = sigma2 = 1; use the quadrature functional"
        )
    if params.n_su != 1:
        raise UnsupportedScenarioError(f"{what} closed form holds only for a single SU; use the quadrature functional")


def su_transmit_power(alpha: ArrayLike, params: ScenarioParams) -> ArrayLike:
    """Peak power adaptation: min{p, q / α}."""
    arr = np.asarray(alpha, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("channel gain alpha must be positive")
    power = np.minimum(params.p, params.q / arr)
    return float(power) if np.ndim(alpha) == 0 else power


def sinr_z_max(params: ScenarioParams, tail_mass: float = Z_TAIL_MASS) -> float:
    """Z_MAX with P(SINR > Z_MAX) <= tail_mass, from P(Z > z) <= exp(-λ₁σ²z/p)."""
    return math.log(1.0 / tail_mass) / (params.lambda1_bar * params.sigma2)


# ---------------------------------------------------------------------------
# Noise-plus-interference laws
# ---------------------------------------------------------------------------

def _capped_gamma_law(params: ScenarioParams, shift: float, label: str) -> MixedDistribution:
    n = params.n_su
    lb = params.lambda_bar
    q = params.q
    log_norm = n * math.log(lb) - math.lgamma(n)

    def density(x):
        u = np.asarray(x, dtype=float) - shift
        inside = (u >= 0) & (u < q)
        u_safe = np.where(inside, u, 0.0)
        with np.errstate(divide="ignore"):
            log_u = np.log(u_safe) if n > 1 else np.zeros_like(u_safe)
        values = np.exp(log_norm + (n - 1) * log_u - lb * u_safe)
        return np.where(inside, values, 0.0)

    def continuous_cdf(x):
        u = np.clip(np.asarray(x, dtype=float) - shift, 0.0, q)
        return 1.0 - regularized_upper_gamma(n, lb * u)

    mass = regularized_upper_gamma(n, lb * q)
    atoms = (Atom(shift + q, mass),) if mass > 0 else ()
    return MixedDistribution(
        support_lo=shift,
        continuous_density=density,
        atoms=atoms,
        description=label,
        support_hi=shift + q,
        breakpoints=(shift + q,),
        decay_rate=lb if n == 1 else lb / 2.0,
        continuous_cdf=continuous_cdf,
    )


def interference_law(params: ScenarioParams) -> MixedDistribution:
    """Law of I = min{p Σαᵢ, q} alone (no noise): support [0, q], atom at q."""
    return _capped_gamma_law(params, 0.0, f"interference {params.scenario_id}")


def ni_law_single(params: ScenarioParams) -> MixedDistribution:
    """
    Noise plus interference from one SU: density (λ₂/p) e^{-λ₂(x-σ²)/p} on [σ², σ²+q)
    and an atom of mass e^{-λ₂q/p} at σ²+q.
    """
    lb = params.lambda_bar
    s2 = params.sigma2
    q = params.q

    def density(x):
        u = np.asarray(x, dtype=float) - s2
        return np.where((u >= 0) & (u < q), lb * np.exp(-lb * np.maximum(u, 0.0)), 0.0)

    def continuous_cdf(x):
        u = np.clip(np.asarray(x, dtype=float) - s2, 0.0, q)
        return -np.expm1(-lb * u)

    mass = math.exp(-lb * q)
    return MixedDistribution(
        support_lo=s2,
        continuous_density=density,
        atoms=(Atom(s2 + q, mass),) if mass > 0 else (),
        description=f"noise+interference, single SU, {params.replace(n_su=1).scenario_id}",
        support_hi=s2 + q,
        breakpoints=(s2 + q,),
        decay_rate=lb,
        continuous_cdf=continuous_cdf,
    )


def ni_law_multi(params: ScenarioParams) -> MixedDistribution:
    """
    Noise plus interference from n SUs: Σαᵢp ~ Gamma(n, λ̄ = λ₂/p) capped at q, shifted by σ².
    Atom at σ²+q with mass Q(n, λ̄q).
    """
    return _capped_gamma_law(params, params.sigma2, f"noise+interference, {params.scenario_id}")


def ni_laplace_transform(params: ScenarioParams, s: ArrayLike) -> ArrayLike:
    """E[e^{-sY}] of the noise-plus-interference law, s >= 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("Laplace transform argument must be nonnegative")
    n, lb, q, s2 = params.n_su, params.lambda_bar, params.q, params.sigma2
    capped = regularized_upper_gamma(n, lb * q)
    below_cap = (lb / (s_arr + lb)) ** n * (1.0 - regularized_upper_gamma(n, q * (s_arr + lb)))
    values = np.exp(-s_arr * s2) * (below_cap + np.exp(-s_arr * q) * capped)
    return float(values) if np.ndim(s) == 0 else values


# ---------------------------------------------------------------------------
# SINR densities
# ---------------------------------------------------------------------------

def sinr_pdf_single_general(params: ScenarioParams) -> DensityHandle:
    """
    SINR density for one SU and arbitrary λ₁, λ₂, σ², with Λ = λ₂ + λ₁z:

        f(z) = λ₁λ₂/(Λp) { e^{-σ²λ₁z/p} (σ² + p/Λ)
                           + e^{-(σ²λ₁z + qΛ)/p} ((σ²+q)λ₁z/λ₂ - p/Λ) }
    """
    p, q, s2, l1, l2 = params.p, params.q, params.sigma2, params.lambda1, params.lambda2

    def fn(z):
        z = np.asarray(z, dtype=float)
        lam = l2 + l1 * z
        below = np.exp(-s2 * l1 * z / p) * (s2 + p / lam)
        capped = np.exp(-(s2 * l1 * z + q * lam) / p) * ((s2 + q) * l1 * z / l2 - p / lam)
        return l1 * l2 / (lam * p) * (below + capped)

    return DensityHandle(fn, 0.0, sinr_z_max(params), f"SINR pdf, single SU, {params.replace(n_su=1).scenario_id}")


def sinr_pdf_single_unit(params: ScenarioParams) -> DensityHandle:
    """SINR density for one SU with λ₁ = λ₂ = σ² = 1."""
    if not params.is_unit_rate:
        raise UnsupportedScenarioError("sinr_pdf_single_unit needs lambda1 = lambda2 = sigma2 = 1; use sinr_pdf_single_general")
    p, q = params.p, params.q

    def fn(z):
        z = np.asarray(z, dtype=float)
        zp1 = z + 1.0
        below = np.exp(-z / p) * (1.0 + p / zp1)
        capped = np.exp(-(z + q * zp1) / p) * ((1.0 + q) * z - p / zp1)
        return (below + capped) / (p * zp1)

    return DensityHandle(fn, 0.0, sinr_z_max(params), f"SINR pdf, single SU, unit rates, p{p:g}_q{q:g}")


def sinr_pdf_multi(params: ScenarioParams) -> DensityHandle:
    """
    SINR density for n SUs, with Θ = λ̄ + λ̄₁z:

        f(z) = λ̄₁ λ̄ⁿ e^{-σ²λ̄₁z} Θ^{-1-n} [ n + σ²Θ (1 - Q(n, qΘ)) - n Q(n+1, qΘ) ]
               + λ̄₁ (σ²+q) Q(n, qλ̄) e^{-λ̄₁(σ²+q)z}
    """
    n, lb, l1b, s2, q = params.n_su, params.lambda_bar, params.lambda1_bar, params.sigma2, params.q
    capped_mass = regularized_upper_gamma(n, q * lb)

    def fn(z):
        z = np.asarray(z, dtype=float)
        theta = lb + l1b * z
        bracket = (
            n
            + s2 * theta * (1.0 - regularized_upper_gamma(n, q * theta))
            - n * regularized_upper_gamma(n + 1, q * theta)
        )
        continuous = l1b * np.exp(n * np.log(lb) - s2 * l1b * z - (n + 1) * np.log(theta)) * bracket
        atom = l1b * (s2 + q) * capped_mass * np.exp(-l1b * (s2 + q) * z)
        return continuous + atom

    return DensityHandle(fn, 0.0, sinr_z_max(params), f"SINR pdf, {params.scenario_id}")


def sinr_cdf(params: ScenarioParams) -> Callable[[ArrayLike], ArrayLike]:
    """
    SINR CDF for any rates and SU count: P(γp/Y <= z) = 1 - E[e^{-λ₁zY/p}].

    Vectorized; used as the theory CDF of the Monte Carlo KS gate.
    """
    l1b = params.lambda1_bar

    def fn(z):
        z_arr = np.asarray(z, dtype=float)
        values = np.where(z_arr < 0, 0.0, 1.0 - ni_laplace_transform(params, l1b * np.maximum(z_arr, 0.0)))
        values = np.clip(values, 0.0, 1.0)
        return float(values) if np.ndim(z) == 0 else values

    return fn


# ---------------------------------------------------------------------------
# Single-SU unit-rate closed forms
# ---------------------------------------------------------------------------

def mean_sinr(params: ScenarioParams) -> float:
    """μ = e^{1/p} {Γ(0, 1/p) - Γ(0, (1+q)/p)} + p e^{-q/p} / (1+q)."""
    _require_unit_single(params, "mean SINR")
    p, q = params.p, params.q
    # e^{1/p} Γ(0, (1+q)/p) = e^{-q/p} S((1+q)/p) with S(x) = eˣ E₁(x)
    capped = math.exp(-q / p)
    return scaled_exp_integral(1.0 / p) - capped * scaled_exp_integral((1.0 + q) / p) + p * capped / (1.0 + q)


def outage_probability(params: ScenarioParams, psi: float) -> float:
    """P(SINR <= ψ) = 1 - e^{-ψ/p} / (ψ+1) (1 + ψ e^{-q(ψ+1)/p})."""
    if not psi >= 0:
        raise DomainError(f"outage threshold psi must be nonnegative, got {psi}")
    _require_unit_single(params, "outage probability")
    if math.isinf(psi):
        return 1.0
    p, q = params.p, params.q
    survival = math.exp(-psi / p) / (psi + 1.0) * (1.0 + psi * math.exp(-q * (psi + 1.0) / p))
    return min(1.0, max(0.0, 1.0 - survival))


def transform_to_capacity(sinr_density: DensityHandle) -> DensityHandle:
    """Density of C = ln(1 + SINR) in nats: f_C(x) = f_Z(eˣ - 1) eˣ."""

    def fn(x):
        x = np.asarray(x, dtype=float)
        return sinr_density(np.expm1(x)) * np.exp(x)

    return DensityHandle(fn, 0.0, math.log1p(sinr_density.hi), sinr_density.label.replace("SINR", "capacity"))


def capacity_pdf(params: ScenarioParams) -> DensityHandle:
    """Capacity density (nats) for one SU with unit rates."""
    return transform_to_capacity(sinr_pdf_single_unit(params))


def capacity_cdf(params: ScenarioParams) -> Callable[[ArrayLike], ArrayLike]:
    """P(ln(1 + SINR) <= x) for any scenario."""
    sinr = sinr_cdf(params)

    def fn(x):
        x_arr = np.asarray(x, dtype=float)
        values = np.where(x_arr < 0, 0.0, sinr(np.expm1(np.maximum(x_arr, 0.0))))
        return float(values) if np.ndim(x) == 0 else values

    return fn


def mean_capacity(params: ScenarioParams) -> float:
    """C̄ = 1 - e^{-q/p} + e^{1/p}/p [ (p+q+1) Γ(0, (q+1)/p) - Γ(0, 1/p) ]  (nats)."""
    _require_unit_single(params, "mean capacity")
    p, q = params.p, params.q
    capped = math.exp(-q / p)
    return 1.0 - capped + (
        (p + q + 1.0) * capped * scaled_exp_integral((q + 1.0) / p) - scaled_exp_integral(1.0 / p)
    ) / p


# ---------------------------------------------------------------------------
# Quadrature functionals (any λ, any n)
# ---------------------------------------------------------------------------

def mean_sinr_numeric(params: ScenarioParams, tol: float = oracle.DEFAULT_TOL) -> float:
    return oracle.functional_mean(sinr_pdf_multi(params), oracle.Weight.IDENTITY, tol)


def outage_numeric(params: ScenarioParams, psi: float, tol: float = oracle.DEFAULT_TOL) -> float:
    if not psi >= 0:
        raise DomainError(f"outage threshold psi must be nonnegative, got {psi}")
    return oracle.density_cdf(sinr_pdf_multi(params), psi, tol)


def mean_capacity_numeric(params: ScenarioParams, tol: float = oracle.DEFAULT_TOL) -> float:
    return oracle.functional_mean(sinr_pdf_multi(params), oracle.Weight.LOG1P, tol)


def performance_metrics(params: ScenarioParams, psi: float = 1.0) -> Dict[str, object]:
    """Mean SINR, outage at ψ and mean capacity: closed forms when they apply, quadrature otherwise."""
    if params.is_unit_rate and params.n_su == 1:
        return {
            "mean_sinr": mean_sinr(params),
            "outage": outage_probability(params, psi),
            "mean_capacity_nats": mean_capacity(params),
            "method": "closed_form",
        }
    logger.debug("No closed form for %s; using quadrature", params.scenario_id)
    return {
        "mean_sinr": mean_sinr_numeric(params),
        "outage": outage_numeric(params, psi),
        "mean_capacity_nats": mean_capacity_numeric(params),
        "method": "quadrature",
    }
