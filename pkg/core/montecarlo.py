"""
Monte Carlo simulation of the underlay channel model.

Samples are produced in fixed-size chunks; chunk k draws from its own
counter-based stream Philox(SeedSequence(seed, spawn_key=(k,))), so the
sample stream depends on (seed, samples) only and never on the number of
worker threads.  All variates come from inverse-CDF transforms of the
uniform stream.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.analytic import ScenarioParams
from core.errors import DomainError
from utils.logger import get_logger

logger = get_logger(__name__)

CHUNK_SIZE = 2 ** 16
HISTOGRAM_UPPER_QUANTILE = 99.9
_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class SimConfig:
    samples: int
    seed: int
    workers: int = 1
    bins: int = 200

    def __post_init__(self):
        for name in ("samples", "workers", "bins"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < _MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    def replace(self, **changes) -> "SimConfig":
        values = {"samples": self.samples, "seed": self.seed, "workers": self.workers, "bins": self.bins}
        values.update(changes)
        return SimConfig(**values)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """
    Sorted samples plus a density histogram.

    Samples exactly at ``atom_location`` are counted in ``atom_count`` and never binned;
    non-atom samples outside the histogram range are counted in ``overflow_count``.
    """

    sorted_samples: np.ndarray
    edges: np.ndarray
    counts: np.ndarray
    n: int
    atom_location: Optional[float] = None
    atom_count: int = 0
    overflow_count: int = 0

    def __post_init__(self):
        if self.n < 1 or len(self.sorted_samples) != self.n:
            raise DomainError("an empirical distribution needs at least one sample")
        if not np.all(np.diff(self.edges) > 0):
            raise DomainError("histogram edges must be strictly increasing")
        if int(self.counts.sum()) + self.atom_count + self.overflow_count != self.n:
            raise DomainError("histogram counts, atom count and overflow must add up to n")

    @classmethod
    def from_samples(
        cls,
        samples: np.ndarray,
        bins: int,
        atom_location: Optional[float] = None,
        support_lo: Optional[float] = None,
    ) -> "EmpiricalDistribution":
        samples = np.sort(np.asarray(samples, dtype=float))
        if samples.size == 0:
            raise DomainError("cannot build an empirical distribution from no samples")
        at_atom = samples == atom_location if atom_location is not None else np.zeros(samples.size, dtype=bool)
        regular = samples[~at_atom]

        if support_lo is not None:
            lo = float(support_lo)
        elif regular.size:
            lo = float(regular[0])
        else:
            lo = float(atom_location)
        hi = float(np.percentile(regular, HISTOGRAM_UPPER_QUANTILE)) if regular.size else lo
        if hi <= lo:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, bins + 1)
        in_range = regular[(regular >= lo) & (regular <= hi)]
        counts, _ = np.histogram(in_range, bins=edges)
        return cls(
            sorted_samples=samples,
            edges=edges,
            counts=counts.astype(np.int64),
            n=int(samples.size),
            atom_location=atom_location,
            atom_count=int(at_atom.sum()),
            overflow_count=int(regular.size - in_range.size),
        )

    def ecdf(self, x):
        """Right-continuous empirical CDF."""
        values = np.searchsorted(self.sorted_samples, np.asarray(x, dtype=float), side="right") / self.n
        return float(values) if np.ndim(x) == 0 else values

    def histogram_density(self) -> np.ndarray:
        """Bin heights normalised by the total sample count (atom mass excluded)."""
        return self.counts / (self.n * np.diff(self.edges))


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    """Independent counter-based stream for one chunk."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk_index,))))


def exponential_from_uniform(u, rate: float):
    """Inverse CDF of Exp(rate): -ln(1 - u) / rate."""
    if not rate > 0:
        raise DomainError(f"exponential rate must be positive, got {rate}")
    values = -np.log1p(-np.asarray(u, dtype=float)) / rate
    return float(values) if np.ndim(u) == 0 else values


def draw_channel_gain(rate: float, rng: np.random.Generator) -> float:
    """One Rayleigh-fading power gain, Exp(rate)."""
    return exponential_from_uniform(rng.random(), rate)


def _chunks(samples: int) -> List[Tuple[int, int]]:
    full, rest = divmod(samples, CHUNK_SIZE)
    chunks = [(i, CHUNK_SIZE) for i in range(full)]
    if rest:
        chunks.append((full, rest))
    return chunks


def _run_chunks(cfg: SimConfig, draw: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    chunks = _chunks(cfg.samples)
    logger.debug("Simulating %d samples in %d chunks on %d workers", cfg.samples, len(chunks), cfg.workers)

    def run(chunk: Tuple[int, int]) -> np.ndarray:
        index, size = chunk
        return draw(chunk_generator(cfg.seed, index), size)

    # map() yields in submission order
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(run, chunks))
    return np.concatenate(parts)


def _ni_chunk(params: ScenarioParams, rng: np.random.Generator, size: int) -> np.ndarray:
    alpha = exponential_from_uniform(rng.random((size, params.n_su)), params.lambda2)
    return params.sigma2 + np.minimum(params.p * alpha.sum(axis=1), params.q)


def _sinr_chunk(params: ScenarioParams, rng: np.random.Generator, size: int) -> np.ndarray:
    ni = _ni_chunk(params, rng, size)
    gamma = exponential_from_uniform(rng.random(size), params.lambda1)
    return gamma * params.p / ni


def ni_samples(params: ScenarioParams, cfg: SimConfig) -> np.ndarray:
    """Raw noise-plus-interference samples σ² + min(p Σαᵢ, q), in stream order."""
    return _run_chunks(cfg, lambda rng, size: _ni_chunk(params, rng, size))


def sinr_samples(params: ScenarioParams, cfg: SimConfig) -> np.ndarray:
    """Raw SINR samples γp / (σ² + I), in stream order."""
    return _run_chunks(cfg, lambda rng, size: _sinr_chunk(params, rng, size))


def simulate_ni(params: ScenarioParams, cfg: SimConfig) -> EmpiricalDistribution:
    samples = ni_samples(params, cfg)
    return EmpiricalDistribution.from_samples(
        samples, cfg.bins, atom_location=params.sigma2 + params.q, support_lo=params.sigma2
    )


def simulate_sinr(params: ScenarioParams, cfg: SimConfig) -> EmpiricalDistribution:
    return EmpiricalDistribution.from_samples(sinr_samples(params, cfg), cfg.bins, support_lo=0.0)


def simulate_capacity(params: ScenarioParams, cfg: SimConfig) -> EmpiricalDistribution:
    """Capacity samples ln(1 + SINR) in nats."""
    return EmpiricalDistribution.from_samples(np.log1p(sinr_samples(params, cfg)), cfg.bins, support_lo=0.0)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _require_samples(emp: EmpiricalDistribution) -> None:
    if emp is None or emp.n < 1:
        raise DomainError("estimator needs a nonempty sample")


def outage_estimate(emp: EmpiricalDistribution, psi: float) -> float:
    """Fraction of samples at or below ψ."""
    _require_samples(emp)
    return emp.ecdf(psi)


def mean_estimate(emp: EmpiricalDistribution) -> Tuple[float, float]:
    """Sample mean and its standard error."""
    _require_samples(emp)
    samples = emp.sorted_samples
    mean = float(np.mean(samples))
    if emp.n < 2:
        return mean, math.inf
    return mean, float(np.std(samples, ddof=1) / math.sqrt(emp.n))


def capacity_transform(emp: EmpiricalDistribution, bins: Optional[int] = None) -> EmpiricalDistribution:
    """ln(1 + z) applied to SINR samples."""
    _require_samples(emp)
    return EmpiricalDistribution.from_samples(np.log1p(emp.sorted_samples), bins or len(emp.counts), support_lo=0.0)


def atom_frequency(emp: EmpiricalDistribution) -> float:
    _require_samples(emp)
    return emp.atom_count / emp.n


def binomial_tolerance(p: float, n: int, k: float = 3.0) -> float:
    """k standard deviations of a frequency estimate with success probability p."""
    if not 0.0 <= p <= 1.0 or n < 1:
        raise DomainError("binomial_tolerance needs p in [0, 1] and n >= 1")
    return k * math.sqrt(p * (1.0 - p) / n)


def dkw_bound(n: int, alpha: float = 1e-3) -> float:
    """Dvoretzky-Kiefer-Wolfowitz band: P(sup|ECDF - F| > ε) <= alpha."""
    if n < 1 or not 0.0 < alpha < 1.0:
        raise DomainError("dkw_bound needs n >= 1 and alpha in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def ks_statistic(emp: EmpiricalDistribution, theory_cdf: Callable) -> float:
    """
    sup |ECDF - F| over the sample points, checked at each point and just below it.

    ``theory_cdf`` must accept numpy arrays and be right-continuous; atoms in
    either the sample or the theory are handled by the left-limit comparison.
    """
    _require_samples(emp)
    xs = np.unique(emp.sorted_samples)
    ecdf_at = np.searchsorted(emp.sorted_samples, xs, side="right") / emp.n
    ecdf_below = np.searchsorted(emp.sorted_samples, xs, side="left") / emp.n
    theory_at = np.asarray(theory_cdf(xs), dtype=float)
    theory_below = np.asarray(theory_cdf(np.nextafter(xs, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(ecdf_at - theory_at)), np.max(np.abs(ecdf_below - theory_below))))
