"""
Mixed continuous/discrete probability laws.

A law is an absolutely continuous density on [support_lo, support_hi] plus a
finite, ordered set of point masses (atoms).  CDFs follow the H(0) = 1
convention: they are right-continuous and an atom is included at its own
location.  Laws are immutable; density handles must be pure and accept
numpy arrays.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import DomainError

ArrayLike = Union[float, np.ndarray]
Handle = Callable[[ArrayLike], ArrayLike]


def _scalar_or_array(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


@dataclass(frozen=True)
class Atom:
    """Point mass ``mass`` at ``location``."""

    location: float
    mass: float

    def __post_init__(self):
        if not 0.0 < self.mass <= 1.0:
            raise DomainError(f"atom mass must lie in (0, 1], got {self.mass}")
        if not math.isfinite(self.location):
            raise DomainError(f"atom location must be finite, got {self.location}")


@dataclass(frozen=True)
class DensityHandle:
    """
    Callable density on [lo, hi], zero outside.

    ``hi`` is the certified truncation point (Z_MAX for SINR densities):
    the mass beyond it is below the tolerance the producer guarantees.
    """

    fn: Handle
    lo: float
    hi: float
    label: str = ""
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"density support must satisfy lo < hi, got [{self.lo}, {self.hi}]")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        inside = (arr >= self.lo) & (arr <= self.hi)
        clamped = np.clip(arr, self.lo, self.hi)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            values = np.where(inside, self.fn(clamped), 0.0)
        return _scalar_or_array(values, x)

    def split_points(self) -> Tuple[float, ...]:
        inner = sorted(b for b in self.breakpoints if self.lo < b < self.hi)
        return (self.lo, *inner, self.hi)


@dataclass(frozen=True)
class MixedDistribution:
    """
    Continuous density plus atoms.

    Args:
        support_lo: lower edge of the support
        continuous_density: density of the absolutely continuous part (vectorized)
        atoms: point masses; sorted on construction, locations must be distinct
        description: text label
        support_hi: the continuous part vanishes above this point
        breakpoints: discontinuities of the density inside the support
        decay_rate: exponential envelope rate of the density, used to truncate
            semi-infinite integrals with a certified bound
        continuous_cdf: closed form of ∫_{support_lo}^{x} continuous_density, if known
    """

    support_lo: float
    continuous_density: Handle
    atoms: Tuple[Atom, ...] = ()
    description: str = ""
    support_hi: float = math.inf
    breakpoints: Tuple[float, ...] = ()
    decay_rate: Optional[float] = None
    continuous_cdf: Optional[Handle] = field(default=None, compare=False)

    def __post_init__(self):
        atoms = tuple(sorted(self.atoms, key=lambda a: a.location))
        for prev, nxt in zip(atoms, atoms[1:]):
            if prev.location == nxt.location:
                raise DomainError(f"duplicate atom location {prev.location}")
        if atoms and atoms[0].location < self.support_lo:
            raise DomainError("atom located below support_lo")
        if not self.support_lo < self.support_hi:
            raise DomainError("support_hi must exceed support_lo")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "breakpoints", tuple(sorted(self.breakpoints)))

    @property
    def total_atom_mass(self) -> float:
        return float(sum(a.mass for a in self.atoms))

    def split_points(self) -> Tuple[float, ...]:
        """Sorted support edges, breakpoints and atom locations: where quadrature must split."""
        points = {self.support_lo}
        points.update(b for b in self.breakpoints if b > self.support_lo)
        points.update(a.location for a in self.atoms)
        if math.isfinite(self.support_hi):
            points.add(self.support_hi)
        return tuple(sorted(points))

    def continuous_pdf_at(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        # H(0) = 1: the density is already switched off at support_hi itself
        inside = (arr >= self.support_lo) & (arr < self.support_hi)
        clamped = np.clip(arr, self.support_lo, self.support_hi if math.isfinite(self.support_hi) else None)
        with np.errstate(over="ignore", invalid="ignore"):
            values = np.where(inside, self.continuous_density(clamped), 0.0)
        return _scalar_or_array(values, x)

    def atom_mass_at(self, x: float) -> float:
        for atom in self.atoms:
            if atom.location == x:
                return atom.mass
        return 0.0

    def _continuous_mass_below(self, arr: np.ndarray) -> np.ndarray:
        if self.continuous_cdf is not None:
            upper = np.clip(arr, self.support_lo, self.support_hi if math.isfinite(self.support_hi) else None)
            return np.asarray(self.continuous_cdf(upper), dtype=float)
        from core.oracle import law_continuous_mass  # circular

        flat = [law_continuous_mass(self, float(v)) for v in arr.ravel()]
        return np.asarray(flat, dtype=float).reshape(arr.shape)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        values = np.where(arr < self.support_lo, 0.0, self._continuous_mass_below(np.maximum(arr, self.support_lo)))
        for atom in self.atoms:
            values = values + np.where(arr >= atom.location, atom.mass, 0.0)
        values = np.clip(values, 0.0, 1.0)
        return _scalar_or_array(values, x)


def cdf(d: MixedDistribution, x: ArrayLike) -> ArrayLike:
    """Right-continuous CDF: continuous mass up to x plus atoms located at or below x."""
    return d.cdf(x)


def continuous_pdf_at(d: MixedDistribution, x: ArrayLike) -> ArrayLike:
    """Density of the absolutely continuous part; atoms are reported by atom_mass_at."""
    return d.continuous_pdf_at(x)


def atom_mass_at(d: MixedDistribution, x: float) -> float:
    """Mass of the atom located exactly at x, 0.0 if there is none."""
    return d.atom_mass_at(x)


def total_atom_mass(d: MixedDistribution) -> float:
    return d.total_atom_mass


def split_points(d: MixedDistribution) -> Sequence[float]:
    return d.split_points()
