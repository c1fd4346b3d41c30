"""Private-signal families and their log-likelihood-ratio laws.

Decisions only see a signal through its LLR, so sampling happens directly
in LLR space and raw signals are never materialised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError
from .prob_core import Atoms, Gaussian, ScalarDistribution, atoms_from_pairs


@dataclass(frozen=True)
class BinarySymmetric:
    """Binary signal flipped w.p. ``crossover`` relative to the world."""

    crossover: float

    def __post_init__(self):
        if not 0.0 < self.crossover < 0.5:
            raise ConfigurationError(
                f"crossover must lie in the open interval (0, 0.5), got {self.crossover}"
            )

    @property
    def llr_magnitude(self) -> float:
        return math.log((1.0 - self.crossover) / self.crossover)


@dataclass(frozen=True)
class SymmetricGaussian:
    """Signal ~ N(+mean, variance) under W=1 and N(-mean, variance) under W=0."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.mean == 0 or not math.isfinite(self.mean):
            raise ConfigurationError("Gaussian signal mean must be finite and nonzero")
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ConfigurationError("Gaussian signal variance must be finite and > 0")

    @property
    def separation(self) -> float:
        """Squared distance between the two hypotheses, ``4 mean^2 / variance``."""
        return 4.0 * self.mean**2 / self.variance

    def llr(self, s):
        return 2.0 * self.mean * np.asarray(s, dtype=float) / self.variance


@dataclass(frozen=True, eq=False)
class FiniteAlphabet:
    """Discrete signal given directly by (llr, p0, p1) per symbol."""

    llr_values: np.ndarray
    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        v, p0, p1 = (np.asarray(a, dtype=float).reshape(-1) for a in (self.llr_values, self.p0, self.p1))
        if not (v.size > 0 and v.shape == p0.shape == p1.shape):
            raise ConfigurationError("finite alphabet needs matching, non-empty arrays")
        for name, p in (("p0", p0), ("p1", p1)):
            if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ConfigurationError(f"{name} must be strictly positive and sum to 1")
        declared = np.log(p1 / p0)
        if np.any(np.abs(declared - v) > 1e-9):
            raise ConfigurationError("declared llr values disagree with log(p1/p0)")
        if np.all(np.abs(v) <= 1e-12):
            raise ConfigurationError("finite alphabet carries no information (all llr = 0)")
        for a in (v, p0, p1):
            a.setflags(write=False)
        object.__setattr__(self, "llr_values", v)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)


SignalModel = Union[BinarySymmetric, SymmetricGaussian, FiniteAlphabet]


def make_binary_symmetric(crossover: float) -> BinarySymmetric:
    return BinarySymmetric(crossover)


def make_symmetric_gaussian(mean: float, variance: float) -> SymmetricGaussian:
    return SymmetricGaussian(mean, variance)


def make_finite_alphabet(p0, p1) -> FiniteAlphabet:
    """Finite alphabet whose llr values are computed from the two pmfs."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return FiniteAlphabet(np.log(p1 / p0), p0, p1)


def llr_distribution(m: SignalModel, w: int) -> ScalarDistribution:
    """Exact law of the private LLR given the world ``w``."""
    if isinstance(m, BinarySymmetric):
        a = m.llr_magnitude
        eps = m.crossover
        masses = [eps, 1.0 - eps] if w == 1 else [1.0 - eps, eps]
        return Atoms([-a, a], masses)
    if isinstance(m, SymmetricGaussian):
        d2 = m.separation
        return Gaussian(d2 / 2.0 if w == 1 else -d2 / 2.0, d2)
    return atoms_from_pairs(m.llr_values, m.p1 if w == 1 else m.p0)


def _as_shape(size) -> tuple:
    if size is None:
        return ()
    return tuple(size) if np.iterable(size) else (int(size),)


def sample_llr(m: SignalModel, w, rng: np.random.Generator, size=None):
    """Draw private LLRs under world(s) ``w``.

    ``w`` may be an array broadcastable to ``size``; each entry selects the
    world for the corresponding draw.
    """
    w = np.asarray(w)
    shape = np.broadcast_shapes(w.shape, _as_shape(size))
    if isinstance(m, BinarySymmetric):
        a = m.llr_magnitude
        agree = rng.random(shape) >= m.crossover
        out = np.where(agree == (w == 1), a, -a)
    elif isinstance(m, SymmetricGaussian):
        d2 = m.separation
        z = rng.standard_normal(shape)
        out = np.where(w == 1, d2 / 2.0, -d2 / 2.0) + math.sqrt(d2) * z
    else:
        law1 = llr_distribution(m, 1)
        law0 = llr_distribution(m, 0)
        u = rng.random(shape)
        i1 = np.minimum(np.searchsorted(np.cumsum(law1.masses), u, side="right"), law1.values.size - 1)
        i0 = np.minimum(np.searchsorted(np.cumsum(law0.masses), u, side="right"), law0.values.size - 1)
        out = np.where(w == 1, law1.values[i1], law0.values[i0])
    return float(out) if out.ndim == 0 else out
