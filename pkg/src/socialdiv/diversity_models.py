"""Laws of the per-agent diversity term.

The diversity term of agent n is ``log((1 - theta_n) / theta_n) - nu_n``:
``theta_n`` is the agent's prior belief that W=1 and ``nu_n`` its utility
asymmetry.  Either can be heterogeneous across agents; the term enters
the decision rule as additive noise on the private LLR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError
from .prob_core import Atoms, Gaussian, ScalarDistribution, atoms_from_pairs, degenerate


@dataclass(frozen=True)
class Degenerate:
    """Homogeneous agents: the diversity term is identically zero."""


@dataclass(frozen=True)
class GaussianNoise:
    variance: float

    def __post_init__(self):
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ConfigurationError(
                f"diversity variance must be finite and > 0, got {self.variance}"
            )


@dataclass(frozen=True, eq=False)
class AtomNoise:
    law: Atoms


@dataclass(frozen=True, eq=False)
class Composed:
    """Diversity built from a discrete prior-belief law and a discrete utility law."""

    theta: Atoms
    nu: Atoms

    def __post_init__(self):
        if np.any(self.theta.values <= 0.0) or np.any(self.theta.values >= 1.0):
            raise ConfigurationError("prior-belief atoms must lie strictly inside (0, 1)")


DiversityModel = Union[Degenerate, GaussianNoise, AtomNoise, Composed]


def gaussian_noise(variance: float) -> DiversityModel:
    """Zero-mean Gaussian diversity; variance 0 means homogeneous agents."""
    if variance == 0:
        return Degenerate()
    if variance < 0:
        raise ConfigurationError(f"diversity variance must be >= 0, got {variance}")
    return GaussianNoise(float(variance))


def atom_noise(values, masses) -> AtomNoise:
    return AtomNoise(atoms_from_pairs(values, masses))


def composed(theta_values, theta_masses, nu_values, nu_masses) -> Composed:
    return Composed(atoms_from_pairs(theta_values, theta_masses), atoms_from_pairs(nu_values, nu_masses))


def xi_distribution(d: DiversityModel) -> ScalarDistribution:
    if isinstance(d, Degenerate):
        return degenerate(0.0)
    if isinstance(d, GaussianNoise):
        return Gaussian(0.0, d.variance)
    if isinstance(d, AtomNoise):
        return d.law
    prior_term = np.log((1.0 - d.theta.values) / d.theta.values)
    values = prior_term[:, None] - d.nu.values[None, :]
    masses = d.theta.masses[:, None] * d.nu.masses[None, :]
    return atoms_from_pairs(values.ravel(), masses.ravel())


def sample_xi(d: DiversityModel, rng: np.random.Generator, size=None):
    """I.i.d. draws of the diversity term."""
    if isinstance(d, Degenerate):
        return 0.0 if size is None else np.zeros(size)
    if isinstance(d, GaussianNoise):
        out = math.sqrt(d.variance) * rng.standard_normal(size)
        return float(out) if size is None else out
    law = xi_distribution(d)
    u = rng.random(size)
    idx = np.minimum(np.searchsorted(np.cumsum(law.masses), u, side="right"), law.values.size - 1)
    out = law.values[idx]
    return float(out) if size is None else out
