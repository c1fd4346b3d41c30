"""One-dimensional laws of log-likelihood ratios and noise terms.

Four variants are supported: finite atoms, a single Gaussian, a finite
Gaussian mixture and a gridded density.  Every law exposes a *mid-point*
CDF, ``P(V < z) + P(V = z) / 2``, which is what the fair-coin tie rule of
the decision model needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve
from scipy.special import erfc

from .errors import ConfigurationError

SQRT2 = math.sqrt(2.0)

# Two reals closer than this (relative, floor 1.0) are the same point:
# atom merging and tie detection both use it.
TIE_RTOL = 1e-12

# Grid convolution settings.
GRID_POINTS = 2**14
GRID_PAD_SD = 8.0


def tie_tol(z):
    return TIE_RTOL * np.maximum(1.0, np.abs(z))


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF.

    Only the lower tail is evaluated directly; the upper half is its
    complement, so ``Phi(z) + Phi(-z) == 1`` holds by construction.
    """
    if z <= 0.0:
        if z < -38.0:
            return 0.0
        return 0.5 * math.erfc(-z / SQRT2)
    return 1.0 - std_normal_cdf(-z)


def _phi_split(z):
    """Vectorised (Phi(z), Phi(-z)), each accurate in its own tail."""
    z = np.asarray(z, dtype=float)
    tail = 0.5 * erfc(np.abs(z) / SQRT2)
    body = 1.0 - tail
    lower = np.where(z < 0.0, tail, body)
    upper = np.where(z < 0.0, body, tail)
    return lower, upper


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Atoms:
    """Finite discrete law; values strictly increasing, masses positive."""

    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        m = _readonly(self.masses)
        if v.size == 0 or v.shape != m.shape:
            raise ConfigurationError("atoms need matching, non-empty values and masses")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("atom values must be finite")
        if np.any(np.diff(v) <= 0):
            raise ConfigurationError("atom values must be strictly increasing")
        if np.any(m <= 0):
            raise ConfigurationError("atom masses must be strictly positive")
        if abs(m.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"atom masses sum to {m.sum()!r}, not 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)

    def mid_cdf(self, z):
        z = np.asarray(z, dtype=float)[..., None]
        tie = np.abs(self.values - z) <= tie_tol(z)
        below = (self.values < z) & ~tie
        return (self.masses * (below + 0.5 * tie)).sum(axis=-1)

    def mid_sf(self, z):
        z = np.asarray(z, dtype=float)[..., None]
        tie = np.abs(self.values - z) <= tie_tol(z)
        above = (self.values > z) & ~tie
        return (self.masses * (above + 0.5 * tie)).sum(axis=-1)

    @property
    def is_identity(self) -> bool:
        return self.values.size == 1 and self.values[0] == 0.0


@dataclass(frozen=True)
class Gaussian:
    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and self.variance > 0 and np.isfinite(self.variance)):
            raise ConfigurationError(
                f"Gaussian needs a finite mean and variance > 0, got ({self.mean}, {self.variance})"
            )
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "variance", float(self.variance))

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def mid_cdf(self, z):
        return _phi_split((np.asarray(z, dtype=float) - self.mean) / self.sd)[0]

    def mid_sf(self, z):
        return _phi_split((np.asarray(z, dtype=float) - self.mean) / self.sd)[1]

    def density(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(-0.5 * (z - self.mean) ** 2 / self.variance) / math.sqrt(
            2 * math.pi * self.variance
        )


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    centers: np.ndarray
    variances: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        c, v, w = (_readonly(a) for a in (self.centers, self.variances, self.weights))
        if c.size == 0 or not (c.shape == v.shape == w.shape):
            raise ConfigurationError("mixture needs matching, non-empty component arrays")
        if np.any(v <= 0) or not np.all(np.isfinite(v)) or not np.all(np.isfinite(c)):
            raise ConfigurationError("mixture variances must be finite and > 0")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"mixture weights must be >= 0 and sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "variances", v)
        object.__setattr__(self, "weights", w)

    def mid_cdf(self, z):
        z = np.asarray(z, dtype=float)[..., None]
        return (self.weights * _phi_split((z - self.centers) / np.sqrt(self.variances))[0]).sum(-1)

    def mid_sf(self, z):
        z = np.asarray(z, dtype=float)[..., None]
        return (self.weights * _phi_split((z - self.centers) / np.sqrt(self.variances))[1]).sum(-1)

    def density(self, z):
        z = np.asarray(z, dtype=float)[..., None]
        k = np.exp(-0.5 * (z - self.centers) ** 2 / self.variances) / np.sqrt(
            2 * np.pi * self.variances
        )
        return (self.weights * k).sum(-1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Density sampled at ``origin + i * step``; linear between points."""

    origin: float
    step: float
    densities: np.ndarray

    def __post_init__(self):
        d = _readonly(self.densities)
        if not self.step > 0:
            raise ConfigurationError("grid step must be > 0")
        if d.size < 2 or np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ConfigurationError("grid needs >= 2 finite nonnegative densities")
        cum = np.concatenate(([0.0], np.cumsum(0.5 * self.step * (d[1:] + d[:-1]))))
        if abs(cum[-1] - 1.0) > 1e-6:
            raise ConfigurationError(f"grid density integrates to {cum[-1]!r}, not 1")
        cum.setflags(write=False)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "densities", d)
        object.__setattr__(self, "_cum", cum)

    @property
    def points(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.densities.size)

    @property
    def stop(self) -> float:
        return self.origin + self.step * (self.densities.size - 1)

    def density(self, z):
        return np.interp(z, self.points, self.densities, left=0.0, right=0.0)

    def mid_cdf(self, z):
        z = np.asarray(z, dtype=float)
        d = self.densities
        t = np.clip((z - self.origin) / self.step, 0.0, d.size - 1)
        i = np.minimum(np.floor(t).astype(int), d.size - 2)
        f = t - i
        part = self.step * f * (d[i] + 0.5 * f * (d[i + 1] - d[i]))
        return np.clip((self._cum[i] + part) / self._cum[-1], 0.0, 1.0)

    def mid_sf(self, z):
        return 1.0 - self.mid_cdf(z)


ScalarDistribution = Union[Atoms, Gaussian, GaussianMixture, Grid]


def atoms_from_pairs(values, masses) -> Atoms:
    """Build an Atoms law from unsorted pairs, merging coincident values."""
    v = np.asarray(values, dtype=float).reshape(-1)
    m = np.asarray(masses, dtype=float).reshape(-1)
    order = np.argsort(v, kind="stable")
    v, m = v[order], m[order]
    keep_v, keep_m = [v[0]], [m[0]]
    for x, p in zip(v[1:], m[1:]):
        if abs(x - keep_v[-1]) <= TIE_RTOL * max(1.0, abs(keep_v[-1])):
            keep_m[-1] += p
        else:
            keep_v.append(x)
            keep_m.append(p)
    keep_m = np.array(keep_m)
    nz = keep_m > 0
    keep_m = keep_m[nz] / keep_m[nz].sum()
    return Atoms(np.array(keep_v)[nz], keep_m)


def degenerate(value: float = 0.0) -> Atoms:
    return Atoms([value], [1.0])


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def mid_cdf(d: ScalarDistribution, z):
    """``P(V < z) + P(V = z) / 2`` for ``V ~ d``; vectorised over ``z``."""
    out = d.mid_cdf(z)
    return float(out) if np.ndim(out) == 0 else out


def mid_sf(d: ScalarDistribution, z):
    """``P(V > z) + P(V = z) / 2``, accurate in the upper tail."""
    out = d.mid_sf(z)
    return float(out) if np.ndim(out) == 0 else out


def essential_bounds(d: ScalarDistribution) -> Tuple[float, float]:
    if isinstance(d, Atoms):
        return float(d.values[0]), float(d.values[-1])
    if isinstance(d, Grid):
        return d.origin, d.stop
    return -math.inf, math.inf


def moments(d: ScalarDistribution) -> Tuple[float, float]:
    """(mean, variance) of ``d``."""
    if isinstance(d, Atoms):
        m = float(d.masses @ d.values)
        return m, float(d.masses @ (d.values - m) ** 2)
    if isinstance(d, Gaussian):
        return d.mean, d.variance
    if isinstance(d, GaussianMixture):
        m = float(d.weights @ d.centers)
        return m, float(d.weights @ (d.variances + (d.centers - m) ** 2))
    x = d.points
    m = float(trapezoid(x * d.densities, dx=d.step))
    return m, float(trapezoid((x - m) ** 2 * d.densities, dx=d.step))


def _practical_support(d: ScalarDistribution) -> Tuple[float, float]:
    if isinstance(d, Gaussian):
        return d.mean - GRID_PAD_SD * d.sd, d.mean + GRID_PAD_SD * d.sd
    if isinstance(d, GaussianMixture):
        sd = np.sqrt(d.variances)
        return float(np.min(d.centers - GRID_PAD_SD * sd)), float(np.max(d.centers + GRID_PAD_SD * sd))
    return essential_bounds(d)


def _sample_on(d: ScalarDistribution, lo: float, step: float, count: int) -> np.ndarray:
    return np.asarray(d.density(lo + step * np.arange(count)), dtype=float)


def _numeric_convolution(d: ScalarDistribution, noise: ScalarDistribution) -> Grid:
    lo_d, hi_d = _practical_support(d)
    lo_n, hi_n = _practical_support(noise)
    step = ((hi_d + hi_n) - (lo_d + lo_n)) / (GRID_POINTS - 1)

    # Atoms have no density: shift the other law's density instead.
    if isinstance(d, Atoms) or isinstance(noise, Atoms):
        atoms, other = (d, noise) if isinstance(d, Atoms) else (noise, d)
        lo = lo_d + lo_n
        z = lo + step * np.arange(GRID_POINTS)
        dens = sum(m * other.density(z - a) for a, m in zip(atoms.values, atoms.masses))
    else:
        n_d = int(np.ceil((hi_d - lo_d) / step)) + 1
        n_n = int(np.ceil((hi_n - lo_n) / step)) + 1
        dens = fftconvolve(_sample_on(d, lo_d, step, n_d), _sample_on(noise, lo_n, step, n_n)) * step
        dens = np.clip(dens, 0.0, None)
        lo = lo_d + lo_n
    dens = dens / trapezoid(dens, dx=step)
    return Grid(lo, step, dens)


def convolve_with_noise(d: ScalarDistribution, noise: ScalarDistribution) -> ScalarDistribution:
    """Law of ``V + N`` for independent ``V ~ d`` and ``N ~ noise``.

    Closed forms are used for every pair of atoms and Gaussians; a gridded
    operand on either side switches to numeric convolution on a
    ``GRID_POINTS`` grid.  Noise given as a Gaussian mixture is rejected.
    """
    if isinstance(noise, Atoms) and noise.is_identity:
        return d
    if isinstance(noise, GaussianMixture):
        raise ConfigurationError(
            "unsupported noise law GaussianMixture; noise must be Atoms, Gaussian or Grid"
        )
    if isinstance(d, Grid) or isinstance(noise, Grid):
        return _numeric_convolution(d, noise)

    if isinstance(d, Atoms) and isinstance(noise, Atoms):
        v = (d.values[:, None] + noise.values[None, :]).ravel()
        m = (d.masses[:, None] * noise.masses[None, :]).ravel()
        return atoms_from_pairs(v, m)
    if isinstance(d, Atoms) and isinstance(noise, Gaussian):
        return GaussianMixture(
            d.values + noise.mean, np.full(d.values.size, noise.variance), d.masses
        )
    if isinstance(d, Gaussian) and isinstance(noise, Gaussian):
        return Gaussian(d.mean + noise.mean, d.variance + noise.variance)
    if isinstance(d, Gaussian) and isinstance(noise, Atoms):
        return GaussianMixture(
            d.mean + noise.values, np.full(noise.values.size, d.variance), noise.masses
        )
    if isinstance(d, GaussianMixture) and isinstance(noise, Gaussian):
        return GaussianMixture(d.centers + noise.mean, d.variances + noise.variance, d.weights)
    if isinstance(d, GaussianMixture) and isinstance(noise, Atoms):
        return GaussianMixture(
            (d.centers[:, None] + noise.values[None, :]).ravel(),
            np.repeat(d.variances, noise.values.size),
            (d.weights[:, None] * noise.masses[None, :]).ravel(),
        )
    raise ConfigurationError(
        f"unsupported convolution pair ({type(d).__name__}, {type(noise).__name__})"
    )
