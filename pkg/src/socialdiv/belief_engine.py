"""Response laws, the public-belief threshold recursion and the cascade test.

Agent n decides 1 when ``llr + xi > tau_n`` and 0 when it is below; an
exact tie is settled by a fair coin.  ``tau_n`` is minus the log-likelihood
ratio of the decisions seen so far and is the only social state carried
between agents.  Observers know the laws of the private LLR and of the
diversity term, so the probability that an agent facing ``tau`` decides 0
under world ``w`` is the mid-point CDF of ``llr + xi`` at ``tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .diversity_models import DiversityModel, xi_distribution
from .prob_core import (
    Atoms,
    Gaussian,
    GaussianMixture,
    ScalarDistribution,
    convolve_with_noise,
    essential_bounds,
    mid_cdf,
    mid_sf,
    tie_tol,
)
from .signal_models import SignalModel, llr_distribution


@dataclass(frozen=True, eq=False)
class BeliefEngine:
    """Laws of ``llr + xi`` under W=0 and W=1 plus their common support bounds."""

    laws: Tuple[ScalarDistribution, ScalarDistribution]
    lower: float
    upper: float

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def atomic(self) -> bool:
        return all(isinstance(f, Atoms) for f in self.laws)

    def components(self):
        """Shared (centers, scales, weights0, weights1) table for the kernels.

        Scale 0 marks an atom.  Returns None for gridded laws, which the
        kernels do not handle.
        """
        table = {}
        for w, law in enumerate(self.laws):
            if isinstance(law, Atoms):
                parts = zip(law.values, np.zeros(law.values.size), law.masses)
            elif isinstance(law, Gaussian):
                parts = [(law.mean, law.sd, 1.0)]
            elif isinstance(law, GaussianMixture):
                parts = zip(law.centers, np.sqrt(law.variances), law.weights)
            else:
                return None
            for c, s, m in parts:
                table.setdefault((float(c), float(s)), [0.0, 0.0])[w] += float(m)
        keys = sorted(table)
        centers = np.array([k[0] for k in keys])
        scales = np.array([k[1] for k in keys])
        weights = np.array([table[k] for k in keys])
        return centers, scales, weights[:, 0].copy(), weights[:, 1].copy()


@dataclass(frozen=True)
class PublicBelief:
    tau: float
    step: int
    in_cascade: bool


def make_belief_engine(signal: SignalModel, diversity: DiversityModel) -> BeliefEngine:
    noise = xi_distribution(diversity)
    laws = tuple(convolve_with_noise(llr_distribution(signal, w), noise) for w in (0, 1))
    lower, upper = essential_bounds(laws[0])
    if (lower, upper) != essential_bounds(laws[1]):
        raise AssertionError("response laws under the two worlds have different supports")
    return BeliefEngine(laws, lower, upper)


def response_prob(e: BeliefEngine, w: int, tau):
    """Probability that an agent facing ``tau`` decides 0 under world ``w``."""
    return mid_cdf(e.laws[w], tau)


def response_sf(e: BeliefEngine, w: int, tau):
    """Probability of deciding 1; computed from the upper tail, not as ``1 - p``."""
    return mid_sf(e.laws[w], tau)


def is_cascade(e: BeliefEngine, tau):
    """True where the decision at ``tau`` is deterministic under both worlds.

    Unbounded support never cascades, so that case is answered from the
    bounds alone rather than from possibly underflowed tail values.
    """
    tau = np.asarray(tau, dtype=float)
    if not e.bounded:
        out = np.zeros(tau.shape, dtype=bool)
    else:
        out = np.ones(tau.shape, dtype=bool)
        for law in e.laws:
            out &= (mid_cdf(law, tau) == 0.0) | (mid_sf(law, tau) == 0.0)
    return bool(out) if out.ndim == 0 else out


def next_tau(e: BeliefEngine, tau, x):
    """Vectorised threshold update; cascade states are left untouched."""
    tau = np.asarray(tau, dtype=float)
    x = np.asarray(x)
    frozen = np.asarray(is_cascade(e, tau))
    num = np.where(x == 0, response_prob(e, 1, tau), response_sf(e, 1, tau))
    den = np.where(x == 0, response_prob(e, 0, tau), response_sf(e, 0, tau))
    live = ~frozen
    if np.any(live & ((num <= 0.0) | (den <= 0.0))):
        raise FloatingPointError(
            "zero response probability outside a cascade state; the response laws are inconsistent"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.log(num / den)
    out = np.where(live, tau - step, tau)
    return float(out) if out.ndim == 0 else out


def initial_tau(e: Optional[BeliefEngine] = None) -> PublicBelief:
    in_cascade = bool(is_cascade(e, 0.0)) if e is not None else False
    return PublicBelief(0.0, 1, in_cascade)


def update_tau(e: BeliefEngine, b: PublicBelief, x: int) -> PublicBelief:
    if b.in_cascade:
        return PublicBelief(b.tau, b.step + 1, True)
    tau = next_tau(e, b.tau, x)
    return PublicBelief(tau, b.step + 1, bool(is_cascade(e, tau)))


def decide_with_coin(value, tau, coin):
    """Decision for ``llr + xi = value`` given a uniform ``coin`` for ties."""
    value = np.asarray(value, dtype=float)
    tau = np.asarray(tau, dtype=float)
    tie = np.abs(value - tau) <= tie_tol(tau)
    out = np.where(tie, np.asarray(coin) < 0.5, value > tau).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def decide(e: BeliefEngine, llr_s: float, xi: float, tau: float, rng: np.random.Generator) -> int:
    return decide_with_coin(llr_s + xi, tau, rng.random())
