"""Monte Carlo over realizations of the sequential decision process.

Realizations are grouped in fixed blocks of ``BLOCK_RUNS``.  Block ``b``
draws all its randomness from ``SeedSequence(master_seed,
spawn_key=(b,))``, so the draws of run ``r`` depend only on the master
seed and ``r``.  Blocks are reduced by integer addition in block order,
which makes the result independent of how many threads ran them.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .belief_engine import (
    BeliefEngine,
    PublicBelief,
    decide_with_coin,
    initial_tau,
    make_belief_engine,
    update_tau,
)
from .diversity_models import DiversityModel, sample_xi
from .errors import ConfigurationError, UnsupportedModelError
from .signal_models import SignalModel, sample_llr

log = logging.getLogger(__name__)

BLOCK_RUNS = 1024


@dataclass(frozen=True)
class RunConfig:
    signal: SignalModel
    diversity: DiversityModel
    n_agents: int
    n_runs: int
    prior_p1: float = 0.5
    master_seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1:
            raise ConfigurationError("n_agents must be >= 1")
        if self.n_runs < 1:
            raise ConfigurationError("n_runs must be >= 1")
        if not 0.0 <= self.prior_p1 <= 1.0:
            raise ConfigurationError("prior_p1 must lie in [0, 1]")


@dataclass
class TrajectoryRecord:
    world: int
    decisions: np.ndarray
    cascade_onset: Optional[int]
    final_tau: float

    def __post_init__(self):
        k = self.cascade_onset
        if k is not None and np.any(self.decisions[k - 1 :] != self.decisions[k - 1]):
            raise AssertionError(f"decisions change after cascade onset {k}")


@dataclass
class LearningCurve:
    """Per-agent correct counts, split by the realized world."""

    correct_by_world: np.ndarray  # (2, n_agents)
    runs_by_world: np.ndarray  # (2,)
    cascade_runs: int = 0
    agents: np.ndarray = field(init=False)

    def __post_init__(self):
        self.agents = np.arange(1, self.correct_by_world.shape[1] + 1)

    @property
    def runs(self) -> int:
        return int(self.runs_by_world.sum())

    @property
    def correct(self) -> np.ndarray:
        return self.correct_by_world.sum(axis=0)

    @property
    def accuracy(self) -> np.ndarray:
        return self.correct / self.runs

    @property
    def error_rate(self) -> np.ndarray:
        return 1.0 - self.accuracy

    @property
    def std_error(self) -> np.ndarray:
        p = self.accuracy
        return np.sqrt(p * (1.0 - p) / self.runs)

    def accuracy_given(self, w: int) -> np.ndarray:
        return self.correct_by_world[w] / self.runs_by_world[w]

    def __add__(self, other: "LearningCurve") -> "LearningCurve":
        return LearningCurve(
            self.correct_by_world + other.correct_by_world,
            self.runs_by_world + other.runs_by_world,
            self.cascade_runs + other.cascade_runs,
        )


# ---------------------------------------------------------------------------
# Reference path: one realization, scalar updates through belief_engine
# ---------------------------------------------------------------------------


def _play(e, s, d, belief: PublicBelief, n_from: int, n_to: int, w: int, rng,
          llr_values=None, xi_values=None, coins=None):
    """Agents ``n_from..n_to`` (1-based) starting from ``belief``."""
    decisions = []
    onset = None
    for i, n in enumerate(range(n_from, n_to + 1)):
        if belief.in_cascade and onset is None:
            onset = n
        lam = sample_llr(s, w, rng) if llr_values is None or i >= len(llr_values) else llr_values[i]
        xi = sample_xi(d, rng) if xi_values is None or i >= len(xi_values) else xi_values[i]
        coin = rng.random() if coins is None or i >= len(coins) else coins[i]
        x = decide_with_coin(lam + xi, belief.tau, coin)
        decisions.append(x)
        belief = update_tau(e, belief, x)
    return np.array(decisions, dtype=np.int8), onset, belief


def run_realization(e: BeliefEngine, s: SignalModel, d: DiversityModel, n_agents: int, w: int,
                    rng: np.random.Generator, llr_values=None, xi_values=None, coins=None
                    ) -> TrajectoryRecord:
    """Simulate one realization agent by agent.

    ``llr_values``, ``xi_values`` and ``coins`` optionally inject the first
    draws of the corresponding stream; later agents draw from ``rng``.
    """
    decisions, onset, belief = _play(
        e, s, d, initial_tau(e), 1, n_agents, w, rng, llr_values, xi_values, coins
    )
    return TrajectoryRecord(int(w), decisions, onset, float(belief.tau))


def belief_before(e: BeliefEngine, decisions, n: int) -> PublicBelief:
    """Public belief faced by agent ``n`` after the first ``n - 1`` decisions."""
    b = initial_tau(e)
    for x in decisions[: n - 1]:
        b = update_tau(e, b, int(x))
    return b


def replay_decisions(e, s, d, traj: TrajectoryRecord, start: int, rng,
                     llr_values=None, xi_values=None) -> np.ndarray:
    """Decisions of agents ``start..N`` with fresh draws and the same past."""
    b = belief_before(e, traj.decisions, start)
    out, _, _ = _play(e, s, d, b, start, len(traj.decisions), traj.world, rng, llr_values, xi_values)
    return out


def counterfactual_cascade_check(e, s, d, traj: TrajectoryRecord, rng) -> bool:
    """Resample every signal from the cascade onset on; True if no decision moves."""
    if traj.cascade_onset is None:
        raise ValueError("trajectory has no cascade onset")
    k = traj.cascade_onset
    replay = replay_decisions(e, s, d, traj, k, rng)
    return bool(np.array_equal(replay, traj.decisions[k - 1 :]))


# ---------------------------------------------------------------------------
# Block engine
# ---------------------------------------------------------------------------


def block_generator(master_seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(block,))))


def draw_block(cfg: RunConfig, block: int):
    """Random inputs of one block: worlds, private LLRs, diversity terms, coins."""
    # Always draw a full block so run r sees the same numbers whatever n_runs is.
    size = min(BLOCK_RUNS, cfg.n_runs - block * BLOCK_RUNS)
    full = (BLOCK_RUNS, cfg.n_agents)
    rng = block_generator(cfg.master_seed, block)
    worlds = (rng.random(BLOCK_RUNS) < cfg.prior_p1).astype(np.int8)
    lam = sample_llr(cfg.signal, worlds[:, None], rng, full)
    xi = np.asarray(sample_xi(cfg.diversity, rng, full), dtype=float)
    coins = rng.random(full)
    return (worlds[:size].copy(), np.ascontiguousarray(lam[:size], dtype=float),
            np.ascontiguousarray(xi[:size]), np.ascontiguousarray(coins[:size]))


def _kernel_tables(e: BeliefEngine):
    table = e.components()
    if table is None:
        raise UnsupportedModelError("the Monte Carlo kernels need atom or Gaussian response laws")
    return table


def simulate_block(cfg: RunConfig, block: int, engine: Optional[BeliefEngine] = None,
                   backend: Optional[str] = None):
    """Run one block; returns (worlds, decisions, onset, final_tau)."""
    e = engine or make_belief_engine(cfg.signal, cfg.diversity)
    backend = backend or _kernels.default_backend()
    worlds, lam, xi, coins = draw_block(cfg, block)
    size = worlds.size
    decisions = np.empty((size, cfg.n_agents), dtype=np.int8)
    onset = np.empty(size, dtype=np.int32)
    final_tau = np.empty(size)
    centers, scales, w0, w1 = _kernel_tables(e)
    _kernels.simulate_block(backend, worlds, lam, xi, coins, centers, scales, w0, w1,
                            e.bounded, decisions, onset, final_tau)
    return worlds, decisions, onset, final_tau


def simulate_trajectories(cfg: RunConfig, backend: Optional[str] = None) -> List[TrajectoryRecord]:
    """All realizations of ``cfg`` as records; meant for small configs."""
    e = make_belief_engine(cfg.signal, cfg.diversity)
    out = []
    for b in range(_n_blocks(cfg)):
        worlds, decisions, onset, final_tau = simulate_block(cfg, b, e, backend)
        for i in range(worlds.size):
            k = int(onset[i])
            out.append(TrajectoryRecord(int(worlds[i]), decisions[i].copy(),
                                        k if k > 0 else None, float(final_tau[i])))
    return out


def _n_blocks(cfg: RunConfig) -> int:
    return -(-cfg.n_runs // BLOCK_RUNS)


def _block_curve(cfg, block, e, backend) -> LearningCurve:
    worlds, decisions, onset, _ = simulate_block(cfg, block, e, backend)
    correct = np.zeros((2, cfg.n_agents), dtype=np.int64)
    runs = np.zeros(2, dtype=np.int64)
    for w in (0, 1):
        sel = worlds == w
        runs[w] = sel.sum()
        correct[w] = (decisions[sel] == w).sum(axis=0)
    return LearningCurve(correct, runs, int((onset > 0).sum()))


def estimate_learning_curve(cfg: RunConfig, threads: Optional[int] = None,
                            backend: Optional[str] = None) -> LearningCurve:
    """Per-agent accuracy over ``cfg.n_runs`` independent realizations."""
    e = make_belief_engine(cfg.signal, cfg.diversity)
    _kernel_tables(e)
    backend = backend or _kernels.default_backend()
    blocks = range(_n_blocks(cfg))
    log.debug("simulating %d runs x %d agents on %s", cfg.n_runs, cfg.n_agents, backend)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_curve(cfg, b, e, backend), blocks))
    else:
        parts = [_block_curve(cfg, b, e, backend) for b in blocks]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total
