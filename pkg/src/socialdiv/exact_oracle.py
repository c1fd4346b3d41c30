"""Exact learning curves, used as ground truth for the Monte Carlo.

Two independent routes:

* path enumeration over all decision histories, valid for any engine
  because it only branches on the binary decisions;
* a Markov chain on the reachable threshold values, for engines whose
  response laws are finite atoms.  The threshold is a sufficient statistic
  of the history, so the chain is an exact collapse of the enumeration.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .belief_engine import BeliefEngine, is_cascade, next_tau, response_prob, response_sf
from .errors import ResourceError, UnsupportedModelError
from .prob_core import TIE_RTOL

MAX_ENUMERATION_AGENTS = 24


def _enumerate(e: BeliefEngine, n: int, prior_p1: float):
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_ENUMERATION_AGENTS:
        raise ResourceError(
            f"path enumeration is capped at {MAX_ENUMERATION_AGENTS} agents (2^n paths), got {n}"
        )
    prior = np.array([1.0 - prior_p1, prior_p1])
    tau = np.zeros(1)
    paths = np.ones((2, 1))  # P_w(history) per world
    acc = np.empty(n)
    for k in range(n):
        p0 = np.stack([response_prob(e, 0, tau), response_prob(e, 1, tau)])
        p1 = np.stack([response_sf(e, 0, tau), response_sf(e, 1, tau)])
        acc[k] = prior[0] * (paths[0] * p0[0]).sum() + prior[1] * (paths[1] * p1[1]).sum()
        if k == n - 1:
            break
        tau = np.concatenate([next_tau(e, tau, 0), next_tau(e, tau, 1)])
        paths = np.concatenate([paths * p0, paths * p1], axis=1)
        keep = paths.sum(axis=0) > 0.0
        tau, paths = tau[keep], paths[:, keep]
    leaves = np.concatenate([paths * p0, paths * p1], axis=1)
    return acc, leaves


def exact_learning_curve(e: BeliefEngine, n: int, prior_p1: float = 0.5) -> np.ndarray:
    """Accuracy ``P(X_k = W)`` of agents ``1..n`` by enumerating histories."""
    return _enumerate(e, n, prior_p1)[0]


def path_mass(e: BeliefEngine, n: int) -> np.ndarray:
    """Total probability of all length-``n`` histories under each world."""
    return _enumerate(e, n, 0.5)[1].sum(axis=1)


@dataclass(frozen=True, eq=False)
class TauStateGraph:
    """Reachable thresholds and their one-step transitions.

    ``prob[w, s, x]`` is the chance of decision ``x`` in state ``s`` under
    world ``w``; ``succ[s, x]`` is the state it leads to.  State 0 is the
    empty history.
    """

    states: np.ndarray
    succ: np.ndarray
    prob: np.ndarray
    absorbing: np.ndarray

    def transition_matrix(self, w: int) -> np.ndarray:
        n = self.states.size
        P = np.zeros((n, n))
        for x in (0, 1):
            np.add.at(P, (np.arange(n), self.succ[:, x]), self.prob[w, :, x])
        return P

    def cascade_decision(self, s: int) -> int:
        return int(self.prob[1, s, 1] == 1.0)


def build_tau_graph(e: BeliefEngine, max_states: int = 10_000) -> TauStateGraph:
    """Breadth-first closure of the threshold recursion from the empty history."""
    if not e.atomic:
        raise UnsupportedModelError(
            "the threshold chain needs finite-atom response laws (no Gaussian or gridded parts)"
        )
    states = [0.0]
    edges = []
    queue = deque([0])

    def index_of(t):
        arr = np.asarray(states)
        hit = np.flatnonzero(np.abs(arr - t) <= TIE_RTOL * np.maximum(1.0, np.abs(arr)))
        if hit.size:
            return int(hit[0])
        if len(states) >= max_states:
            raise ResourceError(
                f"threshold closure exceeded {max_states} states (last tau {t:.6g}); "
                "the chain may be infinite for this model"
            )
        states.append(float(t))
        queue.append(len(states) - 1)
        return len(states) - 1

    while queue:
        s = queue.popleft()
        t = states[s]
        if is_cascade(e, t):
            edges.append((s, None))
            continue
        edges.append((s, (index_of(next_tau(e, t, 0)), index_of(next_tau(e, t, 1)))))

    n = len(states)
    succ = np.zeros((n, 2), dtype=np.int64)
    prob = np.zeros((2, n, 2))
    absorbing = np.zeros(n, dtype=bool)
    tau = np.asarray(states)
    for s, nxt in edges:
        if nxt is None:
            absorbing[s] = True
            succ[s] = s
            x = 1 if response_sf(e, 0, tau[s]) > 0.0 else 0
            prob[:, s, x] = 1.0
        else:
            succ[s] = nxt
            for w in (0, 1):
                prob[w, s, 0] = response_prob(e, w, tau[s])
                prob[w, s, 1] = response_sf(e, w, tau[s])
    return TauStateGraph(tau, succ, prob, absorbing)


def markov_transient_curve(g: TauStateGraph, n: int, prior_p1: float = 0.5) -> np.ndarray:
    """Per-agent accuracy by forward iteration of the state occupancy."""
    prior = np.array([1.0 - prior_p1, prior_p1])
    occ = np.zeros((2, g.states.size))
    occ[:, 0] = 1.0
    acc = np.empty(n)
    for k in range(n):
        acc[k] = sum(prior[w] * occ[w] @ g.prob[w, :, w] for w in (0, 1))
        new = np.zeros_like(occ)
        for w in (0, 1):
            for x in (0, 1):
                np.add.at(new[w], g.succ[:, x], occ[w] * g.prob[w, :, x])
        occ = new
    return acc


def _check_absorbing(g: TauStateGraph):
    # Every transient state must reach an absorbing one.
    n = g.states.size
    reach = g.absorbing.copy()
    changed = True
    while changed:
        nxt = reach | reach[g.succ].any(axis=1)
        changed = bool((nxt != reach).any())
        reach = nxt
    if not reach.all():
        raise UnsupportedModelError("chain has recurrent states that are not cascade states")
    if not g.absorbing.any():
        raise UnsupportedModelError("chain has no absorbing cascade state")
    return n


def absorption_probabilities(g: TauStateGraph) -> np.ndarray:
    """``(2, n_absorbing)`` probabilities of ending in each cascade state from state 0."""
    n = _check_absorbing(g)
    A = np.flatnonzero(g.absorbing)
    T = np.flatnonzero(~g.absorbing)
    out = np.zeros((2, A.size))
    if g.absorbing[0]:
        out[:, np.searchsorted(A, 0)] = 1.0
        return out
    start = int(np.searchsorted(T, 0))
    for w in (0, 1):
        P = g.transition_matrix(w)
        Q = P[np.ix_(T, T)]
        R = P[np.ix_(T, A)]
        B = np.linalg.solve(np.eye(T.size) - Q, R)
        out[w] = B[start]
    return out


def markov_absorption_accuracy(g: TauStateGraph, prior_p1: float = 0.5) -> float:
    """Limiting per-agent accuracy: mass absorbed into cascades on the true world."""
    B = absorption_probabilities(g)
    A = np.flatnonzero(g.absorbing)
    decision = np.array([g.cascade_decision(a) for a in A])
    return float((1.0 - prior_p1) * B[0][decision == 0].sum() + prior_p1 * B[1][decision == 1].sum())
