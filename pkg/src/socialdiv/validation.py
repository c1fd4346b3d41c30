"""Self-check suite run by ``socialdiv validate``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .belief_engine import (
    decide_with_coin,
    initial_tau,
    is_cascade,
    make_belief_engine,
    response_prob,
    response_sf,
    update_tau,
)
from .diversity_models import atom_noise, gaussian_noise
from .exact_oracle import build_tau_graph, exact_learning_curve, markov_transient_curve
from .signal_models import make_binary_symmetric, make_symmetric_gaussian, sample_llr
from .simulator import (
    RunConfig,
    counterfactual_cascade_check,
    estimate_learning_curve,
    run_realization,
    simulate_trajectories,
)

DIVERSITY_MATRIX = (0.0, 0.01, 0.1, 0.5, 0.7)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def reference_signals():
    return {"binary": make_binary_symmetric(0.25), "gaussian": make_symmetric_gaussian(1.0, 4.0)}


def check_oracle_vs_mc(runs: int, seed: int, n_agents: int = 14, threads=None) -> PropertyResult:
    worst = 0.0
    inside2 = total = 0
    for name, sig in reference_signals().items():
        for v in DIVERSITY_MATRIX:
            div = gaussian_noise(v)
            exact = exact_learning_curve(make_belief_engine(sig, div), n_agents)
            mc = estimate_learning_curve(RunConfig(sig, div, n_agents, runs, master_seed=seed), threads)
            z = np.abs(mc.accuracy - exact) / mc.std_error
            worst = max(worst, float(z.max()))
            inside2 += int((z <= 2.0).sum())
            total += z.size
    frac = inside2 / total
    ok = worst <= 4.0 and frac >= 0.95
    return PropertyResult(
        "oracle-vs-MC", ok, f"max |z| = {worst:.2f} (<= 4), {frac:.1%} of agents within 2 SE (>= 95%)"
    )


def check_markov_vs_enumeration(n_agents: int = 14) -> PropertyResult:
    cases = [
        (make_binary_symmetric(0.25), gaussian_noise(0)),
        (make_binary_symmetric(0.3), atom_noise([-0.4, 0.0, 0.4], [0.25, 0.5, 0.25])),
    ]
    worst = 0.0
    for sig, div in cases:
        e = make_belief_engine(sig, div)
        diff = markov_transient_curve(build_tau_graph(e), n_agents) - exact_learning_curve(e, n_agents)
        worst = max(worst, float(np.abs(diff).max()))
    return PropertyResult("markov-vs-enumeration", worst <= 1e-10, f"max difference {worst:.2e} (<= 1e-10)")


def check_cascade_permanence(seed: int, update_rule: Callable = update_tau, walks: int = 500,
                             extra_steps: int = 20) -> PropertyResult:
    """Drive a cascade-prone process into a cascade, then keep updating.

    The ``update_rule`` argument lets tests inject a broken rule as a
    negative control.
    """
    rng = np.random.default_rng(seed)
    sig = make_binary_symmetric(0.25)
    e = make_belief_engine(sig, gaussian_noise(0))
    reached = violations = 0
    for _ in range(walks):
        w = int(rng.random() < 0.5)
        b = initial_tau(e)
        for _ in range(200):
            if b.in_cascade:
                break
            x = decide_with_coin(sample_llr(sig, w, rng), b.tau, rng.random())
            b = update_rule(e, b, x)
        if not b.in_cascade:
            continue
        reached += 1
        frozen = b.tau
        for _ in range(extra_steps):
            b = update_rule(e, b, int(rng.random() < 0.5))
            if not (b.in_cascade and b.tau == frozen):
                violations += 1
                break
    # Trajectories from the Monte Carlo kernel must be constant after onset.
    bad_traj = 0
    trajs = simulate_trajectories(RunConfig(sig, gaussian_noise(0), 60, 2048, master_seed=seed))
    for t in trajs:
        k = t.cascade_onset
        if k is not None and np.any(t.decisions[k - 1 :] != t.decisions[k - 1]):
            bad_traj += 1
    ok = reached > 0 and violations == 0 and bad_traj == 0
    return PropertyResult(
        "cascade-permanence",
        ok,
        f"{reached} cascades reached, {violations} reopened by updates, {bad_traj} kernel trajectories changed after onset",
    )


def check_counterfactual(seed: int, trajectories: int = 1000, replays: int = 10,
                         n_agents: int = 30) -> PropertyResult:
    rng = np.random.default_rng(seed)
    sig = make_binary_symmetric(0.25)
    div = gaussian_noise(0)
    e = make_belief_engine(sig, div)
    found = agree = 0
    while found < trajectories:
        traj = run_realization(e, sig, div, n_agents, int(rng.random() < 0.5), rng)
        if traj.cascade_onset is None:
            continue
        found += 1
        agree += all(counterfactual_cascade_check(e, sig, div, traj, rng) for _ in range(replays))
    return PropertyResult(
        "counterfactual-cascade", agree == found, f"{agree}/{found} trajectories unchanged under {replays} replays"
    )


def check_no_cascade_unbounded(runs: int, seed: int, n_agents: int = 800, threads=None) -> PropertyResult:
    onsets = 0
    for sig in reference_signals().values():
        for v in (0.01, 0.5):
            cfg = RunConfig(sig, gaussian_noise(v), n_agents, runs, master_seed=seed)
            onsets += estimate_learning_curve(cfg, threads).cascade_runs
    grid = np.concatenate([-np.logspace(-3, 6, 200), [0.0], np.logspace(-3, 6, 200)])
    grid_hits = 0
    for sig in reference_signals().values():
        grid_hits += int(np.sum(is_cascade(make_belief_engine(sig, gaussian_noise(0.1)), grid)))
    grid_hits += int(np.sum(is_cascade(make_belief_engine(reference_signals()["gaussian"], gaussian_noise(0)), grid)))
    return PropertyResult(
        "no-cascade-unbounded",
        onsets == 0 and grid_hits == 0,
        f"{onsets} cascade onsets in simulation, {grid_hits} cascade thresholds on a +-1e6 grid",
    )


def check_martingale(seed: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for sig in reference_signals().values():
        for v in DIVERSITY_MATRIX:
            e = make_belief_engine(sig, gaussian_noise(v))
            # Non-cascade thresholds only: both decisions must have positive mass.
            tau = rng.uniform(max(e.lower, -3.0), min(e.upper, 3.0), 50)
            for w in (0, 1):
                p0, p1 = response_prob(e, w, tau), response_sf(e, w, tau)
                q0, q1 = response_prob(e, 1 - w, tau), response_sf(e, 1 - w, tau)
                total = p0 * (q0 / p0) + p1 * (q1 / p1)
                worst = max(worst, float(np.abs(total - 1.0).max()))
    return PropertyResult("likelihood-ratio-martingale", worst <= 1e-12, f"max deviation {worst:.1e}")


def run_validation_suite(runs: int = 20_000, seed: int = 2024, threads=None,
                         update_rule: Callable = update_tau) -> List[PropertyResult]:
    return [
        check_oracle_vs_mc(runs, seed, threads=threads),
        check_markov_vs_enumeration(),
        check_cascade_permanence(seed, update_rule),
        check_counterfactual(seed),
        check_no_cascade_unbounded(max(1000, runs // 4), seed, threads=threads),
        check_martingale(seed),
    ]
