"""Command-line front end.

    socialdiv curve  --model binary --crossover 0.25 --agents 400 --runs 100000 \\
                     --diversity 0.01,0.1,0.5,0.7 --seed 42 --out fig2a.csv
    socialdiv sweep  --model binary --agents 10,100,400,800 \\
                     --diversity-grid 0.05:0.45:0.05 --runs 100000 --out fig3.csv
    socialdiv oracle --model gaussian --agents 14 --diversity 0,0.5 --out exact.csv
    socialdiv markov --model binary --agents 200 --out chain.csv
    socialdiv validate

CSV files hold error rates ``P(X_n != W)``.  Exit status: 0 success,
2 configuration error, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from decimal import Decimal, InvalidOperation
from typing import Dict, List, Sequence

import numpy as np

from .belief_engine import make_belief_engine
from .diversity_models import atom_noise, gaussian_noise
from .errors import ConfigurationError
from .exact_oracle import (
    build_tau_graph,
    exact_learning_curve,
    markov_absorption_accuracy,
    markov_transient_curve,
)
from .signal_models import make_binary_symmetric, make_symmetric_gaussian
from .simulator import RunConfig, estimate_learning_curve
from .validation import run_validation_suite

log = logging.getLogger("socialdiv")


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def _decimal(text: str) -> Decimal:
    try:
        d = Decimal(text.strip())
    except InvalidOperation:
        raise ConfigurationError(f"not a number: {text!r}") from None
    if not d.is_finite():
        raise ConfigurationError(f"not a finite number: {text!r}")
    return d


def parse_diversity_list(text: str) -> List[str]:
    labels = [t.strip() for t in text.split(",") if t.strip()]
    if not labels:
        raise ConfigurationError("empty diversity list")
    for t in labels:
        if _decimal(t) < 0:
            raise ConfigurationError(f"diversity values must be >= 0, got {t}")
    return labels


def parse_grid(text: str) -> List[str]:
    """``start:stop:step``, both endpoints included when step divides the range."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (_decimal(p) for p in parts)
    if step <= 0 or start > stop or start < 0:
        raise ConfigurationError("grid needs 0 <= start <= stop and step > 0")
    out = []
    k = 0
    while start + k * step <= stop:
        out.append(str(start + k * step))
        k += 1
    return out


def parse_agent_list(text: str) -> List[int]:
    try:
        agents = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"agent indices must be integers, got {text!r}") from None
    if not agents or min(agents) < 1:
        raise ConfigurationError("agent indices must be >= 1")
    return agents


def build_signal(args):
    if args.model == "binary":
        return make_binary_symmetric(args.crossover)
    return make_symmetric_gaussian(args.signal_mean, args.signal_variance)


def build_diversity(label: str, args=None):
    xi_atoms = getattr(args, "xi_atoms", None)
    if xi_atoms:
        pairs = [p.split(":") for p in xi_atoms.split(",")]
        try:
            values, masses = zip(*[(float(v), float(m)) for v, m in pairs])
        except ValueError:
            raise ConfigurationError(f"--xi-atoms must be value:mass pairs, got {xi_atoms!r}") from None
        return atom_noise(values, masses)
    return gaussian_noise(float(label))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _check_writable(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise ConfigurationError(f"output directory is missing or not writable: {parent}")


def _write_table(path: str, header: Sequence[str], keys: Sequence, columns: Sequence[np.ndarray]):
    lines = [",".join(header)]
    for i, key in enumerate(keys):
        lines.append(",".join([str(key)] + [f"{c[i]:.6f}" for c in columns]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_curve_csv(curves: Dict[str, np.ndarray], path: str):
    """One row per agent, one error-rate column per diversity label."""
    lengths = {len(c) for c in curves.values()}
    if len(lengths) != 1:
        raise ValueError("all curves must cover the same number of agents")
    n = lengths.pop()
    _write_table(path, ["agent", *curves], range(1, n + 1), list(curves.values()))


def write_sweep_csv(rows: Dict[str, np.ndarray], agents: Sequence[int], path: str):
    """One row per diversity value, one error-rate column per selected agent."""
    labels = list(rows)
    columns = [np.array([rows[lab][j] for lab in labels]) for j in range(len(agents))]
    _write_table(path, ["diversity", *map(str, agents)], labels, columns)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_curve(args) -> str:
    sig = build_signal(args)
    labels = parse_diversity_list(args.diversity)
    curves = {}
    for lab in labels:
        cfg = RunConfig(sig, build_diversity(lab), args.agents, args.runs, args.prior, args.seed)
        curves[lab] = estimate_learning_curve(cfg, args.threads).error_rate
    write_curve_csv(curves, args.out)
    last = ", ".join(f"{lab}: {c[-1]:.4f}" for lab, c in curves.items())
    return f"wrote {args.agents} agents x {len(labels)} curves to {args.out}; error at agent {args.agents}: {last}"


def cmd_sweep(args) -> str:
    sig = build_signal(args)
    agents = parse_agent_list(args.agents)
    if args.diversity_grid:
        labels = parse_grid(args.diversity_grid)
    elif args.diversity:
        labels = parse_diversity_list(args.diversity)
    else:
        raise ConfigurationError("sweep needs --diversity-grid or --diversity")
    idx = np.array(agents) - 1
    rows = {}
    for lab in labels:
        cfg = RunConfig(sig, build_diversity(lab), max(agents), args.runs, args.prior, args.seed)
        rows[lab] = estimate_learning_curve(cfg, args.threads).error_rate[idx]
    write_sweep_csv(rows, agents, args.out)
    return f"wrote {len(labels)} diversity rows x {len(agents)} agents to {args.out}"


def cmd_oracle(args) -> str:
    sig = build_signal(args)
    labels = ["atoms"] if args.xi_atoms else parse_diversity_list(args.diversity)
    curves = {}
    for lab in labels:
        e = make_belief_engine(sig, build_diversity(lab, args))
        curves[lab] = 1.0 - exact_learning_curve(e, args.agents, args.prior)
    write_curve_csv(curves, args.out)
    return f"wrote exact error rates for {args.agents} agents x {len(labels)} curves to {args.out}"


def cmd_markov(args) -> str:
    sig = build_signal(args)
    label = "atoms" if args.xi_atoms else args.diversity
    if not args.xi_atoms:
        parse_diversity_list(label)
    e = make_belief_engine(sig, build_diversity(label, args))
    g = build_tau_graph(e, args.max_states)
    curve = markov_transient_curve(g, args.agents, args.prior)
    limit = markov_absorption_accuracy(g, args.prior)
    write_curve_csv({label: 1.0 - curve}, args.out)
    return (
        f"{g.states.size} threshold states ({int(g.absorbing.sum())} absorbing); "
        f"limiting accuracy {limit:.6f}; wrote {args.agents} agents to {args.out}"
    )


def cmd_validate(args) -> int:
    results = run_validation_suite(runs=args.runs, seed=args.seed, threads=args.threads)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} properties passed")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialdiv", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p):
        p.add_argument("--model", choices=["binary", "gaussian"], default="binary")
        p.add_argument("--crossover", type=float, default=0.25, help="binary flip probability")
        p.add_argument("--signal-mean", type=float, default=1.0)
        p.add_argument("--signal-variance", type=float, default=4.0)
        p.add_argument("--prior", type=float, default=0.5, help="true P(W=1)")
        p.add_argument("--out", required=True)

    def run_flags(p):
        p.add_argument("--runs", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")

    p = sub.add_parser("curve", help="Monte Carlo learning curves over diversity levels")
    model_flags(p)
    run_flags(p)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--diversity", default="0")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("sweep", help="accuracy of selected agents across a diversity grid")
    model_flags(p)
    run_flags(p)
    p.add_argument("--agents", required=True, help="comma-separated agent indices")
    p.add_argument("--diversity-grid", help="start:stop:step")
    p.add_argument("--diversity", help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact curves by path enumeration")
    model_flags(p)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--diversity", default="0")
    p.add_argument("--xi-atoms", help="finite diversity law as value:mass,value:mass")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("markov", help="exact curve and limit via the threshold Markov chain")
    model_flags(p)
    p.add_argument("--agents", type=int, default=200)
    p.add_argument("--diversity", default="0")
    p.add_argument("--xi-atoms", help="finite diversity law as value:mass,value:mass")
    p.add_argument("--max-states", type=int, default=10_000)
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("validate", help="run the property suite")
    p.add_argument("--runs", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_validate)
    return parser


def _validate_common(args):
    if getattr(args, "agents", None) is not None and isinstance(args.agents, int) and args.agents < 1:
        raise ConfigurationError("--agents must be >= 1")
    if getattr(args, "runs", 1) < 1:
        raise ConfigurationError("--runs must be >= 1")
    if getattr(args, "threads", 1) < 1:
        raise ConfigurationError("--threads must be >= 1")
    if hasattr(args, "prior") and not 0.0 <= args.prior <= 1.0:
        raise ConfigurationError("--prior must lie in [0, 1]")
    if hasattr(args, "model"):
        build_signal(args)
    if getattr(args, "out", None):
        _check_writable(args.out)


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate_common(args)
        t0 = time.perf_counter()
        result = args.func(args)
    except ConfigurationError as exc:
        print(f"socialdiv: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status 1
        print(f"socialdiv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if isinstance(result, int):
        return result
    print(f"{result} ({time.perf_counter() - t0:.1f} s)")
    return 0


def main():
    sys.exit(run_command())
