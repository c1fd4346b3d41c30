"""Hot loop of the Monte Carlo: one block of realizations at a time.

Two interchangeable implementations consume the same pre-drawn random
arrays.  The numba one walks each realization agent by agent; the numpy
one vectorises over the realizations of the block.  Set
``SOCIALDIV_DISABLE_NUMBA=1`` to force the numpy path.

Inputs
------
worlds : int8 (B,)
lam, xi, coins : float64 (B, N)
centers, scales, w0, w1 : float64 (K,)
    Shared component table of the two response laws (scale 0 = atom).
bounded : bool
    Whether the response laws have finite support; cascades need it.

Outputs (written in place)
--------------------------
decisions : int8 (B, N)
onset : int32 (B,)   1-based cascade onset, -1 if none
final_tau : float64 (B,)
"""
import math
import os

import numpy as np
from scipy.special import erfc

from .prob_core import TIE_RTOL

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("SOCIALDIV_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
HAVE_NUMBA = numba is not None
SQRT2 = math.sqrt(2.0)


def default_backend() -> str:
    return "numba" if HAVE_NUMBA and not _DISABLED else "numpy"


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _mixture_tails_np(tau, centers, scales, w0, w1):
    d = tau[:, None] - centers[None, :]
    atom = scales == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(atom, 0.0, d / np.where(atom, 1.0, scales))
    tail = 0.5 * erfc(np.abs(z) / SQRT2)
    lo = np.where(z < 0.0, tail, 1.0 - tail)
    hi = np.where(z < 0.0, 1.0 - tail, tail)
    tie = np.abs(d) <= TIE_RTOL * np.maximum(1.0, np.abs(tau))[:, None]
    lo = np.where(atom, np.where(tie, 0.5, (d > 0.0).astype(float)), lo)
    hi = np.where(atom, np.where(tie, 0.5, (d < 0.0).astype(float)), hi)
    return lo @ w0, lo @ w1, hi @ w0, hi @ w1


def simulate_block_numpy(worlds, lam, xi, coins, centers, scales, w0, w1, bounded,
                         decisions, onset, final_tau):
    n_runs, n_agents = lam.shape
    tau = np.zeros(n_runs)
    cas = np.zeros(n_runs, dtype=bool)
    onset[:] = -1
    for n in range(n_agents):
        cdf0, cdf1, sf0, sf1 = _mixture_tails_np(tau, centers, scales, w0, w1)
        if bounded:
            now = ((cdf0 == 0.0) | (sf0 == 0.0)) & ((cdf1 == 0.0) | (sf1 == 0.0))
            onset[now & ~cas] = n + 1
            cas |= now
        v = lam[:, n] + xi[:, n]
        tie = np.abs(v - tau) <= TIE_RTOL * np.maximum(1.0, np.abs(tau))
        x = np.where(tie, coins[:, n] < 0.5, v > tau)
        decisions[:, n] = x
        num = np.where(x, sf1, cdf1)
        den = np.where(x, sf0, cdf0)
        live = ~cas
        if np.any(live & ((num <= 0.0) | (den <= 0.0))):
            raise FloatingPointError("zero response probability outside a cascade state")
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = np.where(live, tau - np.log(num / den), tau)
    final_tau[:] = tau


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------


def _simulate_block_loop(worlds, lam, xi, coins, centers, scales, w0, w1, bounded,
                         decisions, onset, final_tau):
    n_runs, n_agents = lam.shape
    n_comp = centers.shape[0]
    for r in range(n_runs):
        tau = 0.0
        cas = False
        onset[r] = -1
        for n in range(n_agents):
            cdf0 = 0.0
            cdf1 = 0.0
            sf0 = 0.0
            sf1 = 0.0
            tol = TIE_RTOL * max(1.0, abs(tau))
            if not cas:
                for k in range(n_comp):
                    d = tau - centers[k]
                    s = scales[k]
                    if s == 0.0:
                        if abs(d) <= tol:
                            lo = 0.5
                            hi = 0.5
                        elif d > 0.0:
                            lo = 1.0
                            hi = 0.0
                        else:
                            lo = 0.0
                            hi = 1.0
                    else:
                        z = d / s
                        t = 0.5 * math.erfc(abs(z) / SQRT2)
                        if z < 0.0:
                            lo = t
                            hi = 1.0 - t
                        else:
                            lo = 1.0 - t
                            hi = t
                    cdf0 += w0[k] * lo
                    cdf1 += w1[k] * lo
                    sf0 += w0[k] * hi
                    sf1 += w1[k] * hi
                if bounded and (cdf0 == 0.0 or sf0 == 0.0) and (cdf1 == 0.0 or sf1 == 0.0):
                    cas = True
                    onset[r] = n + 1
            v = lam[r, n] + xi[r, n]
            if abs(v - tau) <= tol:
                x = 1 if coins[r, n] < 0.5 else 0
            else:
                x = 1 if v > tau else 0
            decisions[r, n] = x
            if not cas:
                if x == 0:
                    num = cdf1
                    den = cdf0
                else:
                    num = sf1
                    den = sf0
                if num <= 0.0 or den <= 0.0:
                    raise FloatingPointError("zero response probability outside a cascade state")
                tau -= math.log(num / den)
        final_tau[r] = tau


if HAVE_NUMBA:
    simulate_block_numba = numba.njit(cache=True, nogil=True)(_simulate_block_loop)
else:  # pragma: no cover
    simulate_block_numba = None


def simulate_block(backend, *args):
    if backend == "numba":
        if simulate_block_numba is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return simulate_block_numba(*args)
    if backend == "numpy":
        return simulate_block_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
