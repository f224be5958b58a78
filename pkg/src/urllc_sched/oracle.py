"""Ground-truth machinery: exhaustive search on tiny instances and a
Monte-Carlo check of the worst-case SNR reduction.

The exhaustive oracle enumerates every deadline-respecting RB->robot map
and refits powers exactly, so its optimum is a true lower bound for any
feasible binary schedule of the same instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import fbl
from .convex import power_refit
from .model import GainMatrix

MAX_ASSIGNMENTS = 10**6


@dataclass(frozen=True)
class OracleResult:
    status: str                   # Optimal | Infeasible
    p_tot: float
    assignment: np.ndarray | None
    n_enumerated: int = 0
    n_feasible: int = 0


def _assignment_space(config):
    """Per-RB candidate lists: 0 = unused, k+1 = robot k (deadline
    permitting), in lexicographic order."""
    choices = []
    for m in range(config.M):
        for n in range(config.N):
            allowed = [0] + [k + 1 for k in range(config.K) if n < config.D[k]]
            choices.append(allowed)
    return choices


def exhaustive_optimum(gains, config):
    """Globally optimal (assignment, powers) by brute force.

    Ties in total power break to the lexicographically smallest
    assignment tuple.  Raises ValueError when the assignment space
    exceeds MAX_ASSIGNMENTS.
    """
    g = gains.g if isinstance(gains, GainMatrix) else np.asarray(gains)
    M, N, K = g.shape
    choices = _assignment_space(config)
    space = 1
    for c in choices:
        space *= len(c)
    if space > MAX_ASSIGNMENTS:
        raise ValueError(
            f"assignment space {space} exceeds the exhaustive-search "
            f"limit {MAX_ASSIGNMENTS}"
        )

    qinv = np.array([fbl.q_inv(e) for e in config.eps])
    B = np.asarray(config.B, dtype=float)
    best_p = math.inf
    best_a = None
    n_feasible = 0
    for digits in product(*choices):
        a = np.zeros((M, N, K), dtype=np.int8)
        for idx, d in enumerate(digits):
            if d > 0:
                a[idx // N, idx % N, d - 1] = 1
        p, status, _ = power_refit(a, g, B, qinv, config.Pmax)
        if status != "Optimal":
            continue
        n_feasible += 1
        p_tot = float(p.sum())
        # strict < keeps the first (lexicographically smallest) tie
        if p_tot < best_p:
            best_p = p_tot
            best_a = a
    if best_a is None:
        return OracleResult("Infeasible", math.nan, None, space, 0)
    return OracleResult("Optimal", best_p, best_a, space, n_feasible)


def sampled_worst_snr(hhat, delta, beamformer, n_samples=1000, seed=0,
                      include_worst=True):
    """Monte-Carlo worst case of |(hhat + e)^H w|^2 over the delta-ball.

    Errors are sampled uniformly on the ball surface (the minimum of
    this objective lies on the boundary); with ``include_worst`` the
    analytic minimizer e* = -delta * hhat / ||hhat|| joins the candidate
    set so equality with the closed form is exact, not approximate.
    """
    hhat = np.asarray(hhat, dtype=complex)
    w = np.asarray(beamformer, dtype=complex)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    best = abs(np.vdot(hhat, w)) ** 2
    if delta == 0.0:
        return float(best)

    rng = np.random.default_rng(seed)
    nt = hhat.shape[0]
    v = rng.standard_normal((n_samples, nt)) + 1j * rng.standard_normal(
        (n_samples, nt)
    )
    v *= delta / np.linalg.norm(v, axis=1)[:, None]
    vals = np.abs((hhat[None, :] + v).conj() @ w) ** 2
    best = min(best, float(vals.min()))

    if include_worst:
        norm = np.linalg.norm(hhat)
        if norm > 0:
            estar = -delta * hhat / norm
            best = min(best, float(abs(np.vdot(hhat + estar, w)) ** 2))
        if delta >= norm:
            # the ball contains -hhat: the infimum is exactly zero
            best = min(best, float(abs(np.vdot(hhat - hhat, w)) ** 2))
    return float(best)
