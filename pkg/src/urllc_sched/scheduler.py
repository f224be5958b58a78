"""Outer penalized-SCA loop, rounding, beamformer recovery, validation.

Each outer iteration solves the convex subproblem at the previous
iterate's linearization anchors, then grows the sparsity penalty
geometrically until the relaxed assignment is effectively one-hot per
RB and total power has settled.  The relaxed solution is then rounded,
powers are refit exactly, and beamformers recovered along the channel
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fbl
from .config import SolverOptions
from .convex import SubproblemSpec, power_refit, solve_p4
from .model import GainMatrix

LN2 = math.log(2.0)


@dataclass(frozen=True)
class IterationRecord:
    p_tot: float      # relaxed total power (watts)
    F: float          # sparsity measure (unit penalty / shared-RB count)
    lam: float        # penalty factor used in this iteration


@dataclass
class ScheduleResult:
    assignment: np.ndarray        # (M, N, K) binary
    p: np.ndarray                 # (M, N, K) watts
    w: np.ndarray | None          # (M, N, K, Nt) beamformers
    p_tot: float
    iterations: int
    trajectory: list
    status: str                   # Solved | Infeasible | NotConverged
    achieved_bits: np.ndarray
    relaxed_phi: np.ndarray | None = None
    message: str = ""


def deadline_mask(config):
    mask = np.zeros((config.M, config.N, config.K), dtype=bool)
    for k in range(config.K):
        mask[:, : config.D[k], k] = True
    return mask


def ncp_penalty(phi, lam):
    """(lam/2) * sum over RBs of (l1 norm squared - l2 norm squared)."""
    phi = np.asarray(phi, dtype=float)
    s1 = phi.sum(axis=-1)
    s2 = (phi**2).sum(axis=-1)
    return float(0.5 * lam * np.sum(s1**2 - s2))


def soft_l0_violation(phi, tol):
    """Number of extra robots sharing an RB beyond the first."""
    counts = (np.asarray(phi) > tol).sum(axis=-1)
    return float(np.maximum(0, counts - 1).sum())


def rw_weights(phi_prev, xi):
    return 1.0 / (np.asarray(phi_prev, dtype=float) + xi)


def round_assignment(phi, binary_tol=0.5):
    """One-hot per RB at the argmax when it clears the threshold
    (ties break to the lowest robot index), otherwise unused."""
    phi = np.asarray(phi, dtype=float)
    M, N, K = phi.shape
    out = np.zeros((M, N, K), dtype=np.int8)
    best = phi.argmax(axis=-1)
    mm, nn = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    keep = phi[mm, nn, best] >= binary_tol
    out[mm[keep], nn[keep], best[keep]] = 1
    return out


def recover_beamformers(p, channels):
    """w = sqrt(p) * hhat / ||hhat||; transmit along the estimate."""
    p = np.asarray(p, dtype=float)
    hhat = channels.hhat
    norms = np.linalg.norm(hhat, axis=-1)
    if np.any((p > 0) & (norms == 0)):
        raise ValueError("positive power on a zero channel estimate")
    safe = np.where(norms > 0, norms, 1.0)
    return np.sqrt(p)[..., None] * hhat / safe[..., None]


def achieved_bits(assignment, p, gains, qinv):
    """Worst-case deliverable bits per robot for a binary schedule."""
    g = gains.g if isinstance(gains, GainMatrix) else np.asarray(gains)
    K = g.shape[-1]
    out = np.zeros(K)
    for k in range(K):
        sel = assignment[..., k] > 0
        out[k] = fbl.achievable_bits(
            sel.astype(float), g[..., k] * p[..., k], qinv[k]
        )
    return out


def validate_schedule(result, gains, config, rate_tol=1e-6):
    """Re-check every constraint of a schedule from raw inputs.

    Returns {check: (passed, margin)}; margins >= 0 mean satisfied.
    """
    g = gains.g if isinstance(gains, GainMatrix) else np.asarray(gains)
    a = np.asarray(result.assignment, dtype=float)
    p = np.asarray(result.p, dtype=float)
    mask = deadline_mask(config)
    qinv = np.array([fbl.q_inv(e) for e in config.eps])

    checks = {}
    binerr = float(np.abs(a * (1.0 - a)).max())
    checks["binary"] = (binerr == 0.0, -binerr)
    excl = float((1.0 - a.sum(axis=-1)).min())
    checks["exclusivity"] = (excl >= 0.0, excl)
    dl = float(a[~mask].max()) if np.any(~mask) else 0.0
    checks["deadline"] = (dl == 0.0, -dl)
    cap = float((a * config.Pmax - p).min())
    off = float(p[a == 0].max()) if np.any(a == 0) else 0.0
    cap_ok = cap >= -1e-12 * config.Pmax and off <= 1e-15 and p.min() >= 0.0
    checks["power_cap"] = (cap_ok, min(cap, -off, p.min()))
    if result.w is not None:
        werr = float(np.abs((np.abs(result.w) ** 2).sum(axis=-1) - p).max())
        checks["beamformer_power"] = (werr <= 1e-9 * (1.0 + config.Pmax), -werr)
    bits = achieved_bits(a, p, g, qinv)
    margin = float((bits - np.asarray(config.B)).min())
    checks["rate"] = (margin >= -rate_tol, margin)
    checks["ok"] = (all(v[0] for key, v in checks.items() if key != "ok"), 0.0)
    return checks


def _failed(status, config, message, iterations=0, trajectory=None, relaxed=None):
    shape = (config.M, config.N, config.K)
    return ScheduleResult(
        assignment=np.zeros(shape, dtype=np.int8),
        p=np.zeros(shape),
        w=None,
        p_tot=math.nan,
        iterations=iterations,
        trajectory=trajectory or [],
        status=status,
        achieved_bits=np.full(config.K, -math.inf),
        relaxed_phi=relaxed,
        message=message,
    )


def _finalize(phi, g_arr, config, opts, qinv, channels, iterations, trajectory):
    """Round, refit powers exactly, recover beamformers and validate.

    The relaxed optimum can legitimately hold a single-occupancy RB at a
    fractional phi (partial blocklength trades rate against dispersion),
    so when rounding at the configured threshold strands a robot below
    its payload, progressively lower thresholds rescue those RBs; the
    refit re-optimizes powers exactly either way.
    """
    assignment = None
    status = ""
    bad = ()
    for tol in (opts.binary_tol, 0.25, 0.05):
        if tol > opts.binary_tol:
            continue
        cand = round_assignment(phi, tol)
        if assignment is not None and np.array_equal(cand, assignment):
            continue
        assignment = cand
        p, status, bad = power_refit(
            assignment, g_arr, np.asarray(config.B), qinv, config.Pmax
        )
        if status == "Optimal":
            break
    if status != "Optimal":
        return None, f"power refit infeasible for robots {bad}"
    w = recover_beamformers(p, channels) if channels is not None else None
    bits = achieved_bits(assignment, p, g_arr, qinv)
    result = ScheduleResult(
        assignment=assignment,
        p=p,
        w=w,
        p_tot=float(p.sum()),
        iterations=iterations,
        trajectory=trajectory,
        status="Solved",
        achieved_bits=bits,
        relaxed_phi=phi,
    )
    return result, ""


def _solve_outer(gains, config, opts, method, channels=None):
    g_arr = gains.g if isinstance(gains, GainMatrix) else np.asarray(gains)
    qinv = np.array([fbl.q_inv(e) for e in config.eps])
    mask = deadline_mask(config)
    B = np.asarray(config.B, dtype=float)

    phi_anchor = np.where(mask, 1.0 / config.K, 0.0)
    l_anchor = phi_anchor.sum(axis=(0, 1))
    # reweighting anchor starts at 1 so the first weighted exclusivity
    # constraint reduces to the plain l1 relaxation
    rw_anchor = np.ones_like(phi_anchor)
    lam = opts.lambda0
    warm = None
    prev_ptot = None
    trajectory = []
    tail_message = ""

    for it in range(1, opts.max_outer + 1):
        kwargs = dict(
            g=g_arr, B=B, qinv=qinv, deadline_mask=mask,
            phi_anchor=phi_anchor, l_anchor=l_anchor, lam=lam,
            Pmax=config.Pmax, kkt_tol=opts.kkt_tol, feas_tol=opts.feas_tol,
            newton_max=opts.newton_max, warm_start=warm,
        )
        if method == "NCP":
            spec = SubproblemSpec(penalty_kind="NCP", **kwargs)
        else:
            spec = SubproblemSpec(
                penalty_kind="RW_L1", rw_weights=rw_weights(rw_anchor, opts.xi),
                **kwargs,
            )
        sol = solve_p4(spec)
        if sol.status == "Infeasible":
            return _failed("Infeasible", config, sol.message, it, trajectory)
        if sol.status == "MaxIter":
            return _failed(
                "NotConverged", config,
                f"inner solver hit its iteration cap at outer iteration {it}",
                it, trajectory,
            )

        phi = sol.phi
        ptot = sol.p_tot
        if method == "NCP":
            sparsity = ncp_penalty(phi, 1.0)
        else:
            sparsity = soft_l0_violation(phi, opts.sparsity_tol)
        trajectory.append(IterationRecord(p_tot=ptot, F=sparsity, lam=lam))

        power_settled = (
            prev_ptot is not None
            and abs(ptot - prev_ptot) <= opts.epsilon * max(prev_ptot, 1e-300)
        )
        sparse_enough = sparsity <= opts.eps_penalty

        prev_ptot = ptot
        phi_anchor = phi
        rw_anchor = phi
        l_anchor = np.maximum(phi.sum(axis=(0, 1)), 1e-12)
        lam *= opts.eta
        warm = (sol.phi, sol.p)

        if power_settled and sparse_enough:
            result, tail_message = _finalize(
                phi, g_arr, config, opts, qinv, channels, it, trajectory
            )
            if result is not None:
                return result
            # rounding not yet clean: keep sharpening the penalty

    if sparse_enough:
        result, tail_message = _finalize(
            phi, g_arr, config, opts, qinv, channels, opts.max_outer, trajectory
        )
        if result is not None:
            return result
        return _failed("Infeasible", config, tail_message, opts.max_outer,
                       trajectory, relaxed=phi)
    return _failed(
        "NotConverged", config,
        f"sparsity measure {sparsity:.3e} above tolerance after "
        f"{opts.max_outer} outer iterations",
        opts.max_outer, trajectory, relaxed=phi,
    )


def solve_ncp(gains, config, opts=None, channels=None):
    """Penalized-SCA schedule with the nonconvex l1^2-l2^2 penalty."""
    opts = opts or config.solver
    return _solve_outer(gains, config, opts, "NCP", channels)


def solve_rw_l1(gains, config, opts=None, channels=None):
    """Baseline: identical outer scaffold with reweighted-l1 penalty."""
    opts = opts or config.solver
    return _solve_outer(gains, config, opts, "RW_L1", channels)
