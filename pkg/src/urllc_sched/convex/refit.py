"""Capped water-filling: minimum-power rate targets on fixed allocations."""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)


def _rate_bits(g, weights, p):
    active = weights > 0
    z = np.zeros_like(p)
    z[active] = g[active] * p[active] / weights[active]
    return float(np.sum(weights * np.log1p(z)) / LN2)


def waterfill(g, target_bits, caps, weights=None, rel_tol=1e-10):
    """Minimize sum(p) s.t. sum(w*log2(1 + g*p/w)) >= target, 0 <= p <= caps.

    weights defaults to 1.  Returns the power vector, or None when even
    p == caps cannot meet the target.
    """
    g = np.asarray(g, dtype=float)
    caps = np.broadcast_to(np.asarray(caps, dtype=float), g.shape).copy()
    if weights is None:
        weights = np.ones_like(g)
    else:
        weights = np.asarray(weights, dtype=float)
    if target_bits <= 0.0:
        return np.zeros_like(g)

    usable = (g > 0) & (weights > 0) & (caps > 0)
    if not np.any(usable):
        return None
    gu, wu, cu = g[usable], weights[usable], caps[usable]

    def powers_at(nu):
        return np.minimum(cu, wu * np.maximum(0.0, nu - 1.0 / gu))

    nu_lo = float(np.min(1.0 / gu))
    nu_hi = float(np.max(cu / wu + 1.0 / gu))
    if _rate_bits(gu, wu, powers_at(nu_hi)) < target_bits * (1.0 - 1e-12):
        return None
    # Bisect the water level; keep the feasible (high) side.
    for _ in range(200):
        nu = 0.5 * (nu_lo + nu_hi)
        if _rate_bits(gu, wu, powers_at(nu)) >= target_bits:
            nu_hi = nu
        else:
            nu_lo = nu
        if nu_hi - nu_lo <= rel_tol * nu_hi:
            break
    p = np.zeros_like(g)
    p[usable] = powers_at(nu_hi)
    return p


def power_refit(assignment, g, B, qinv, Pmax):
    """Optimal powers for a binary assignment, robot by robot.

    Returns (powers, status, bad_robots) with status "Optimal" or
    "Infeasible"; bad_robots lists the robots whose assigned RBs cannot
    carry their payload even at full power.
    """
    assignment = np.asarray(assignment)
    g = np.asarray(g, dtype=float)
    K = assignment.shape[-1]
    p = np.zeros_like(g)
    bad = []
    for k in range(K):
        sel = assignment[..., k] > 0
        l = int(np.count_nonzero(sel))
        target = B[k] + math.sqrt(l) * qinv[k] / LN2
        if l == 0:
            if target > 0:
                bad.append(k)
            continue
        pk = waterfill(g[..., k][sel], target, Pmax)
        if pk is None:
            bad.append(k)
            continue
        buf = p[..., k]
        buf[sel] = pk
    status = "Optimal" if not bad else "Infeasible"
    return p, status, bad
