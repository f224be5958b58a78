"""Pure-numpy barrier kernels (fallback for the compiled extension).

Both backends expose the same two entry points operating on the
flattened cell arrays of one subproblem:

``eval_point``     barrier value at a trial point (line search).
``assemble``       value, gradient, 2x2 diagonal blocks and the low-rank
                   factor of the Newton system at the current point.

The Newton Hessian decomposes as ``D + U U^T`` where D couples only the
(phi_i, p_i) pair of each cell and U has one column per active RB
(exclusivity barrier plus penalty curvature) and one per robot (rate
barrier), which the caller inverts with the matrix-inversion lemma.
"""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)


def _constraints(phi, p, st):
    """Common pieces: per-RB sums, cap slacks, rate slacks, SNR ratios."""
    s_rb = np.zeros(st.n_rb)
    np.add.at(s_rb, st.rb, st.exw * phi)
    cap = phi * st.Pmax - p
    z = st.g * p / phi
    u = phi * np.log1p(z)
    c_rate = np.empty(st.K)
    sum_u = np.zeros(st.K)
    sum_phi = np.zeros(st.K)
    np.add.at(sum_u, st.robot, u)
    np.add.at(sum_phi, st.robot, phi)
    c_rate = sum_u / LN2 - st.a * sum_phi - st.b
    return s_rb, cap, z, c_rate, sum_phi


def _objective(phi, p, st, s_rb):
    return float(
        p.sum() + st.pen_lin @ phi + 0.5 * st.pen_quad * (s_rb @ s_rb)
    )


def eval_point(phi, p, t, st):
    """Return (feasible, psi, f0); psi is +inf when infeasible."""
    if np.any(phi <= 0.0) or np.any(phi >= 1.0) or np.any(p <= 0.0):
        return False, math.inf, math.inf
    s_rb, cap, z, c_rate, _ = _constraints(phi, p, st)
    c_rb = 1.0 - s_rb
    if np.any(cap <= 0.0) or np.any(c_rb <= 0.0) or np.any(c_rate <= 0.0):
        return False, math.inf, math.inf
    f0 = _objective(phi, p, st, s_rb)
    psi = t * f0 - float(
        np.log(phi).sum()
        + np.log1p(-phi).sum()
        + np.log(p).sum()
        + np.log(cap).sum()
        + np.log(c_rb).sum()
        + np.log(c_rate).sum()
    )
    return True, psi, f0


def assemble(phi, p, t, st):
    """Newton system data at a strictly feasible point.

    Returns (psi, f0, gphi, gp, dff, dfp, dpp, ddet, uphi, up, c_rb,
    c_rate, beta, inv_cap2, z) where (dff, dfp, dpp) are the 2x2
    diagonal blocks over each (phi_i, p_i) pair, ddet their stably
    computed determinants, and (beta, inv_cap2, z) the rank-1 curvature
    pieces the caller needs for a cancellation-free Newton decrement.
    """
    s_rb, cap, z, c_rate, _ = _constraints(phi, p, st)
    c_rb = 1.0 - s_rb
    f0 = _objective(phi, p, st, s_rb)
    psi = t * f0 - float(
        np.log(phi).sum()
        + np.log1p(-phi).sum()
        + np.log(p).sum()
        + np.log(cap).sum()
        + np.log(c_rb).sum()
        + np.log(c_rate).sum()
    )

    one_m_phi = 1.0 - phi
    inv_cap = 1.0 / cap
    inv_crb_cell = (1.0 / c_rb)[st.rb]
    inv_crate_cell = (1.0 / c_rate)[st.robot]
    zp1 = 1.0 + z
    # rate-constraint partials per cell
    dc_dphi = (np.log1p(z) - z / zp1) / LN2 - st.a[st.robot]
    dc_dp = st.g / (zp1 * LN2)

    gphi = (
        t * (st.pen_lin + st.pen_quad * st.exw * s_rb[st.rb])
        - 1.0 / phi
        + 1.0 / one_m_phi
        - st.Pmax * inv_cap
        + st.exw * inv_crb_cell
        - inv_crate_cell * dc_dphi
    )
    gp = t - 1.0 / p + inv_cap - inv_crate_cell * dc_dp

    beta = inv_crate_cell / (LN2 * phi * zp1 * zp1)
    inv_cap2 = inv_cap * inv_cap
    box_phi = 1.0 / phi**2 + 1.0 / one_m_phi**2
    dff = box_phi + st.Pmax**2 * inv_cap2 + z * z * beta
    dfp = -st.Pmax * inv_cap2 - st.g * z * beta
    dpp = 1.0 / p**2 + inv_cap2 + st.g * st.g * beta
    # determinant of each 2x2 block in expanded all-positive form;
    # the naive dff*dpp - dfp^2 cancels catastrophically when the cap
    # barrier (a rank-1 block) dominates
    ddet = (
        box_phi * (1.0 / p**2 + st.g**2 * beta)
        + z * z * beta / p**2
        + inv_cap2 * (
            st.Pmax**2 / p**2 + box_phi + beta * (st.Pmax * st.g - z) ** 2
        )
    )

    r = st.n_rb + st.K
    nc = phi.shape[0]
    uphi = np.zeros((nc, r))
    up = np.zeros((nc, r))
    alpha = np.sqrt(1.0 / c_rb**2 + t * st.pen_quad)
    uphi[np.arange(nc), st.rb] = st.exw * alpha[st.rb]
    cols = st.n_rb + st.robot
    uphi[np.arange(nc), cols] = dc_dphi * inv_crate_cell
    up[np.arange(nc), cols] = dc_dp * inv_crate_cell
    return (psi, f0, gphi, gp, dff, dfp, dpp, ddet, uphi, up, c_rb,
            c_rate, beta, inv_cap2, z)
