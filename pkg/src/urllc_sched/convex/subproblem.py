"""Inner convex subproblem: relaxed assignment + power control.

Minimizes total power plus a sparsity penalty subject to the linearized
rate bound per robot, per-RB exclusivity, the per-RB power cap and box
constraints.  Solved with a log-barrier interior-point method; each
Newton system is inverted through its diagonal-plus-low-rank structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.optimize import linprog

from ._backend import kernels
from .refit import waterfill

LN2 = math.log(2.0)

PENALTY_KINDS = ("NCP", "RW_L1", "NONE")


def perspective_rate(phi, p, g):
    """phi * log2(1 + g*p/phi), extended by continuity to 0 at phi=0, p=0."""
    if phi < 0 or p < 0 or g < 0:
        raise ValueError("phi, p and g must be nonnegative")
    if phi == 0.0:
        return 0.0
    return phi * math.log1p(g * p / phi) / LN2


@dataclass
class SubproblemSpec:
    g: np.ndarray              # (M, N, K) worst-case gains
    B: np.ndarray              # (K,) payload bits
    qinv: np.ndarray           # (K,)
    deadline_mask: np.ndarray  # (M, N, K) bool
    phi_anchor: np.ndarray     # (M, N, K)
    l_anchor: np.ndarray       # (K,) positive
    lam: float = 0.0
    penalty_kind: str = "NONE"
    rw_weights: np.ndarray | None = None
    Pmax: float = 1.0
    kkt_tol: float = 1e-6
    feas_tol: float = 1e-8
    newton_max: int = 200
    warm_start: tuple | None = None   # optional (phi, p) dense arrays

    def __post_init__(self):
        if self.penalty_kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.penalty_kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if np.any(np.asarray(self.l_anchor) <= 0):
            raise ValueError("l_anchor entries must be positive")
        if self.penalty_kind == "RW_L1" and self.rw_weights is None:
            raise ValueError("RW_L1 penalty requires rw_weights")


@dataclass
class SubproblemSolution:
    phi: np.ndarray
    p: np.ndarray
    objective: float
    p_tot: float
    rate_slack: np.ndarray
    kkt_residual: float
    status: str               # Optimal | Infeasible | MaxIter
    newton_iters: int = 0
    message: str = ""


class _Structure:
    """Flattened cell view of one subproblem (masked cells only)."""

    def __init__(self, spec):
        g = np.asarray(spec.g, dtype=float)
        M, N, K = g.shape
        mask = np.asarray(spec.deadline_mask, dtype=bool)
        # cells sorted by robot, then (m, n)
        cell_list = [
            (k, m, n) for k in range(K) for m in range(M) for n in range(N)
            if mask[m, n, k]
        ]
        if not cell_list:
            raise ValueError("deadline mask leaves no usable cells")
        self.K = K
        self.shape = (M, N, K)
        self.mask = mask
        self.robot = np.array([c[0] for c in cell_list], dtype=np.int64)
        self.m_idx = np.array([c[1] for c in cell_list], dtype=np.int64)
        self.n_idx = np.array([c[2] for c in cell_list], dtype=np.int64)
        self.nc = len(cell_list)
        self.g = g[self.m_idx, self.n_idx, self.robot]
        self.robot_ptr = np.searchsorted(self.robot, np.arange(K + 1))

        # active RBs: (m, n) pairs covered by at least one cell
        rb_key = self.m_idx * N + self.n_idx
        uniq, inv = np.unique(rb_key, return_inverse=True)
        self.rb = inv.astype(np.int64)
        self.n_rb = len(uniq)
        self.rb_count = np.bincount(self.rb, minlength=self.n_rb)

        la = np.asarray(spec.l_anchor, dtype=float)
        self.a = np.asarray(spec.qinv, dtype=float) / (2.0 * np.sqrt(la) * LN2)
        self.b = np.asarray(spec.B, dtype=float) + np.sqrt(la) * np.asarray(
            spec.qinv, dtype=float
        ) / (2.0 * LN2)
        self.Pmax = float(spec.Pmax)

        anchor = np.asarray(spec.phi_anchor, dtype=float)
        self.exw = np.ones(self.nc)
        if spec.penalty_kind == "NCP":
            self.pen_quad = float(spec.lam)
            self.pen_lin = -spec.lam * anchor[self.m_idx, self.n_idx, self.robot]
        elif spec.penalty_kind == "RW_L1":
            # reweighted l1: the per-RB exclusivity constraint becomes
            # sum_k w_k phi_k <= 1 with w from the previous iterate
            self.pen_quad = 0.0
            self.pen_lin = np.zeros(self.nc)
            w = np.asarray(spec.rw_weights, dtype=float)
            self.exw = w[self.m_idx, self.n_idx, self.robot]
        else:
            self.pen_quad = 0.0
            self.pen_lin = np.zeros(self.nc)
        # constant term of the linearized penalty (reported objective only)
        if spec.penalty_kind == "NCP":
            am = np.where(mask, anchor, 0.0)
            self.pen_const = 0.5 * spec.lam * float(np.sum(np.sum(am, axis=2) ** 2))
        else:
            self.pen_const = 0.0
        self.n_constraints = 4 * self.nc + self.n_rb + self.K

    def dense(self, vec):
        out = np.zeros(self.shape)
        out[self.m_idx, self.n_idx, self.robot] = vec
        return out

    def flat(self, arr):
        return np.asarray(arr, dtype=float)[self.m_idx, self.n_idx, self.robot]

    def rate_slack(self, phi, p):
        z = np.zeros(self.nc)
        pos = phi > 0
        z[pos] = self.g[pos] * p[pos] / phi[pos]
        u = np.where(pos, phi * np.log1p(z), 0.0)
        su = np.zeros(self.K)
        sp = np.zeros(self.K)
        np.add.at(su, self.robot, u)
        np.add.at(sp, self.robot, phi)
        return su / LN2 - self.a * sp - self.b


def _max_rate_weights(st):
    """Bits per unit phi at full per-RB power (the rate bound is linear
    in phi when every cell transmits at its cap)."""
    return np.log1p(st.g * st.Pmax) / LN2 - st.a[st.robot]


def _phase1_lp(st):
    """Max-slack LP over phi at full power; certifies subproblem
    (in)feasibility.  Returns (slack, phi) or (None, None) on LP failure."""
    nc = st.nc
    omega = _max_rate_weights(st)
    # variables: phi (nc), s; maximize s
    c = np.zeros(nc + 1)
    c[-1] = -1.0
    A_ub = []
    b_ub = []
    # rate: -sum(omega*phi) + s <= -b_k
    for k in range(st.K):
        row = np.zeros(nc + 1)
        sl = slice(st.robot_ptr[k], st.robot_ptr[k + 1])
        row[sl] = -omega[sl]
        row[-1] = 1.0
        A_ub.append(row)
        b_ub.append(-st.b[k])
    # (weighted) exclusivity: sum_rb exw * phi <= 1
    for j in range(st.n_rb):
        row = np.zeros(nc + 1)
        sel = st.rb == j
        row[:nc][sel] = st.exw[sel]
        A_ub.append(row)
        b_ub.append(1.0)
    bounds = [(0.0, 1.0)] * nc + [(None, None)]
    res = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub), bounds=bounds,
                  method="highs")
    if not res.success:
        return None, None
    return float(res.x[-1]), res.x[:nc]


def _interiorize_phi(st, phi, margin=1e-7):
    """Push phi strictly inside its box and the exclusivity simplex."""
    phi = np.clip(phi, margin, 1.0 - margin)
    s_rb = np.zeros(st.n_rb)
    np.add.at(s_rb, st.rb, st.exw * phi)
    scale = np.minimum(1.0, (1.0 - margin) / np.maximum(s_rb, margin))
    # no re-clip after rescaling: raising entries back to the floor
    # could push a weighted RB sum above 1 again
    return phi * scale[st.rb]


def _powers_for(st, phi, slack_target, cap_frac=0.995):
    """Strictly feasible powers for fixed phi via capped water-filling,
    or None."""
    caps = cap_frac * phi * st.Pmax
    sum_phi = np.zeros(st.K)
    np.add.at(sum_phi, st.robot, phi)
    p = np.zeros(st.nc)
    for k in range(st.K):
        sl = slice(st.robot_ptr[k], st.robot_ptr[k + 1])
        target = st.b[k] + st.a[k] * sum_phi[k] + slack_target[k]
        pk = waterfill(st.g[sl], target, caps[sl], weights=phi[sl])
        if pk is None:
            return None
        p[sl] = pk
    # floor idle cells well away from the p > 0 barrier boundary
    return np.clip(p, 1e-6 * caps, caps)


def _initial_point(st, spec):
    """Strictly feasible start: warm point, uniform split, then LP
    phase 1.  Returns (phi, p) or a certificate string on infeasibility."""
    scale = 1.0 + np.abs(st.b)
    margins = [1e-2 * scale, 1e-4 * scale, 1e-7 * scale]

    candidates = []
    if spec.warm_start is not None:
        wphi, wp = spec.warm_start
        base_phi = st.flat(wphi)
        base_p = st.flat(wp)
        # the warm point may sit on the rate boundary; inflating (phi, p)
        # together raises the rate proportionally and restores slack
        for tau in (1.0, 1.002, 1.02):
            phi = _interiorize_phi(st, tau * base_phi)
            candidates.append((phi, tau * base_p))
    phi_unif = _interiorize_phi(st, 0.95 / st.rb_count[st.rb])
    candidates.append((phi_unif, None))

    def _usable(phi, p):
        return (np.all(st.rate_slack(phi, p) > 0)
                and kernels.eval_point(phi, p, 1.0, st)[0])

    for phi, p_hint in candidates:
        if p_hint is not None:
            # clip as gently as possible: cap-saturated warm points lose
            # rate feasibility if pushed far off the cap boundary
            for cap_frac in (0.995, 1.0 - 1e-9):
                caps = cap_frac * phi * st.Pmax
                p = np.clip(p_hint, 1e-9 * caps, caps)
                if _usable(phi, p):
                    return phi, p
        for margin in margins:
            for cap_frac in (0.995, 1.0 - 1e-6):
                p = _powers_for(st, phi, margin, cap_frac)
                if p is not None and _usable(phi, p):
                    return phi, p

    slack, phi_lp = _phase1_lp(st)
    if slack is None:
        return "phase-1 LP failed"
    if slack <= 1e-9 * float(np.max(scale)):
        return (
            "infeasible: even at full per-RB power the best fractional "
            f"allocation misses the rate targets (max slack {slack:.3e} bits)"
        )
    # the LP optimum sits on a vertex; blend it toward the uniform
    # split so the barrier method starts from a well-centered point
    for gamma in (0.3, 0.1, 0.02, 0.0):
        phi = _interiorize_phi(
            st, (1.0 - gamma) * phi_lp + gamma * phi_unif, margin=1e-6
        )
        for frac in (0.25, 0.05, 0.005):
            p = _powers_for(st, phi, np.full(st.K, frac * slack))
            if p is not None and _usable(phi, p):
                return phi, p
    return "infeasible: no strictly interior point found (boundary-tight instance)"


def _newton_direction(st, phi, p, gphi, gp, dff, dfp, dpp, det,
                      uphi, up, beta, inv_cap2, z):
    # Jacobi-equilibrate first: barrier curvatures span ~16 orders of
    # magnitude near the boundary and the raw Woodbury solve loses all
    # accuracy there.  In scaled variables the 2x2 blocks have unit
    # diagonal and off-diagonal in (-1, 1).
    sf = 1.0 / np.sqrt(dff)
    sp = 1.0 / np.sqrt(dpp)
    off = dfp * sf * sp
    det_s = det * (sf * sf) * (sp * sp)
    gf_s = gphi * sf
    gp_s = gp * sp
    uf_s = uphi * sf[:, None]
    up_s = up * sp[:, None]

    # Hessian is D + U U^T with 2x2-block-diagonal D; invert through the
    # matrix-inversion lemma with W = D^{-1} U
    wphi = (uf_s - off[:, None] * up_s) / det_s[:, None]
    wp = (up_s - off[:, None] * uf_s) / det_s[:, None]
    r = uphi.shape[1]
    C = np.eye(r) + uf_s.T @ wphi + up_s.T @ wp
    try:
        cf = sla.cho_factor(C, check_finite=False)

        def csolve(rhs):
            return sla.cho_solve(cf, rhs, check_finite=False)
    except sla.LinAlgError:
        def csolve(rhs):
            return np.linalg.lstsq(C, rhs, rcond=None)[0]

    def hinv(rphi, rp):
        yphi = (rphi - off * rp) / det_s
        yp = (rp - off * rphi) / det_s
        v = csolve(uf_s.T @ yphi + up_s.T @ yp)
        return yphi - wphi @ v, yp - wp @ v

    def happly(xphi, xp):
        s = uf_s.T @ xphi + up_s.T @ xp
        return (xphi + off * xp + uf_s @ s,
                off * xphi + xp + up_s @ s)

    hphi, hp = hinv(gf_s, gp_s)
    # one step of iterative refinement: the Woodbury correction loses
    # digits when the low-rank part dominates the diagonal
    rphi, rp = happly(hphi, hp)
    cphi, cp = hinv(rphi - gf_s, rp - gp_s)
    dphi, dp = -(hphi - cphi) * sf, -(hp - cp) * sp

    # Newton decrement^2 = d^T H d accumulated as a sum of squares over
    # the PSD pieces of H, so cancellation cannot drive it negative
    s = uphi.T @ dphi + up.T @ dp
    dec_sq = float(
        np.sum((dphi / phi) ** 2)
        + np.sum((dphi / (1.0 - phi)) ** 2)
        + np.sum((dp / p) ** 2)
        + np.sum(inv_cap2 * (st.Pmax * dphi - dp) ** 2)
        + np.sum(beta * (z * dphi - st.g * dp) ** 2)
        + np.sum(s * s)
    )
    return dphi, dp, dec_sq


def _center(st, phi, p, t, newton_max, dec_tol=1e-8):
    """Damped Newton to the central point at barrier parameter t.

    Returns (phi, p, iters, dec_sq, ok).  A stalled line search counts
    as converged when the decrement certifies the quadratic region: the
    residual centering error in the objective is dec_sq/(2t), folded by
    the caller into the reported optimality residual.
    """
    iters = 0
    dec_sq = math.inf
    for _ in range(newton_max):
        out = kernels.assemble(phi, p, t, st)
        (psi, f0, gphi, gp, dff, dfp, dpp, ddet, uphi, up, c_rb, c_rate,
         beta, inv_cap2, z) = out
        dphi, dp, dec_sq = _newton_direction(
            st, phi, p, gphi, gp, dff, dfp, dpp, ddet, uphi, up,
            beta, inv_cap2, z,
        )
        iters += 1
        if dec_sq <= dec_tol:
            return phi, p, iters, dec_sq, True
        step = 1.0
        accepted = False
        for _ in range(60):
            ok, psi_new, _ = kernels.eval_point(phi + step * dphi, p + step * dp, t, st)
            if ok and psi_new <= psi - 0.01 * step * dec_sq:
                phi = phi + step * dphi
                p = p + step * dp
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # the direction can lose accuracy at extreme t; settle for
            # any strict decrease before declaring a stall
            step = 1.0
            for _ in range(60):
                ok, psi_new, _ = kernels.eval_point(
                    phi + step * dphi, p + step * dp, t, st
                )
                if ok and psi_new < psi:
                    phi = phi + step * dphi
                    p = p + step * dp
                    accepted = True
                    break
                step *= 0.5
        if not accepted:
            return phi, p, iters, dec_sq, dec_sq <= 0.25
    return phi, p, iters, dec_sq, dec_sq <= 0.25


def solve_p4(spec):
    """Solve the penalized relaxed subproblem by barrier continuation."""
    st = _Structure(spec)
    start = _initial_point(st, spec)
    if isinstance(start, str):
        status = "Infeasible" if start.startswith("infeasible") else "MaxIter"
        return SubproblemSolution(
            phi=np.zeros(st.shape), p=np.zeros(st.shape), objective=math.nan,
            p_tot=math.nan, rate_slack=np.full(st.K, -math.inf),
            kkt_residual=math.inf, status=status, message=start,
        )
    phi, p = start

    m = st.n_constraints
    _, _, f0 = kernels.eval_point(phi, p, 1.0, st)
    # accuracy target: at large penalty weights |f0| is dominated by the
    # penalty, but the quantity that must still be resolved is the power
    # sum (watts); take whichever scale is tighter
    scale = 1.0 + min(abs(f0), float(p.sum()))
    gap_target = 0.5 * spec.kkt_tol * scale
    t_final = m / gap_target
    t = min(max(1.0, m / (0.5 * scale)), t_final)
    total_iters = 0
    converged = True
    dec_sq = math.inf
    t_grow = 10.0
    last_good = None           # (t, phi, p) of the last centered stage
    while True:
        phi_n, p_n, iters, dec_sq, ok = _center(st, phi, p, t, spec.newton_max)
        total_iters += iters
        if ok:
            phi, p = phi_n, p_n
            if t >= t_final:
                break
            last_good = (t, phi, p)
            # never overshoot the target: the Newton system conditioning
            # grows like t^2 and extra barrier stages only cost accuracy
            t = min(t * t_grow, t_final)
        elif last_good is not None and t_grow > 1.5:
            # a stalled stage usually means the jump in t left the Newton
            # basin at extreme conditioning; rewind and continue gentler
            t_grow = math.sqrt(t_grow)
            t_prev, phi, p = last_good
            t = min(t_prev * t_grow, t_final)
        else:
            converged = False
            break

    _, _, f0 = kernels.eval_point(phi, p, t, st)
    # certified suboptimality: duality gap at the (approximate) center
    # plus the centering error dec_sq/(2t)
    # dec_sq can go slightly negative from cancellation at the noise floor
    gap = (m / t + min(max(dec_sq, 0.0), 0.25) / (2.0 * t)) if converged else math.inf
    kkt_residual = gap / (1.0 + abs(f0))

    slack = st.rate_slack(phi, p)
    status = "Optimal" if converged else "MaxIter"
    return SubproblemSolution(
        phi=st.dense(phi), p=st.dense(p),
        objective=float(f0 + st.pen_const),
        p_tot=float(p.sum()),
        rate_slack=slack,
        kkt_residual=float(kkt_residual),
        status=status,
        newton_iters=total_iters,
    )


def check_solution(spec, sol, tol_factor=10.0):
    """Independent constraint checker: re-evaluates every constraint of
    the subproblem from the raw spec.  Returns a dict of margins (>= 0
    means satisfied within tolerance)."""
    tol = tol_factor * spec.kkt_tol
    phi = np.asarray(sol.phi, dtype=float)
    p = np.asarray(sol.p, dtype=float)
    mask = np.asarray(spec.deadline_mask, dtype=bool)
    g = np.asarray(spec.g, dtype=float)
    la = np.asarray(spec.l_anchor, dtype=float)
    qinv = np.asarray(spec.qinv, dtype=float)
    B = np.asarray(spec.B, dtype=float)
    K = g.shape[2]

    margins = {}
    margins["phi_box"] = float(min(phi.min(), (1.0 - phi).min())) + tol
    margins["mask_zero"] = float(-np.abs(phi[~mask]).max()) + tol if np.any(~mask) else tol
    if spec.penalty_kind == "RW_L1":
        w = np.asarray(spec.rw_weights, dtype=float)
        excl = 1.0 - (w * phi).sum(axis=2)
    else:
        excl = 1.0 - phi.sum(axis=2)
    margins["exclusivity"] = float(excl.min()) + tol
    pscale = 1.0 + spec.Pmax
    margins["p_nonneg"] = float(p.min()) + tol * pscale
    margins["p_cap"] = float((phi * spec.Pmax - p).min()) + tol * pscale
    rate_margin = math.inf
    for k in range(K):
        rate = 0.0
        for m in range(g.shape[0]):
            for n in range(g.shape[1]):
                rate += perspective_rate(phi[m, n, k], p[m, n, k], g[m, n, k])
        l = float(phi[:, :, k].sum())
        bound = (l + la[k]) / (2.0 * math.sqrt(la[k])) * qinv[k] / LN2
        rate_margin = min(rate_margin, (rate - bound - B[k]) + tol * (1.0 + abs(B[k])))
    margins["rate"] = float(rate_margin)
    margins["ok"] = all(v >= 0 for key, v in margins.items() if key != "ok")
    return margins
