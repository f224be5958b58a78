"""Random subproblem generator shared by unit and acceptance tests."""

import numpy as np

from urllc_sched import fbl
from urllc_sched.convex import SubproblemSpec


def random_subproblem_spec(rng, kkt_tol=1e-6):
    """A small random SubproblemSpec; mostly feasible, sometimes not."""
    K = int(rng.integers(1, 3))
    M = int(rng.integers(1, 3))
    N = int(rng.integers(1, 3))
    mask = np.zeros((M, N, K), dtype=bool)
    D = [int(rng.integers(1, N + 1)) for _ in range(K)]
    for k in range(K):
        mask[:, : D[k], k] = True
    # log-uniform worst-case gains, roughly the desk-scale range
    g = 10.0 ** rng.uniform(2.5, 6.0, size=(M, N, K))
    eps = 10.0 ** rng.uniform(-7, -3, size=K)
    qinv = np.array([fbl.q_inv(e) for e in eps])
    # payloads scaled to the available cells so many draws are feasible
    cells = mask.sum(axis=(0, 1))
    B = rng.uniform(0.5, 4.0, size=K) * np.maximum(cells, 1)
    phi_anchor = np.where(mask, 1.0 / K, 0.0)
    l_anchor = np.maximum(phi_anchor.sum(axis=(0, 1)), 1e-6)
    kind = ("NONE", "NCP", "RW_L1")[int(rng.integers(0, 3))]
    lam = float(10.0 ** rng.uniform(-3, 1)) if kind != "NONE" else 0.0
    rw = None
    if kind == "RW_L1":
        rw = 1.0 / (np.where(mask, rng.uniform(0.0, 1.0, mask.shape), 0.0)
                    + 0.01)
    return SubproblemSpec(
        g=g, B=B, qinv=qinv, deadline_mask=mask,
        phi_anchor=phi_anchor, l_anchor=l_anchor,
        lam=lam, penalty_kind=kind, rw_weights=rw,
        Pmax=float(10.0 ** rng.uniform(-0.5, 0.5)),
        kkt_tol=kkt_tol,
    )
