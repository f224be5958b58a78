"""Water-filling power refit against an independent convex solver."""

import math

import numpy as np
import pytest

from urllc_sched import fbl
from urllc_sched.convex import power_refit, waterfill

cvxpy = pytest.importorskip("cvxpy")

LN2 = math.log(2.0)


def _cvxpy_min_power(g, target_bits, cap):
    n = len(g)
    p = cvxpy.Variable(n, nonneg=True)
    rate = cvxpy.sum(cvxpy.log1p(cvxpy.multiply(g, p))) / LN2
    prob = cvxpy.Problem(
        cvxpy.Minimize(cvxpy.sum(p)),
        [rate >= target_bits, p <= cap],
    )
    prob.solve(solver=cvxpy.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return None
    return float(np.sum(p.value))


def test_waterfill_matches_cvxpy(rng):
    for _ in range(10):
        n = int(rng.integers(1, 6))
        g = 10.0 ** rng.uniform(1.0, 4.0, size=n)
        cap = float(rng.uniform(0.5, 2.0))
        max_bits = float(np.sum(np.log1p(g * cap)) / LN2)
        target = rng.uniform(0.2, 0.9) * max_bits
        p = waterfill(g, target, cap)
        assert p is not None
        ref = _cvxpy_min_power(g, target, cap)
        assert ref is not None
        assert float(p.sum()) == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_waterfill_edge_cases():
    g = np.array([10.0, 20.0])
    assert np.all(waterfill(g, 0.0, 1.0) == 0.0)
    # infeasible even at the caps
    assert waterfill(g, 100.0, 0.1) is None
    # caps respected and the target met
    p = waterfill(g, 5.0, 1.0)
    assert np.all(p <= 1.0 + 1e-12)
    bits = float(np.sum(np.log1p(g * p)) / LN2)
    assert bits >= 5.0 - 1e-8


def test_waterfill_weighted():
    g = np.array([50.0, 50.0])
    w = np.array([1.0, 0.5])
    p = waterfill(g, 4.0, 10.0, weights=w)
    bits = float(np.sum(w * np.log1p(g * p / w)) / LN2)
    assert bits == pytest.approx(4.0, rel=1e-8)


def test_power_refit_meets_payload(rng):
    M, N, K = 3, 2, 2
    assignment = np.zeros((M, N, K), dtype=np.int8)
    for m in range(M):
        for n in range(N):
            assignment[m, n, (m + n) % K] = 1
    g = 10.0 ** rng.uniform(3.5, 5.5, size=(M, N, K))
    B = np.array([10.0, 12.0])
    qinv = np.array([fbl.q_inv(1e-6), fbl.q_inv(1e-6)])
    p, status, bad = power_refit(assignment, g, B, qinv, 1.0)
    assert status == "Optimal" and not bad
    for k in range(K):
        sel = assignment[..., k] > 0
        bits = fbl.achievable_bits(sel.astype(float),
                                   g[..., k] * p[..., k], qinv[k])
        assert bits >= B[k] - 1e-7
    assert np.all(p[assignment == 0] == 0.0)
    assert np.all(p <= 1.0 + 1e-12)


def test_power_refit_reports_bad_robots():
    assignment = np.zeros((1, 1, 2), dtype=np.int8)
    assignment[0, 0, 0] = 1          # robot 1 has no RBs at all
    g = np.full((1, 1, 2), 100.0)
    qinv = np.array([3.0, 3.0])
    p, status, bad = power_refit(assignment, g, np.array([2.0, 2.0]),
                                 qinv, 1.0)
    assert status == "Infeasible"
    assert bad == [1]
