"""Exhaustive oracle and the sampled worst-case SNR check."""

import math

import numpy as np
import pytest

from urllc_sched import build_gain_matrix, fbl, generate_channels
from urllc_sched.config import ScenarioConfig
from urllc_sched.harness import tiny_config
from urllc_sched.oracle import exhaustive_optimum, sampled_worst_snr

LN2 = math.log(2.0)


def test_single_cell_oracle_matches_analytic():
    cfg = ScenarioConfig(
        K=1, M=1, N=1, Nt=2, Pmax=1.0, W=180e3, B=6.0, D=1, eps=1e-6,
        delta_sq=0.01, N0=-173.0, dist=50.0,
    )
    ch = generate_channels(cfg, 0)
    gm = build_gain_matrix(cfg, ch)
    res = exhaustive_optimum(gm, cfg)
    assert res.status == "Optimal"
    qinv = fbl.q_inv(1e-6)
    p_star = (2.0 ** (6.0 + qinv / LN2) - 1.0) / gm.g[0, 0, 0]
    assert res.p_tot == pytest.approx(p_star, rel=1e-10)
    assert res.assignment[0, 0, 0] == 1
    assert res.n_enumerated == 2


def test_oracle_respects_deadlines():
    cfg = tiny_config().replace(D=(1, 2))
    ch = generate_channels(cfg, 0)
    gm = build_gain_matrix(cfg, ch)
    res = exhaustive_optimum(gm, cfg)
    if res.status == "Optimal":
        assert not np.any(res.assignment[:, 1:, 0])   # robot 0: D=1


def test_oracle_instance_too_large():
    cfg = tiny_config().replace(K=3, M=4, N=4, D=(4, 4, 4),
                                B=(8.0, 8.0, 8.0), eps=(1e-6,) * 3,
                                dist=(50.0, 80.0, 100.0))
    ch = generate_channels(cfg, 0)
    gm = build_gain_matrix(cfg, ch)
    with pytest.raises(ValueError, match="exceeds"):
        exhaustive_optimum(gm, cfg)


def test_oracle_infeasible_detected():
    cfg = tiny_config().replace(B=(4000.0, 4000.0))
    ch = generate_channels(cfg, 0)
    gm = build_gain_matrix(cfg, ch)
    res = exhaustive_optimum(gm, cfg)
    assert res.status == "Infeasible"
    assert res.n_feasible == 0


def test_oracle_lower_bounds_solver(small_config):
    from urllc_sched.scheduler import solve_ncp

    for r in range(3):
        ch = generate_channels(small_config, r)
        gm = build_gain_matrix(small_config, ch)
        oracle = exhaustive_optimum(gm, small_config)
        sol = solve_ncp(gm, small_config, channels=ch)
        if oracle.status == "Optimal" and sol.status == "Solved":
            assert sol.p_tot >= oracle.p_tot - 1e-9


def test_sampled_worst_snr_delta_zero(rng):
    h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert sampled_worst_snr(h, 0.0, w) == pytest.approx(
        abs(np.vdot(h, w)) ** 2, rel=1e-12)


def test_sampled_worst_snr_certified_equality(rng):
    for _ in range(10):
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        delta = float(rng.uniform(0.05, 0.5 * np.linalg.norm(h)))
        p = float(rng.uniform(0.5, 2.0))
        w = np.sqrt(p) * h / np.linalg.norm(h)
        closed = (np.linalg.norm(h) - delta) ** 2 * p
        got = sampled_worst_snr(h, delta, w, n_samples=100, seed=3)
        assert got == pytest.approx(closed, rel=1e-12)


def test_sampled_worst_snr_ball_contains_origin(rng):
    h = 0.1 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    w = h / np.linalg.norm(h)
    assert sampled_worst_snr(h, 10.0, w, n_samples=50, seed=1) == 0.0


def test_sampled_worst_snr_rejects_negative_delta():
    with pytest.raises(ValueError):
        sampled_worst_snr(np.ones(2, dtype=complex), -0.1,
                          np.ones(2, dtype=complex))
