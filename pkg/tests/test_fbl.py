"""Finite-blocklength rate math against high-precision reference values.

The q_inv reference constants were computed with 40-digit mpmath
(sqrt(2)*erfinv(1-2*eps)) before these tests were written.
"""

import math

import numpy as np
import pytest

from urllc_sched import fbl

QINV_REFERENCE = {
    1e-3: 3.0902323061678135415,
    1e-5: 4.2648907939228246285,
    1e-6: 4.7534243088228989482,
    1e-7: 5.1993375821928169316,
}


def test_q_inv_matches_reference():
    for eps, ref in QINV_REFERENCE.items():
        assert fbl.q_inv(eps) == pytest.approx(ref, rel=1e-12)


def test_q_round_trip():
    for eps in (1e-3, 1e-5, 1e-6, 1e-7):
        assert fbl.q_func(fbl.q_inv(eps)) == pytest.approx(eps, rel=1e-8)


def test_q_inv_vectorized():
    eps = np.array([1e-3, 1e-6])
    out = fbl.q_inv(eps)
    assert out.shape == (2,)
    assert out[0] == pytest.approx(QINV_REFERENCE[1e-3], rel=1e-12)


def test_q_inv_domain():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            fbl.q_inv(bad)


def test_q_func_basics():
    assert fbl.q_func(0.0) == pytest.approx(0.5)
    assert fbl.q_func(10.0) < 1e-20


def test_achievable_bits_zero_allocation():
    assert fbl.achievable_bits(np.zeros(3), np.ones(3), 4.0) == 0.0


def test_achievable_bits_known_value():
    # one full RB at SNR 1, no reliability backoff: exactly 1 bit
    assert fbl.achievable_bits(np.array([1.0]), np.array([1.0]), 0.0) == \
        pytest.approx(1.0)
    # backoff subtracts sqrt(l)*qinv/ln2 with l = 1
    got = fbl.achievable_bits(np.array([1.0]), np.array([3.0]), 2.0)
    assert got == pytest.approx(2.0 - 2.0 / math.log(2.0))


def test_achievable_bits_monotone_in_snr(rng):
    phi = rng.uniform(0.1, 1.0, size=6)
    snr = rng.uniform(1.0, 100.0, size=6)
    lo = fbl.achievable_bits(phi, snr, 3.0)
    hi = fbl.achievable_bits(phi, snr * 2.0, 3.0)
    assert hi > lo


def test_achievable_bits_rejects_negative():
    with pytest.raises(ValueError):
        fbl.achievable_bits(np.array([-0.1]), np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        fbl.achievable_bits(np.array([0.1]), np.array([-1.0]), 1.0)


def test_exact_dispersion_never_below_unit_dispersion(rng):
    # V = 1 - (1+snr)^-2 <= 1, so the diagnostic bound is never smaller
    for _ in range(20):
        n = rng.integers(1, 8)
        phi = rng.uniform(0.05, 1.0, size=n)
        snr = rng.uniform(0.1, 1e4, size=n)
        assert fbl.exact_dispersion_bits(phi, snr, 4.0) >= \
            fbl.achievable_bits(phi, snr, 4.0) - 1e-12


def test_sqrt_taylor_bound_majorizes(rng):
    for _ in range(50):
        l = float(rng.uniform(0.0, 50.0))
        anchor = float(rng.uniform(0.01, 50.0))
        assert fbl.sqrt_taylor_bound(l, anchor) >= math.sqrt(l) - 1e-12
    # tight at the anchor
    assert fbl.sqrt_taylor_bound(4.0, 4.0) == pytest.approx(2.0)


def test_sqrt_taylor_bound_domain():
    with pytest.raises(ValueError):
        fbl.sqrt_taylor_bound(1.0, 0.0)
    with pytest.raises(ValueError):
        fbl.sqrt_taylor_bound(-1.0, 1.0)


def test_make_rate_context(table1_config):
    ctx = fbl.make_rate_context(table1_config)
    assert len(ctx.qinv) == table1_config.K
    assert ctx.qinv[0] == pytest.approx(QINV_REFERENCE[1e-6], rel=1e-12)
