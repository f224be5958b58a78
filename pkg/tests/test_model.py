"""Channel model: path loss, noise, worst-case gain and generation.

Reference constants computed with 40-digit mpmath before the tests
were written.
"""

import numpy as np
import pytest

from urllc_sched import model
from urllc_sched.oracle import sampled_worst_snr

PL_240M = 3.3144061883441252692e-13          # 35.3 + 37.6*log10(240) dB
NOISE_180KHZ = 9.02137020529090113e-16       # -173 dBm/Hz over 180 kHz


def test_path_loss_reference_value():
    assert model.path_loss_linear(240.0, (35.3, 37.6)) == \
        pytest.approx(PL_240M, rel=1e-12)


def test_path_loss_vector_and_domain():
    out = model.path_loss_linear(np.array([100.0, 240.0]), (35.3, 37.6))
    assert out.shape == (2,)
    assert out[1] == pytest.approx(PL_240M, rel=1e-12)
    with pytest.raises(ValueError):
        model.path_loss_linear(0.0, (35.3, 37.6))


def test_noise_power_reference_value():
    assert model.noise_power(-173.0, 180e3) == \
        pytest.approx(NOISE_180KHZ, rel=1e-12)
    with pytest.raises(ValueError):
        model.noise_power(-173.0, 0.0)


def test_worst_case_gain_closed_form(rng):
    for _ in range(20):
        nt = int(rng.integers(1, 8))
        h = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        delta = float(rng.uniform(0.0, 2.0))
        pl, s2 = 1e-12, 1e-15
        expect = pl * max(0.0, np.linalg.norm(h) - delta) ** 2 / s2
        assert model.worst_case_gain(h, delta, pl, s2) == \
            pytest.approx(expect, rel=1e-12, abs=1e-30)


def test_worst_case_gain_clamps_to_zero():
    h = np.array([0.1 + 0.0j])
    assert model.worst_case_gain(h, 5.0, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        model.worst_case_gain(h, -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        model.worst_case_gain(h, 1.0, 0.0, 1.0)


def test_worst_case_error_attains_bound(rng):
    # the certified error vector achieves exactly (||h||-delta)^2 * p
    for _ in range(10):
        nt = int(rng.integers(2, 6))
        h = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        delta = float(rng.uniform(0.01, 0.5 * np.linalg.norm(h)))
        p = float(rng.uniform(0.1, 2.0))
        e = model.worst_case_error(h, delta)
        assert np.linalg.norm(e) == pytest.approx(delta, rel=1e-12)
        w = np.sqrt(p) * h / np.linalg.norm(h)
        snr_num = abs(np.vdot(h + e, w)) ** 2
        assert snr_num == pytest.approx(
            (np.linalg.norm(h) - delta) ** 2 * p, rel=1e-12
        )


def test_worst_case_error_zero_channel():
    with pytest.raises(ValueError):
        model.worst_case_error(np.zeros(2, dtype=complex), 0.1)


def test_sampled_worst_snr_never_below_certified(rng):
    for _ in range(10):
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        delta = 0.2
        w = h / np.linalg.norm(h)
        closed = max(0.0, np.linalg.norm(h) - delta) ** 2
        sampled = sampled_worst_snr(h, delta, w, n_samples=200, seed=7,
                                    include_worst=False)
        assert sampled >= closed - 1e-12


def test_generate_channels_deterministic(small_config):
    a = model.generate_channels(small_config, 3)
    b = model.generate_channels(small_config, 3)
    c = model.generate_channels(small_config, 4)
    assert np.array_equal(a.hhat, b.hhat)
    assert not np.array_equal(a.hhat, c.hhat)
    M, N, K, Nt = a.hhat.shape
    assert (M, N, K, Nt) == (small_config.M, small_config.N,
                             small_config.K, small_config.Nt)


def test_generate_channels_unit_variance(table1_config):
    ch = model.generate_channels(table1_config, 0)
    var = np.mean(np.abs(ch.hhat) ** 2)
    assert var == pytest.approx(1.0, rel=0.1)


def test_channelset_immutable(small_config):
    ch = model.generate_channels(small_config, 0)
    with pytest.raises(ValueError):
        ch.hhat[0, 0, 0, 0] = 0.0


def test_build_gain_matrix_matches_scalar_form(small_config):
    ch = model.generate_channels(small_config, 1)
    gm = model.build_gain_matrix(small_config, ch)
    pl = model.path_loss_linear(np.asarray(small_config.dist),
                                small_config.pathloss)
    for m in range(small_config.M):
        for n in range(small_config.N):
            for k in range(small_config.K):
                expect = model.worst_case_gain(
                    ch.hhat[m, n, k], small_config.delta, pl[k],
                    small_config.sigma_sq,
                )
                assert gm.g[m, n, k] == pytest.approx(expect, rel=1e-12)


def test_gain_matrix_rejects_negative():
    with pytest.raises(ValueError):
        model.GainMatrix(g=np.array([[-1.0]]))
