"""Channel generation and the worst-case SNR reduction.

Under the bounded CSI error model (error norm <= delta around the
estimate), the optimal fixed-power beamformer aligns with the channel
estimate, which collapses beamforming into scalar power control with an
effective gain per (RB, symbol, robot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def path_loss_linear(d, coeffs):
    """Linear power gain of the a + b*log10(d) dB path-loss model."""
    a, b = coeffs
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = 10.0 ** (-(a + b * np.log10(d)) / 10.0)
    return float(out) if out.ndim == 0 else out


def noise_power(N0_dbm_per_hz, W_hz):
    """Noise power in watts over one RB of bandwidth W (N0 in dBm/Hz)."""
    if W_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return 10.0 ** ((N0_dbm_per_hz + 10.0 * math.log10(W_hz) - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelSet:
    """Small-scale channel estimates, shape (M, N, K, Nt)."""

    hhat: np.ndarray
    realization_seed: tuple

    def __post_init__(self):
        if self.hhat.ndim != 4:
            raise ValueError("hhat must have shape (M, N, K, Nt)")
        if not np.all(np.isfinite(self.hhat.view(float))):
            raise ValueError("hhat contains non-finite entries")
        self.hhat.setflags(write=False)


@dataclass(frozen=True)
class GainMatrix:
    """Worst-case effective power gains (1/watt), shape (M, N, K)."""

    g: np.ndarray

    def __post_init__(self):
        if np.any(self.g < 0):
            raise ValueError("gains must be nonnegative")
        self.g.setflags(write=False)


def channel_rng(seed, realization_index):
    """Independent, order-free stream for one channel realization."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(realization_index)])
    )


def generate_channels(config, realization_index):
    """Draw i.i.d. unit-variance circularly symmetric Gaussian estimates."""
    rng = channel_rng(config.seed, realization_index)
    shape = (config.M, config.N, config.K, config.Nt)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    hhat = (re + 1j * im) / math.sqrt(2.0)
    return ChannelSet(hhat=hhat, realization_seed=(config.seed, realization_index))


def worst_case_gain(hhat, delta, pl, sigma_sq):
    """Effective gain pl*(||hhat|| - delta)^2 / sigma^2, clamped at zero.

    The worst-case SNR at transmit power p is then gain * p.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if sigma_sq <= 0 or pl <= 0:
        raise ValueError("pl and sigma_sq must be positive")
    amp = max(0.0, float(np.linalg.norm(hhat)) - delta)
    return pl * amp * amp / sigma_sq


def worst_case_error(hhat, delta):
    """The error vector attaining the worst-case SNR: -delta*hhat/||hhat||."""
    hhat = np.asarray(hhat)
    norm = np.linalg.norm(hhat)
    if norm == 0:
        raise ValueError("channel estimate must be nonzero")
    return -delta * hhat / norm


def build_gain_matrix(config, channels):
    """Worst-case gains for every (RB, symbol, robot) of one realization."""
    norms = np.linalg.norm(channels.hhat, axis=-1)          # (M, N, K)
    amp = np.maximum(0.0, norms - config.delta)
    pl = path_loss_linear(np.asarray(config.dist), config.pathloss)  # (K,)
    g = pl[None, None, :] * amp**2 / config.sigma_sq
    return GainMatrix(g=g)
