"""Finite-blocklength rate mathematics.

Achievable bits over a set of RBs under the normal approximation with
unit dispersion (the pessimistic bound used by the scheduler), plus the
exact-dispersion diagnostic and the convex upper bound on sqrt(l) used
inside the SCA subproblems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

LN2 = math.log(2.0)


def q_func(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def q_inv(eps):
    """Inverse of the Gaussian tail probability."""
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0.0) or np.any(eps >= 1.0):
        raise ValueError("eps must lie in (0, 1)")
    out = -special.ndtri(eps)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RateContext:
    """Per-robot precomputed Q^{-1}(eps) values."""

    qinv: tuple
    use_exact_dispersion: bool = False


def make_rate_context(config, use_exact_dispersion=False):
    return RateContext(
        qinv=tuple(q_inv(e) for e in config.eps),
        use_exact_dispersion=use_exact_dispersion,
    )


def _check_nonneg(phi, snr):
    if np.any(phi < 0):
        raise ValueError("phi entries must be nonnegative")
    if np.any(snr < 0):
        raise ValueError("SNR entries must be nonnegative")


def achievable_bits(phi, snr, qinv):
    """Bits deliverable over the allocation under unit dispersion.

    phi and snr are arrays of matching shape (allocation fractions and
    per-RB SNRs).  May be negative; a negative value means the allocation
    cannot carry any payload at the target reliability.
    """
    phi = np.asarray(phi, dtype=float)
    snr = np.asarray(snr, dtype=float)
    _check_nonneg(phi, snr)
    l = phi.sum()
    if l == 0.0:
        return 0.0
    return float(np.sum(phi * np.log2(1.0 + snr)) - math.sqrt(l) * qinv / LN2)


def exact_dispersion_bits(phi, snr, qinv):
    """Diagnostic variant keeping the dispersion 1 - (1+snr)^-2."""
    phi = np.asarray(phi, dtype=float)
    snr = np.asarray(snr, dtype=float)
    _check_nonneg(phi, snr)
    if phi.sum() == 0.0:
        return 0.0
    v = 1.0 - (1.0 + snr) ** -2
    disp = np.sum(phi * v)
    return float(np.sum(phi * np.log2(1.0 + snr)) - math.sqrt(disp) * qinv / LN2)


def sqrt_taylor_bound(l, l_anchor):
    """Convex upper bound (l + l_anchor) / (2*sqrt(l_anchor)) on sqrt(l).

    Tight exactly at l == l_anchor.
    """
    if l_anchor <= 0:
        raise ValueError("anchor must be positive")
    if l < 0:
        raise ValueError("l must be nonnegative")
    return (l + l_anchor) / (2.0 * math.sqrt(l_anchor))
