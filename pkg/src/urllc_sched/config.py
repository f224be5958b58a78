"""Scenario configuration, unit conversions and presets.

All powers are kept in watts internally; dBm (and dBm/Hz for the noise
PSD) appear only at the file/CLI interface.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
import math
from dataclasses import dataclass, field

import yaml


def dbm_to_watt(x_dbm):
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watt_to_dbm(x_watt):
    if x_watt <= 0.0:
        return -math.inf
    return 10.0 * math.log10(x_watt) + 30.0


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the outer penalized loop and the inner convex solver."""

    lambda0: float = 0.001      # initial penalty factor
    eta: float = 1.8            # penalty scaling factor per outer iteration
    epsilon: float = 1e-4       # relative tolerance on total-power change
    eps_penalty: float = 1e-5   # absolute tolerance on the unit sparsity penalty
    max_outer: int = 100
    method: str = "NCP"         # NCP | RW_L1
    xi: float = 0.01            # reweighting offset for RW_L1
    binary_tol: float = 0.5     # rounding threshold on relaxed assignments
    sparsity_tol: float = 0.01  # entry counts as "used" in the soft l0 measure
    kkt_tol: float = 1e-6
    feas_tol: float = 1e-8
    newton_max: int = 200       # Newton iteration cap per centering stage

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.eta <= 1:
            raise ValueError("eta must exceed 1")
        if self.epsilon <= 0 or self.eps_penalty <= 0:
            raise ValueError("tolerances must be positive")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.method not in ("NCP", "RW_L1"):
            raise ValueError(f"unknown method {self.method!r}")


def _per_robot(value, K, name):
    """Broadcast a scalar or validate a length-K sequence."""
    if isinstance(value, (int, float)):
        return (float(value),) * K
    vals = tuple(float(v) for v in value)
    if len(vals) != K:
        raise ValueError(f"{name} must have length K={K}, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class ScenarioConfig:
    """Full problem instance: dimensions, QoS targets and channel model."""

    K: int                      # robots
    M: int                      # RBs per OFDM symbol
    N: int                      # OFDM symbols
    Nt: int                     # transmit antennas
    Pmax: float                 # per-RB power cap (watts)
    W: float                    # per-RB bandwidth (Hz)
    B: tuple                    # payload bits per robot
    D: tuple                    # deadline in OFDM symbols per robot
    eps: tuple                  # packet error probability per robot
    delta_sq: float             # CSI error bound on the small-scale channel
    N0: float                   # noise PSD (dBm/Hz)
    dist: tuple                 # controller-robot distance (m)
    pathloss: tuple = (35.3, 37.6)   # a + b*log10(d) dB
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        for name in ("K", "M", "N", "Nt"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.Pmax <= 0:
            raise ValueError("Pmax must be positive")
        if self.W <= 0:
            raise ValueError("W must be positive")
        if self.delta_sq < 0:
            raise ValueError("delta_sq must be nonnegative")
        object.__setattr__(self, "B", _per_robot(self.B, self.K, "B"))
        object.__setattr__(self, "eps", _per_robot(self.eps, self.K, "eps"))
        object.__setattr__(self, "dist", _per_robot(self.dist, self.K, "dist"))
        D = self.D
        if isinstance(D, (int, float)):
            D = (int(D),) * self.K
        else:
            D = tuple(int(d) for d in D)
        if len(D) != self.K:
            raise ValueError(f"D must have length K={self.K}")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "pathloss", tuple(float(c) for c in self.pathloss))
        if len(self.pathloss) != 2:
            raise ValueError("pathloss must be a pair (a, b)")
        for k in range(self.K):
            if not 0.0 < self.eps[k] < 0.5:
                raise ValueError(f"eps[{k}] must lie in (0, 0.5)")
            if self.B[k] <= 0:
                raise ValueError(f"B[{k}] must be positive")
            if not 1 <= self.D[k] <= self.N:
                raise ValueError(f"D[{k}] must satisfy 1 <= D <= N={self.N}")
            if self.dist[k] <= 0:
                raise ValueError(f"dist[{k}] must be positive")

    @property
    def delta(self):
        return math.sqrt(self.delta_sq)

    @property
    def sigma_sq(self):
        """Per-RB noise power in watts."""
        from .model import noise_power

        return noise_power(self.N0, self.W)

    def replace(self, **kwargs):
        return dataclasses.replace(self, **kwargs)


def config_from_dict(data):
    """Build a ScenarioConfig from file keys (Pmax given in dBm)."""
    data = dict(data)
    solver = SolverOptions(**data.pop("solver", {}))
    try:
        pmax_dbm = data.pop("Pmax")
    except KeyError:
        raise ValueError("config is missing required key 'Pmax'") from None
    required = ("K", "M", "N", "Nt", "W", "B", "D", "eps", "delta_sq", "N0", "dist")
    missing = [key for key in required if key not in data]
    if missing:
        raise ValueError(f"config is missing required keys: {', '.join(missing)}")
    return ScenarioConfig(Pmax=dbm_to_watt(float(pmax_dbm)), solver=solver, **data)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    try:
        return config_from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from exc


PRESET_NAMES = ("table1",)


def preset_text(name):
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    ref = importlib.resources.files("urllc_sched.presets") / f"{name}.yaml"
    return ref.read_text(encoding="utf-8")


def load_preset(name):
    data = yaml.safe_load(preset_text(name))
    return config_from_dict(data)


def table1():
    """The reference desk-scale scenario used throughout the experiments."""
    return load_preset("table1")
