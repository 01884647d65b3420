"""Propagation models and the scene description shared by bounds/estimators.

Distances are meters, powers are watts (conversion from dBm happens at the
config boundary), angles are radians. The only dB-valued model parameter is
the path-loss intercept, which is conventionally quoted in dB.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ula import UlaConfig, steering_rx, steering_rx_deriv, steering_tx


def db_to_lin(x_db: float) -> float:
    """dB -> linear power ratio."""
    return float(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))


def lin_to_db(x: float) -> float:
    """Linear power ratio -> dB."""
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"dB of a non-positive value: {x!r}")
    return float(10.0 * np.log10(x))


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss: k0_db at d0 meters, exponent per decade slope.

    Args:
        k0_db: gain in dB at the reference distance (negative in practice).
        d0: reference distance in meters.
        exponent: path-loss exponent (2 = free space).
    """

    k0_db: float
    d0: float
    exponent: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.k0_db):
            raise ValueError(f"k0_db must be finite, got {self.k0_db!r}")
        if not (np.isfinite(self.d0) and self.d0 > 0.0):
            raise ValueError(f"d0 must be positive, got {self.d0!r}")
        if not (np.isfinite(self.exponent) and self.exponent > 0.0):
            raise ValueError(f"exponent must be positive, got {self.exponent!r}")


def path_loss(model: PathLossModel, d: float) -> float:
    """Linear power gain K0 * (d / d0)^(-exponent) at distance d meters."""
    d = float(d)
    if not (np.isfinite(d) and d > 0.0):
        raise ValueError(f"distance must be positive, got {d!r}")
    return db_to_lin(model.k0_db) * (d / model.d0) ** (-model.exponent)


def target_gain(model: PathLossModel, d_bt: float, d_tr: float, beta: complex) -> complex:
    """Two-hop target amplitude alpha = beta * sqrt(L(d_bt) * L(d_tr)).

    Args:
        model: path-loss model applied to both hops.
        d_bt: transmitter-to-target distance (m).
        d_tr: target-to-receiver distance (m).
        beta: complex reflection coefficient of the target.
    """
    return complex(beta) * np.sqrt(path_loss(model, d_bt) * path_loss(model, d_tr))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def rician_cu_channel(
    cfg: UlaConfig,
    k_factor: float,
    los_angle: float,
    gain: float,
    seed,
) -> np.ndarray:
    """Draw the transmitter-to-user channel h with a Rician line of sight.

    h = sqrt(gain) * (sqrt(K/(1+K)) * a(los_angle) + sqrt(1/(1+K)) * w) with
    w ~ CN(0, I), so E||h||^2 = gain * m_tx for every K.

    Args:
        cfg: array geometry (only the transmit side is used).
        k_factor: Rician K >= 0; K = 0 is pure Rayleigh scattering.
        los_angle: line-of-sight departure angle in radians.
        gain: linear large-scale power gain.
        seed: int seed or a numpy Generator.
    """
    if not (np.isfinite(k_factor) and k_factor >= 0.0):
        raise ValueError(f"k_factor must be >= 0, got {k_factor!r}")
    if not (np.isfinite(gain) and gain > 0.0):
        raise ValueError(f"gain must be positive, got {gain!r}")
    rng = _as_rng(seed)
    los = steering_tx(cfg, los_angle)
    w = (rng.standard_normal(cfg.m_tx) + 1j * rng.standard_normal(cfg.m_tx)) / np.sqrt(2.0)
    h = np.sqrt(k_factor / (1.0 + k_factor)) * los + np.sqrt(1.0 / (1.0 + k_factor)) * w
    return np.sqrt(gain) * h


@dataclass(frozen=True)
class Scenario:
    """One sensing-plus-communication scene.

    Args:
        ula: transmit/receive array geometry.
        theta: target arrival angle at the sensing receiver (rad).
        phi: target departure angle at the transmitter (rad).
        alpha: complex target amplitude (two-hop gain times reflectivity).
        h: transmit-to-user channel, shape (m_tx,).
        p_max: transmit power budget in watts.
        sigma_c2: user noise power in watts.
        sigma_s2: sensing-receiver noise power in watts.
        t_symbols: coherent block length in symbols.
        gamma0: user SINR threshold (linear, >= 0); 0 disables the constraint.
    """

    ula: UlaConfig
    theta: float
    phi: float
    alpha: complex
    h: np.ndarray
    p_max: float
    sigma_c2: float
    sigma_s2: float
    t_symbols: int
    gamma0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("theta", "phi"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or abs(v) > np.pi / 2 + 1e-12:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2], got {v!r}")
        for name in ("p_max", "sigma_c2", "sigma_s2"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not (np.isfinite(self.gamma0) and self.gamma0 >= 0.0):
            raise ValueError(f"gamma0 must be >= 0, got {self.gamma0!r}")
        t = self.t_symbols
        if not isinstance(t, (int, np.integer)) or t <= 0:
            raise ValueError(f"t_symbols must be a positive integer, got {t!r}")
        if not np.isfinite(complex(self.alpha)):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        h = np.asarray(self.h, dtype=np.complex128)
        if h.shape != (self.ula.m_tx,):
            raise ValueError(f"h must have shape ({self.ula.m_tx},), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("h must be finite")
        object.__setattr__(self, "h", h)

    # Steering shorthand; every bound below consumes these three vectors.
    def steering_dod(self) -> np.ndarray:
        return steering_tx(self.ula, self.phi)

    def steering_doa(self) -> np.ndarray:
        return steering_rx(self.ula, self.theta)

    def doa_deriv(self) -> np.ndarray:
        return steering_rx_deriv(self.ula, self.theta)
