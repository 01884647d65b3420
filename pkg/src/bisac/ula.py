"""Uniform linear array geometry: steering vectors and the DoA derivative.

Both arrays are centro-symmetric ULAs referenced to the array midpoint, so
element m (0-based) of an M-element array sits at offset (2m - (M - 1)) * d / 2
from the phase center. With that reference the steering vector and its angle
derivative are exactly orthogonal, which the bound and estimator code relies
on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UlaConfig:
    """Transmit/receive ULA geometry.

    Args:
        m_tx: number of transmit elements (positive even integer).
        m_rx: number of receive elements (positive even integer).
        spacing: inter-element spacing in meters.
        wavelength: carrier wavelength in meters.
    """

    m_tx: int
    m_rx: int
    spacing: float
    wavelength: float

    def __post_init__(self) -> None:
        for name in ("m_tx", "m_rx"):
            m = getattr(self, name)
            if not isinstance(m, (int, np.integer)) or m <= 0 or m % 2 != 0:
                raise ValueError(f"{name} must be a positive even integer, got {m!r}")
        for name in ("spacing", "wavelength"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


def element_offsets(m: int) -> np.ndarray:
    """Midpoint-referenced element indices (2k - (m-1)), k = 0..m-1."""
    return 2.0 * np.arange(m) - (m - 1)


def _check_angle(angle: float) -> float:
    angle = float(angle)
    if not np.isfinite(angle) or abs(angle) > np.pi / 2 + 1e-12:
        raise ValueError(f"angle must lie in [-pi/2, pi/2] rad, got {angle!r}")
    return angle


def _steering(m: int, spacing: float, wavelength: float, angle: float) -> np.ndarray:
    phase = np.pi * spacing * np.sin(angle) / wavelength
    return np.exp(1j * phase * element_offsets(m))


def steering_tx(cfg: UlaConfig, phi: float) -> np.ndarray:
    """Transmit steering vector a(phi) toward departure angle phi (rad)."""
    return _steering(cfg.m_tx, cfg.spacing, cfg.wavelength, _check_angle(phi))


def steering_rx(cfg: UlaConfig, theta: float) -> np.ndarray:
    """Receive steering vector b(theta) toward arrival angle theta (rad)."""
    return _steering(cfg.m_rx, cfg.spacing, cfg.wavelength, _check_angle(theta))


def steering_rx_deriv(cfg: UlaConfig, theta: float) -> np.ndarray:
    """Elementwise derivative db/dtheta of the receive steering vector.

    Equals j * pi * spacing * cos(theta) / wavelength * offsets * b(theta);
    orthogonal to b(theta) by the midpoint phase reference.
    """
    theta = _check_angle(theta)
    b = _steering(cfg.m_rx, cfg.spacing, cfg.wavelength, theta)
    scale = 1j * np.pi * cfg.spacing * np.cos(theta) / cfg.wavelength
    return scale * element_offsets(cfg.m_rx) * b


def rx_deriv_norm_sq(cfg: UlaConfig, theta: float) -> float:
    """Closed form for ||db/dtheta||^2.

    The squared offsets sum to m(m^2 - 1)/3 for an m-element midpoint-
    referenced ULA, so the norm is (pi d cos(theta) / lambda)^2 * m(m^2-1)/3.
    """
    theta = _check_angle(theta)
    m = cfg.m_rx
    scale = np.pi * cfg.spacing * np.cos(theta) / cfg.wavelength
    return float(scale**2 * m * (m**2 - 1) / 3.0)
