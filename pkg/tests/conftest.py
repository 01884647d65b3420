"""Shared helpers: random scenarios, PSD draws, same-total covariance splits."""

import numpy as np

from bisac.channel import Scenario
from bisac.ula import UlaConfig


def rand_psd(rng, m, trace=None):
    """Random PSD matrix; rescaled to the requested trace when given."""
    g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    r = g @ g.conj().T / m
    if trace is not None:
        r *= trace / np.trace(r).real
    return r


def rand_split(rng, r):
    """Split r = r_c + r_s with both parts PSD (random eigenvalue shares)."""
    lam, v = np.linalg.eigh(r)
    w = rng.uniform(0.0, 1.0, size=lam.shape)
    r_c = (v * (w * lam)) @ v.conj().T
    return r_c, r - r_c


def rand_scenario(rng, m_tx=4, m_rx=4, t=16, gamma0=0.0, alpha_scale=1.0):
    """Well-scaled random scene: O(1) powers, unit noise floors."""
    ula = UlaConfig(m_tx=m_tx, m_rx=m_rx, spacing=0.05, wavelength=0.1)
    alpha = alpha_scale * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
    h = (rng.standard_normal(m_tx) + 1j * rng.standard_normal(m_tx)) / np.sqrt(2.0)
    return Scenario(
        ula=ula,
        theta=float(rng.uniform(-1.2, 1.2)),
        phi=float(rng.uniform(-1.2, 1.2)),
        alpha=complex(alpha),
        h=h,
        p_max=float(rng.uniform(0.5, 4.0)),
        sigma_c2=float(rng.uniform(0.5, 2.0)),
        sigma_s2=float(rng.uniform(0.5, 2.0)),
        t_symbols=t,
        gamma0=gamma0,
    )
