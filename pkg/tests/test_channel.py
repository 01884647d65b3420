"""Path loss, target gain, Rician user channel, scenario validation."""

import numpy as np
import pytest

from bisac.channel import (
    PathLossModel,
    Scenario,
    db_to_lin,
    lin_to_db,
    path_loss,
    rician_cu_channel,
    target_gain,
)
from bisac.ula import UlaConfig, steering_tx

PL = PathLossModel(k0_db=-30.0, d0=1.0, exponent=2.5)
CFG = UlaConfig(m_tx=8, m_rx=8, spacing=0.05, wavelength=0.1)


def test_db_round_trip():
    for x in (1e-9, 0.5, 1.0, 42.0, 1e6):
        np.testing.assert_allclose(db_to_lin(lin_to_db(x)), x, rtol=1e-12)
    assert lin_to_db(10.0) == 10.0
    assert db_to_lin(-30.0) == pytest.approx(1e-3, rel=1e-12)


def test_path_loss_frozen_value():
    # -30 dB at 1 m, exponent 2.5, 200 m: -30 - 25 log10(200) = -87.52575 dB
    np.testing.assert_allclose(lin_to_db(path_loss(PL, 200.0)), -87.52575, atol=1e-4)
    np.testing.assert_allclose(path_loss(PL, 1.0), 1e-3, rtol=1e-12)


def test_path_loss_slope_is_minus_exponent():
    d = np.array([10.0, 100.0, 1000.0])
    vals = np.array([lin_to_db(path_loss(PL, x)) for x in d])
    np.testing.assert_allclose(np.diff(vals) / 10.0, -PL.exponent, rtol=1e-12)


def test_target_gain_two_hop_product():
    g = target_gain(PL, 200.0, 300.0, beta=0.5 + 0.5j)
    expect = (0.5 + 0.5j) * np.sqrt(path_loss(PL, 200.0) * path_loss(PL, 300.0))
    np.testing.assert_allclose(g, expect, rtol=1e-12)


def test_path_loss_validation():
    with pytest.raises(ValueError):
        PathLossModel(k0_db=-30.0, d0=-1.0, exponent=2.5)
    with pytest.raises(ValueError):
        path_loss(PL, 0.0)


class TestRicianChannel:
    def test_mean_power_is_gain_times_elements(self):
        # E||h||^2 = gain * m_tx for every K; check K = 0 and K = 4
        rng = np.random.default_rng(11)
        for k in (0.0, 4.0):
            acc = 0.0
            n = 4000
            for _ in range(n):
                h = rician_cu_channel(CFG, k, 0.3, gain=2.0, seed=rng)
                acc += float(np.vdot(h, h).real)
            np.testing.assert_allclose(acc / n, 2.0 * CFG.m_tx, rtol=0.03)

    def test_large_k_collapses_to_los(self):
        h = rician_cu_channel(CFG, 1e12, 0.3, gain=1.0, seed=0)
        np.testing.assert_allclose(h, steering_tx(CFG, 0.3), atol=1e-5)

    def test_seed_reproducible(self):
        h1 = rician_cu_channel(CFG, 1.0, 0.1, gain=1.0, seed=42)
        h2 = rician_cu_channel(CFG, 1.0, 0.1, gain=1.0, seed=42)
        np.testing.assert_array_equal(h1, h2)

    def test_validation(self):
        with pytest.raises(ValueError, match="k_factor"):
            rician_cu_channel(CFG, -1.0, 0.0, gain=1.0, seed=0)
        with pytest.raises(ValueError, match="gain"):
            rician_cu_channel(CFG, 1.0, 0.0, gain=0.0, seed=0)


def _scenario(**kw):
    base = dict(
        ula=CFG,
        theta=0.1,
        phi=0.1,
        alpha=1e-4 + 0j,
        h=np.ones(CFG.m_tx, dtype=complex),
        p_max=1.0,
        sigma_c2=1e-8,
        sigma_s2=1e-8,
        t_symbols=32,
    )
    base.update(kw)
    return Scenario(**base)


def test_scenario_validation():
    _scenario()  # baseline constructs fine
    with pytest.raises(ValueError, match="theta"):
        _scenario(theta=3.0)
    with pytest.raises(ValueError, match="p_max"):
        _scenario(p_max=0.0)
    with pytest.raises(ValueError, match="t_symbols"):
        _scenario(t_symbols=0)
    with pytest.raises(ValueError, match="gamma0"):
        _scenario(gamma0=-1.0)
    with pytest.raises(ValueError, match="h must have shape"):
        _scenario(h=np.ones(3, dtype=complex))


def test_scenario_steering_shorthand():
    sc = _scenario()
    np.testing.assert_array_equal(sc.steering_dod(), steering_tx(CFG, 0.1))
    assert sc.steering_doa().shape == (CFG.m_rx,)
    assert sc.doa_deriv().shape == (CFG.m_rx,)
