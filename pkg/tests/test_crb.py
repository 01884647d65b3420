"""Fisher information and bound identities, checked against dense oracles."""

import numpy as np
import pytest
from conftest import rand_psd, rand_scenario, rand_split

from bisac.crb import (
    check_covariance,
    crb_deterministic,
    crb_gaussian,
    crb_min_closed_forms,
    crb_report,
    crb_sinr_gaussian_closed,
    crb_super,
    fim_gaussian,
    fim_super,
    fisher_factor,
    sensing_snr,
    tx_quadform,
)
from bisac.errors import UnobservableError
from bisac.estimators import synth_deterministic
from bisac.beamforming import mrt_cov
from bisac.oracles import (
    echo_cov_deriv_full,
    echo_cov_full,
    fim_gaussian_direct,
    fim_super_direct,
)
from bisac.ula import rx_deriv_norm_sq


def test_check_covariance():
    rng = np.random.default_rng(0)
    r = rand_psd(rng, 4)
    out = check_covariance(r, 4)
    np.testing.assert_array_equal(out, r)
    with pytest.raises(ValueError, match="square"):
        check_covariance(np.ones((2, 3)))
    with pytest.raises(ValueError, match="4x4"):
        check_covariance(r, 5)
    with pytest.raises(ValueError, match="Hermitian"):
        check_covariance(r + 0.1 * 1j * np.eye(4))
    with pytest.raises(ValueError, match="not PSD"):
        check_covariance(np.diag([1.0, -0.5, 1.0, 1.0]))


def test_tx_quadform_matches_explicit():
    rng = np.random.default_rng(1)
    for _ in range(20):
        sc = rand_scenario(rng)
        r = rand_psd(rng, 4)
        a = sc.steering_dod()
        np.testing.assert_allclose(tx_quadform(sc, r), (a @ r @ a.conj()).real, rtol=1e-12)


def test_echo_cov_deriv_matches_finite_difference():
    # dense-oracle self-check: analytic dR/d(param) vs central differences
    rng = np.random.default_rng(2)
    from dataclasses import replace

    h = 1e-6
    for _ in range(5):
        sc = rand_scenario(rng, t=2)
        r_c = rand_psd(rng, 4)
        for wrt in ("theta", "mag", "re", "im"):
            if wrt == "theta":
                up = replace(sc, theta=sc.theta + h)
                dn = replace(sc, theta=sc.theta - h)
            elif wrt == "mag":
                a = complex(sc.alpha)
                u = a / abs(a)
                up = replace(sc, alpha=a + h * u)
                dn = replace(sc, alpha=a - h * u)
            elif wrt == "re":
                up = replace(sc, alpha=sc.alpha + h)
                dn = replace(sc, alpha=sc.alpha - h)
            else:
                up = replace(sc, alpha=sc.alpha + 1j * h)
                dn = replace(sc, alpha=sc.alpha - 1j * h)
            num = (echo_cov_full(up, r_c) - echo_cov_full(dn, r_c)) / (2.0 * h)
            ana = echo_cov_deriv_full(sc, r_c, wrt)
            scale = max(np.abs(ana).max(), 1e-30)
            assert np.abs(ana - num).max() / scale < 1e-5


def test_fim_gaussian_matches_dense_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        sc = rand_scenario(rng, t=2)
        r_c = rand_psd(rng, 4)
        closed = fim_gaussian(sc, r_c).as_matrix()
        dense = fim_gaussian_direct(sc, r_c)
        np.testing.assert_allclose(closed, dense, rtol=1e-8, atol=1e-10 * abs(dense).max())


def test_fim_super_matches_dense_oracle():
    # x0 must realize r_s exactly for the mean term to match the closed form
    rng = np.random.default_rng(4)
    for k in range(20):
        sc = rand_scenario(rng, t=6)
        r_c = rand_psd(rng, 4)
        r_s = rand_psd(rng, 4)
        x0 = synth_deterministic(sc, r_s, seed=rng)
        closed = fim_super(sc, r_c, r_s).as_matrix()
        dense = fim_super_direct(sc, r_c, x0)
        np.testing.assert_allclose(closed, dense, rtol=1e-8, atol=1e-10 * abs(dense).max())


def test_crb_is_inverse_information():
    rng = np.random.default_rng(5)
    for _ in range(10):
        sc = rand_scenario(rng)
        r_c = rand_psd(rng, 4)
        r_s = rand_psd(rng, 4)
        inv2 = np.linalg.inv(fim_gaussian(sc, r_c).as_matrix())
        np.testing.assert_allclose(crb_gaussian(sc, r_c), inv2[0, 0], rtol=1e-12)
        inv3 = np.linalg.inv(fim_super(sc, r_c, r_s).as_matrix())
        np.testing.assert_allclose(crb_super(sc, r_c, r_s), inv3[0, 0], rtol=1e-12)


def test_super_with_zero_known_part_matches_gaussian():
    rng = np.random.default_rng(6)
    zero = np.zeros((4, 4), dtype=complex)
    for _ in range(25):
        sc = rand_scenario(rng)
        r_c = rand_psd(rng, 4)
        np.testing.assert_allclose(
            crb_super(sc, r_c, zero), crb_gaussian(sc, r_c), rtol=1e-12
        )


def test_bound_ordering_on_splits():
    # known-signal <= superposed <= Gaussian for any same-total split
    rng = np.random.default_rng(7)
    for _ in range(200):
        sc = rand_scenario(rng)
        total = rand_psd(rng, 4, trace=sc.p_max)
        r_c, r_s = rand_split(rng, total)
        rep = crb_report(sc, r_c, r_s)
        assert rep.crb_deterministic <= rep.crb_super * (1.0 + 1e-12)
        assert rep.crb_super <= rep.crb_gaussian * (1.0 + 1e-12)


def test_crb_ignores_power_orthogonal_to_target():
    rng = np.random.default_rng(8)
    for _ in range(10):
        sc = rand_scenario(rng)
        r = rand_psd(rng, 4)
        a = sc.steering_dod()
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v -= a.conj() * np.vdot(a.conj(), v) / np.vdot(a.conj(), a.conj()).real
        bump = 3.0 * np.outer(v, v.conj())
        np.testing.assert_allclose(
            crb_gaussian(sc, r + bump), crb_gaussian(sc, r), rtol=1e-9
        )


def test_closed_form_minima_match_generic_path():
    rng = np.random.default_rng(9)
    zero = np.zeros((4, 4), dtype=complex)
    for _ in range(20):
        sc = rand_scenario(rng)
        full = mrt_cov(sc.p_max, sc.steering_dod())
        crb1, crbd, crb2 = crb_min_closed_forms(sc)
        np.testing.assert_allclose(crb_gaussian(sc, full), crb1, rtol=1e-10)
        np.testing.assert_allclose(crb_deterministic(sc, full), crbd, rtol=1e-10)
        np.testing.assert_allclose(crb_super(sc, zero, full), crb2, rtol=1e-10)
        assert crb2 == crbd  # optimizer puts everything into the known part


def test_deterministic_closed_form_value():
    rng = np.random.default_rng(10)
    for _ in range(10):
        sc = rand_scenario(rng)
        r_s = rand_psd(rng, 4)
        q = tx_quadform(sc, r_s)
        expect = sc.sigma_s2 / (
            2.0
            * sc.t_symbols
            * abs(sc.alpha) ** 2
            * q
            * rx_deriv_norm_sq(sc.ula, sc.theta)
        )
        np.testing.assert_allclose(crb_deterministic(sc, r_s), expect, rtol=1e-12)


def test_fisher_factor_definition():
    rng = np.random.default_rng(11)
    for _ in range(10):
        sc = rand_scenario(rng)
        r_c = rand_psd(rng, 4)
        r_s = rand_psd(rng, 4)
        q_c, q_s = tx_quadform(sc, r_c), tx_quadform(sc, r_s)
        bd2 = rx_deriv_norm_sq(sc.ula, sc.theta)
        gamma = abs(sc.alpha) ** 2 * q_c * sc.ula.m_rx / sc.sigma_s2
        expect = q_s * bd2 + gamma / (1.0 + gamma) * q_c * bd2
        np.testing.assert_allclose(fisher_factor(sc, r_c, r_s), expect, rtol=1e-12)


def test_unobservable_raises():
    rng = np.random.default_rng(12)
    sc = rand_scenario(rng)
    zero = np.zeros((4, 4), dtype=complex)
    with pytest.raises(UnobservableError):
        crb_gaussian(sc, zero)
    with pytest.raises(UnobservableError):
        crb_super(sc, zero, zero)


def test_crb_invariant_to_alpha_phase():
    rng = np.random.default_rng(13)
    from dataclasses import replace

    sc = rand_scenario(rng)
    r_c = rand_psd(rng, 4)
    r_s = rand_psd(rng, 4)
    rot = replace(sc, alpha=sc.alpha * np.exp(1j * 0.83))
    np.testing.assert_allclose(crb_super(rot, r_c, r_s), crb_super(sc, r_c, r_s), rtol=1e-12)
    np.testing.assert_allclose(crb_gaussian(rot, r_c), crb_gaussian(sc, r_c), rtol=1e-12)


def test_sensing_snr_formula():
    rng = np.random.default_rng(14)
    sc = rand_scenario(rng)
    r = rand_psd(rng, 4)
    expect = abs(sc.alpha) ** 2 * tx_quadform(sc, r) * sc.ula.m_rx / sc.sigma_s2
    np.testing.assert_allclose(sensing_snr(sc, r), expect, rtol=1e-12)


def test_sinr_constrained_closed_form_branches():
    # slack threshold -> full-power target beam; tight threshold -> lower q
    rng = np.random.default_rng(15)
    from dataclasses import replace

    for _ in range(20):
        sc = rand_scenario(rng)
        crb1, _, _ = crb_min_closed_forms(sc)
        hn2 = float(np.vdot(sc.h, sc.h).real)
        np.testing.assert_allclose(
            crb_sinr_gaussian_closed(replace(sc, gamma0=0.0)), crb1, rtol=1e-12
        )
        tight = replace(sc, gamma0=0.8 * sc.p_max * hn2 / sc.sigma_c2)
        assert crb_sinr_gaussian_closed(tight) >= crb1 * (1.0 - 1e-12)
