"""Fisher information and Cramer-Rao bounds for bistatic DoA sensing.

Three signaling modes share one scene: Gaussian-only transmit covariance
(target amplitude treated as an unknown magnitude), superposed Gaussian +
deterministic transmission (unknown complex amplitude), and fully known
deterministic waveforms. The echo covariance is rank-one in space, so every
bound here reduces to scalar quadratic forms through the steering vectors;
dense-matrix counterparts live in `bisac.oracles` and are used by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Scenario
from .errors import InfeasibleError, NumericalError, UnobservableError
from .ula import rx_deriv_norm_sq

#: Relative Hermitian-deviation tolerance for covariance inputs.
HERM_TOL = 1e-12
#: Eigenvalue floor for covariance inputs, relative to the trace.
EIG_FLOOR = 1e-10


def check_covariance(r: np.ndarray, dim: int | None = None, name: str = "covariance") -> np.ndarray:
    """Validate a Hermitian PSD matrix and return it as complex128.

    Accepts anything array-like; rejects non-square shapes, non-finite
    entries, Hermitian deviation beyond 1e-12 (relative), negative trace, and
    eigenvalues below -1e-10 * trace.
    """
    r = np.asarray(r, dtype=np.complex128)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"{name} must be square, got shape {r.shape}")
    if dim is not None and r.shape[0] != dim:
        raise ValueError(f"{name} must be {dim}x{dim}, got {r.shape[0]}x{r.shape[0]}")
    if not np.all(np.isfinite(r)):
        raise ValueError(f"{name} must be finite")
    scale = float(np.abs(r).max()) if r.size else 0.0
    if float(np.abs(r - r.conj().T).max()) > HERM_TOL * max(scale, 1.0e-300):
        raise ValueError(f"{name} is not Hermitian within tolerance")
    tr = float(np.trace(r).real)
    if tr < 0.0:
        raise ValueError(f"{name} has negative trace {tr!r}")
    if r.size:
        lam_min = float(np.linalg.eigvalsh(r)[0])
        if lam_min < -EIG_FLOOR * max(tr, 1.0e-300):
            raise ValueError(f"{name} is not PSD: min eigenvalue {lam_min!r} for trace {tr!r}")
    return r


def quadform_real(r: np.ndarray, v: np.ndarray, name: str = "quadratic form") -> float:
    """v^H R v for Hermitian R: assert the imaginary residue is noise, drop it."""
    v = np.asarray(v, dtype=np.complex128)
    q = complex(np.vdot(v, r @ v))
    scale = max(abs(q), float(np.linalg.norm(r)) * float(np.vdot(v, v).real))
    if abs(q.imag) > 1e-12 * max(scale, 1.0e-300):
        raise NumericalError(f"{name} has a non-negligible imaginary part: {q!r}")
    return q.real


def tx_quadform(sc: Scenario, r: np.ndarray) -> float:
    """Power the covariance r steers through the target departure direction.

    This is a^T r a^* for the transmit steering vector a, the only way any
    transmit covariance enters the sensing bounds.
    """
    return quadform_real(r, sc.steering_dod().conj(), name="steered transmit power")


def sensing_snr(sc: Scenario, r_c: np.ndarray) -> float:
    """Post-target SNR |alpha|^2 a^T r_c a^* ||b||^2 / sigma_s^2 (linear)."""
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    g = abs(sc.alpha) ** 2
    return g * tx_quadform(sc, r_c) * sc.ula.m_rx / sc.sigma_s2


@dataclass(frozen=True)
class FimGaussian:
    """Fisher information for (theta, |alpha|) under Gaussian-only signaling."""

    f_theta_theta: float
    f_theta_alpha: float
    f_alpha_alpha: float

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.f_theta_theta, self.f_theta_alpha],
                [self.f_theta_alpha, self.f_alpha_alpha],
            ]
        )


def fim_gaussian(sc: Scenario, r_c: np.ndarray) -> FimGaussian:
    """Closed-form information about (theta, |alpha|) carried by the echo.

    The echo covariance is I_T kron (|alpha|^2 q_c b b^H + sigma^2 I), with
    q_c the steered transmit power, so the Slepian-Bangs trace form collapses
    to scalars. The cross term vanishes because b^H (db/dtheta) = 0 for a
    midpoint-referenced ULA. All entries are zero when q_c = 0.
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    q_c = max(tx_quadform(sc, r_c), 0.0)
    g = abs(sc.alpha) ** 2
    t, m_r, s2 = sc.t_symbols, sc.ula.m_rx, sc.sigma_s2
    bd2 = rx_deriv_norm_sq(sc.ula, sc.theta)
    gamma = g * q_c * m_r / s2
    f_tt = 2.0 * t * g**2 * q_c**2 * bd2 * m_r / (s2**2 * (1.0 + gamma))
    f_aa = 4.0 * t * g * q_c**2 * m_r**2 / (s2**2 * (1.0 + gamma) ** 2)
    return FimGaussian(f_theta_theta=f_tt, f_theta_alpha=0.0, f_alpha_alpha=f_aa)


def _crb_det_from_quadform(sc: Scenario, q: float) -> float:
    g = abs(sc.alpha) ** 2
    bd2 = rx_deriv_norm_sq(sc.ula, sc.theta)
    denom = 2.0 * sc.t_symbols * g * q * bd2
    if denom <= 0.0:
        raise UnobservableError("no echo energy informs the DoA (zero amplitude, power, or cos(theta))")
    return sc.sigma_s2 / denom


def _crb_gaussian_from_quadform(sc: Scenario, q: float) -> float:
    g = abs(sc.alpha) ** 2
    base = _crb_det_from_quadform(sc, q)
    return base * (1.0 + sc.sigma_s2 / (g * q * sc.ula.m_rx))


def crb_gaussian(sc: Scenario, r_c: np.ndarray) -> float:
    """DoA CRB (rad^2) with Gaussian-only signaling and unknown |alpha|."""
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    q_c = tx_quadform(sc, r_c)
    return _crb_gaussian_from_quadform(sc, q_c)


def crb_deterministic(sc: Scenario, r_s: np.ndarray) -> float:
    """DoA CRB (rad^2) when the transmit realization is known at the receiver."""
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    q_s = tx_quadform(sc, r_s)
    return _crb_det_from_quadform(sc, q_s)


@dataclass(frozen=True)
class FimSuper:
    """Fisher information for (theta, Re alpha, Im alpha), superposed signaling."""

    f_theta_theta: float
    f_theta_alpha: np.ndarray
    f_alpha_alpha: np.ndarray

    def as_matrix(self) -> np.ndarray:
        out = np.zeros((3, 3))
        out[0, 0] = self.f_theta_theta
        out[0, 1:] = self.f_theta_alpha
        out[1:, 0] = self.f_theta_alpha
        out[1:, 1:] = self.f_alpha_alpha
        return out


def fim_super(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray) -> FimSuper:
    """Information under superposed signaling: Gaussian r_c plus known r_s part.

    The deterministic component adds a mean term on top of the Gaussian-only
    information; theta stays decoupled from the complex amplitude thanks to
    b^H db/dtheta = 0.
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    q_c = max(tx_quadform(sc, r_c), 0.0)
    q_s = max(tx_quadform(sc, r_s), 0.0)
    g = abs(sc.alpha) ** 2
    t, m_r, s2 = sc.t_symbols, sc.ula.m_rx, sc.sigma_s2
    bd2 = rx_deriv_norm_sq(sc.ula, sc.theta)
    gamma = g * q_c * m_r / s2

    f_tt = 2.0 * t * g**2 * q_c**2 * bd2 * m_r / (s2**2 * (1.0 + gamma))
    f_tt += 2.0 * t * g * q_s * bd2 / s2

    re_im = np.array([complex(sc.alpha).real, complex(sc.alpha).imag])
    c_cov = 4.0 * t * q_c**2 * m_r**2 / (s2**2 * (1.0 + gamma) ** 2)
    c_mean = 2.0 * t * q_s * m_r / (s2 * (1.0 + gamma))
    f_aa = c_cov * np.outer(re_im, re_im) + c_mean * np.eye(2)
    return FimSuper(f_theta_theta=f_tt, f_theta_alpha=np.zeros(2), f_alpha_alpha=f_aa)


def fisher_factor(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray) -> float:
    """Effective DoA information factor f(r_c, r_s) of superposed signaling.

    f = q_s ||db||^2 + (gamma/(1+gamma)) q_c ||db||^2, the quantity the
    covariance optimizer maximizes; the superposed CRB is sigma^2/(2 T
    |alpha|^2 f).
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    q_c = max(tx_quadform(sc, r_c), 0.0)
    q_s = max(tx_quadform(sc, r_s), 0.0)
    g = abs(sc.alpha) ** 2
    bd2 = rx_deriv_norm_sq(sc.ula, sc.theta)
    gamma = g * q_c * sc.ula.m_rx / sc.sigma_s2
    return q_s * bd2 + gamma / (1.0 + gamma) * q_c * bd2


def crb_super(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray) -> float:
    """DoA CRB (rad^2) with superposed signaling and unknown complex alpha."""
    f = fisher_factor(sc, r_c, r_s)
    g = abs(sc.alpha) ** 2
    if g * f <= 0.0:
        raise UnobservableError("neither signal component illuminates the target")
    return sc.sigma_s2 / (2.0 * sc.t_symbols * g * f)


@dataclass(frozen=True)
class CrbReport:
    """All three bounds for one covariance split (r_c, r_s).

    The Gaussian and deterministic bounds are evaluated on the total
    covariance r_c + r_s (same spatial allocation, different receiver
    knowledge); gamma_ran is the sensing SNR of the total.
    """

    crb_gaussian: float
    crb_deterministic: float
    crb_super: float
    gamma_ran: float


def crb_report(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray) -> CrbReport:
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    total = r_c + r_s
    return CrbReport(
        crb_gaussian=crb_gaussian(sc, total),
        crb_deterministic=crb_deterministic(sc, total),
        crb_super=crb_super(sc, r_c, r_s),
        gamma_ran=sensing_snr(sc, total),
    )


def crb_min_closed_forms(sc: Scenario) -> tuple[float, float, float]:
    """Power-only minimal bounds (no SINR constraint), all under beamforming
    that steers the full budget at the target so a^T R a^* = P m_tx.

    Returns:
        (gaussian, deterministic, superposed) minimal CRBs in rad^2; the
        superposed minimum coincides with the deterministic one because the
        optimizer puts everything into the known component.
    """
    q = sc.p_max * sc.ula.m_tx
    crb1 = _crb_gaussian_from_quadform(sc, q)
    crbd = _crb_det_from_quadform(sc, q)
    return crb1, crbd, crbd


def crb_sinr_gaussian_closed(sc: Scenario) -> float:
    """Best Gaussian-only CRB subject to the user SINR threshold, closed form.

    Below the threshold at which target-MRT already serves the user, the
    optimum splits power between the user direction and the residual target
    component; the steered power then follows from the rank-one optimal
    covariance. Continuous across the branch boundary.

    Raises:
        InfeasibleError: if gamma0 exceeds what full power toward the user
            could deliver.
    """
    a = sc.steering_dod()
    h = sc.h
    hn2 = float(np.vdot(h, h).real)
    p, g0, s_c2 = sc.p_max, sc.gamma0, sc.sigma_c2
    if g0 * s_c2 > p * hn2 * (1.0 + 1e-12):
        raise InfeasibleError(
            f"SINR threshold {g0!r} infeasible: max achievable {p * hn2 / s_c2!r}"
        )
    cross = abs(np.vdot(h, a.conj())) ** 2  # |h^H a^*|^2
    m_t = sc.ula.m_tx
    if p * cross >= m_t * g0 * s_c2:
        q = p * m_t
    else:
        lam1 = g0 * s_c2 / hn2
        lam2 = max(p - lam1, 0.0)
        c = cross / hn2
        q = (np.sqrt(lam1 * c) + np.sqrt(lam2 * max(m_t - c, 0.0))) ** 2
    return _crb_gaussian_from_quadform(sc, q)
