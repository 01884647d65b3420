"""Signal synthesis, the bistatic receive model, and grid ML DoA estimators.

Both estimators concentrate the target amplitude out of the echo likelihood
and scan the arrival angle on a coarse-to-fine grid. All per-angle statistics
reduce to the correlations b(theta)^H y_t, so a whole grid pass is one matrix
product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Scenario, _as_rng
from .crb import check_covariance, tx_quadform
from .errors import UnobservableError
from .ula import UlaConfig, element_offsets


@dataclass(frozen=True)
class GridSpec:
    """Coarse-to-fine DoA search grid.

    A coarse pass at `coarse_step` rad over [lo, hi] is followed by
    `refine_rounds` local passes, each shrinking the step by `refine_factor`
    and re-centering on the current best angle (span = one previous step each
    side). Ties resolve toward the smaller angle.
    """

    lo: float = -np.pi / 2
    hi: float = np.pi / 2
    coarse_step: float = 0.005
    refine_rounds: int = 3
    refine_factor: int = 10

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValueError("grid needs lo < hi")
        if not (0.0 < self.coarse_step <= (self.hi - self.lo)):
            raise ValueError(f"bad coarse_step {self.coarse_step!r}")
        if self.refine_rounds < 0 or self.refine_factor < 2:
            raise ValueError("refine_rounds must be >= 0 and refine_factor >= 2")

    def final_step(self) -> float:
        return self.coarse_step / self.refine_factor**self.refine_rounds


@dataclass(frozen=True)
class TxRealization:
    """One block of transmitted samples, split into its two components."""

    gaussian: np.ndarray
    deterministic: np.ndarray

    def total(self) -> np.ndarray:
        return self.gaussian + self.deterministic


@dataclass(frozen=True)
class RxBlock:
    """Samples at the sensing receiver, shape (m_rx, t_symbols)."""

    y: np.ndarray


@dataclass(frozen=True)
class EstimateResult:
    """Grid-ML output: angle, concentrated amplitude, objective at the peak.

    `curve` holds the coarse-pass (theta, objective) pairs when requested;
    `alpha_hat` is real non-negative for the Gaussian-only estimator (the
    phase is not identifiable there).
    """

    theta_hat: float
    alpha_hat: complex
    objective: float
    curve: np.ndarray | None = None


def _factor_cov(r: np.ndarray) -> np.ndarray:
    """Return F with F F^H = r, keeping only eigenvalues above 1e-12 * trace."""
    lam, v = np.linalg.eigh(r)
    floor = 1e-12 * max(float(np.trace(r).real), 0.0)
    keep = lam > floor
    return v[:, keep] * np.sqrt(lam[keep])


def synth_gaussian(sc: Scenario, r_c: np.ndarray, seed) -> np.ndarray:
    """Draw t_symbols i.i.d. CN(0, r_c) transmit vectors, shape (m_tx, T)."""
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    rng = _as_rng(seed)
    f = _factor_cov(r_c)
    z = rng.standard_normal((f.shape[1], sc.t_symbols)) + 1j * rng.standard_normal(
        (f.shape[1], sc.t_symbols)
    )
    return f @ (z / np.sqrt(2.0))


def synth_deterministic(sc: Scenario, r_s: np.ndarray, seed) -> np.ndarray:
    """Draw a deterministic block whose sample covariance is exactly r_s.

    Rows of the latent block are complex exponentials at distinct integer
    frequencies (drawn without replacement) with random phases, so
    Q Q^H / T = I exactly and x0 x0^H / T = r_s up to rounding.

    Raises:
        ValueError: if rank(r_s) exceeds t_symbols (not realizable).
    """
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    rng = _as_rng(seed)
    f = _factor_cov(r_s)
    rank = f.shape[1]
    t = sc.t_symbols
    if rank > t:
        raise ValueError(f"covariance rank {rank} not realizable over {t} symbols")
    if rank == 0:
        return np.zeros((sc.ula.m_tx, t), dtype=np.complex128)
    freqs = rng.choice(t, size=rank, replace=False)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=rank)
    ticks = np.arange(t)
    q = np.exp(1j * (2.0 * np.pi * np.outer(freqs, ticks) / t + phases[:, None]))
    return f @ q


def synth_super(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray, seed) -> TxRealization:
    """Draw both components from one stream (Gaussian first, then known part)."""
    rng = _as_rng(seed)
    return TxRealization(
        gaussian=synth_gaussian(sc, r_c, rng),
        deterministic=synth_deterministic(sc, r_s, rng),
    )


def receive(sc: Scenario, tx: TxRealization, seed) -> RxBlock:
    """Propagate a transmit block through the target and add receiver noise."""
    x = tx.total()
    if x.shape != (sc.ula.m_tx, sc.t_symbols):
        raise ValueError(f"transmit block must be {sc.ula.m_tx}x{sc.t_symbols}, got {x.shape}")
    rng = _as_rng(seed)
    b = sc.steering_doa()
    a = sc.steering_dod()
    n = rng.standard_normal((sc.ula.m_rx, sc.t_symbols)) + 1j * rng.standard_normal(
        (sc.ula.m_rx, sc.t_symbols)
    )
    y = complex(sc.alpha) * np.outer(b, a @ x) + np.sqrt(sc.sigma_s2 / 2.0) * n
    return RxBlock(y=y)


def _steering_rows(ula: UlaConfig, thetas: np.ndarray) -> np.ndarray:
    """Stack of receive steering vectors, one row per angle."""
    phase = np.pi * ula.spacing / ula.wavelength
    return np.exp(1j * phase * np.outer(np.sin(thetas), element_offsets(ula.m_rx)))


def _coarse_grid(grid: GridSpec) -> np.ndarray:
    thetas = np.arange(grid.lo, grid.hi, grid.coarse_step)
    if thetas[-1] < grid.hi - 1e-12:
        thetas = np.append(thetas, grid.hi)
    return thetas


def _grid_maximize(objective, grid: GridSpec, want_curve: bool):
    """Coarse-to-fine scan of a vectorized objective(thetas) -> values."""
    thetas = _coarse_grid(grid)
    vals = objective(thetas)
    best = int(np.argmax(vals))  # first occurrence: ties toward smaller theta
    theta_hat, val_hat = float(thetas[best]), float(vals[best])
    curve = np.column_stack([thetas, vals]) if want_curve else None
    step = grid.coarse_step
    for _ in range(grid.refine_rounds):
        span, step = step, step / grid.refine_factor
        local = theta_hat + np.arange(-span, span + step * 0.5, step)
        local = local[(local >= grid.lo - 1e-12) & (local <= grid.hi + 1e-12)]
        vals = objective(local)
        best = int(np.argmax(vals))
        theta_hat, val_hat = float(local[best]), float(vals[best])
    return theta_hat, val_hat, curve


def _check_rx(rx: RxBlock, sc: Scenario) -> np.ndarray:
    y = np.asarray(rx.y, dtype=np.complex128)
    if y.shape != (sc.ula.m_rx, sc.t_symbols):
        raise ValueError(f"receive block must be {sc.ula.m_rx}x{sc.t_symbols}, got {y.shape}")
    if not np.any(y):
        raise ValueError("degenerate all-zero receive block")
    return y


def mle_gaussian(
    rx: RxBlock,
    sc: Scenario,
    r_c: np.ndarray,
    grid: GridSpec = GridSpec(),
    return_curve: bool = False,
) -> EstimateResult:
    """Grid ML estimate of (theta, |alpha|) under Gaussian-only signaling.

    The amplitude enters only through the echo power kappa = |alpha|^2 q_c;
    concentrating its ML value leaves the noise-normalized beam energy
    objective Q/(m_rx sigma^2) - T ln(Q / (T m_rx sigma^2)) wherever the
    concentrated echo power is positive, and a flat floor where it clamps to
    zero (objective continuous across the clamp).
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    y = _check_rx(rx, sc)
    q_c = tx_quadform(sc, r_c)
    if q_c <= 0.0:
        raise UnobservableError("transmit covariance sends no power toward the target")
    t, m_r, s2 = sc.t_symbols, sc.ula.m_rx, sc.sigma_s2

    def beam_energy(thetas: np.ndarray) -> np.ndarray:
        rows = _steering_rows(sc.ula, thetas)
        return np.sum(np.abs(rows.conj() @ y) ** 2, axis=1)

    def objective(thetas: np.ndarray) -> np.ndarray:
        qn = beam_energy(thetas) / s2
        out = np.full(qn.shape, float(t))
        peaked = qn > t * m_r
        out[peaked] = qn[peaked] / m_r - t * np.log(qn[peaked] / (t * m_r))
        return out

    theta_hat, val_hat, curve = _grid_maximize(objective, grid, return_curve)
    q_hat = float(beam_energy(np.array([theta_hat]))[0])
    mag2 = max(q_hat / (t * m_r**2 * q_c) - s2 / (m_r * q_c), 0.0)
    return EstimateResult(
        theta_hat=theta_hat,
        alpha_hat=complex(np.sqrt(mag2)),
        objective=val_hat,
        curve=curve,
    )


def mle_super(
    rx: RxBlock,
    sc: Scenario,
    r_c: np.ndarray,
    r_s: np.ndarray,
    tx: TxRealization,
    grid: GridSpec = GridSpec(),
    phase_source: str = "deterministic",
    return_curve: bool = False,
) -> EstimateResult:
    """Grid ML estimate of (theta, alpha) under superposed signaling.

    Per candidate angle, the complex amplitude is rebuilt from two decoupled
    pieces: the magnitude from the total beam energy (same concentration as
    the Gaussian-only case but against the combined covariance) and the phase
    from correlating with a known reference sequence. The default reference is
    the deterministic component the receiver actually knows;
    phase_source="gaussian" correlates with the Gaussian realization instead
    (useful only as a genie benchmark).

    Args:
        tx: the transmitted block; only the reference component is read.
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    r_s = check_covariance(r_s, sc.ula.m_tx, "r_s")
    y = _check_rx(rx, sc)
    if phase_source not in ("deterministic", "gaussian"):
        raise ValueError(f"unknown phase_source {phase_source!r}")
    a = sc.steering_dod()
    c_known = a @ tx.deterministic
    c_ref = c_known if phase_source == "deterministic" else a @ tx.gaussian

    q_c = max(tx_quadform(sc, r_c), 0.0)
    q_tot = q_c + max(tx_quadform(sc, r_s), 0.0)
    if q_tot <= 0.0:
        raise UnobservableError("no signal component illuminates the target")
    t, m_r, s2 = sc.t_symbols, sc.ula.m_rx, sc.sigma_s2
    energy = float(np.sum(np.abs(y) ** 2))
    c2 = float(np.sum(np.abs(c_known) ** 2))

    def objective(thetas: np.ndarray) -> np.ndarray:
        rows = _steering_rows(sc.ula, thetas)
        s = rows.conj() @ y
        q = np.sum(np.abs(s) ** 2, axis=1)
        u_known = s @ c_known.conj()
        u_ref = s @ c_ref.conj()
        mag2 = np.maximum(q / (t * m_r**2 * q_tot) - s2 / (m_r * q_tot), 0.0)
        alpha = np.sqrt(mag2) * np.exp(1j * np.angle(u_ref))
        # Residual energies after stripping the rebuilt known echo.
        cross = np.real(np.conj(alpha) * u_known)
        res_total = energy - 2.0 * cross + mag2 * m_r * c2
        res_beam = q - 2.0 * m_r * cross + mag2 * m_r**2 * c2
        kappa = mag2 * q_c
        gamma = kappa * m_r / s2
        return -(res_total - kappa / (s2 + kappa * m_r) * res_beam) / s2 - t * np.log1p(gamma)

    theta_hat, val_hat, curve = _grid_maximize(objective, grid, return_curve)

    row = _steering_rows(sc.ula, np.array([theta_hat]))[0]
    s_hat = row.conj() @ y
    q_hat = float(np.sum(np.abs(s_hat) ** 2))
    mag2 = max(q_hat / (t * m_r**2 * q_tot) - s2 / (m_r * q_tot), 0.0)
    phase = float(np.angle(np.sum(s_hat * c_ref.conj())))
    return EstimateResult(
        theta_hat=theta_hat,
        alpha_hat=complex(np.sqrt(mag2) * np.exp(1j * phase)),
        objective=val_hat,
        curve=curve,
    )
