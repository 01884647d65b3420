"""Brute-force numerical references for the closed forms.

Everything here trades speed for obviousness: dense block covariances
assembled with `kron` and inverted explicitly, information matrices from the
generic Gaussian trace/mean formulas, and a projected-(super)gradient solver
for the small linear semidefinite programs. The test-suite pins the fast
closed-form implementations against these. Nothing in the production paths
imports this module.
"""

from __future__ import annotations

import numpy as np

from .channel import Scenario
from .crb import check_covariance, tx_quadform

# ---------------------------------------------------------------------------
# Dense echo-statistics oracles


def echo_cov_full(sc: Scenario, r_c: np.ndarray) -> np.ndarray:
    """Explicit (m_rx T) x (m_rx T) echo covariance I_T kron C."""
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    b = sc.steering_doa()
    g = abs(sc.alpha) ** 2
    c = g * tx_quadform(sc, r_c) * np.outer(b, b.conj()) + sc.sigma_s2 * np.eye(sc.ula.m_rx)
    return np.kron(np.eye(sc.t_symbols), c)


def echo_cov_deriv_full(sc: Scenario, r_c: np.ndarray, wrt: str) -> np.ndarray:
    """Analytic derivative of the dense echo covariance.

    Args:
        wrt: "theta", "mag" (= |alpha|), "re" or "im" (Re/Im of alpha).
    """
    r_c = check_covariance(r_c, sc.ula.m_tx, "r_c")
    q_c = tx_quadform(sc, r_c)
    b = sc.steering_doa()
    bd = sc.doa_deriv()
    alpha = complex(sc.alpha)
    bbh = np.outer(b, b.conj())
    if wrt == "theta":
        d = abs(alpha) ** 2 * q_c * (np.outer(bd, b.conj()) + np.outer(b, bd.conj()))
    elif wrt == "mag":
        d = 2.0 * abs(alpha) * q_c * bbh
    elif wrt == "re":
        d = 2.0 * alpha.real * q_c * bbh
    elif wrt == "im":
        d = 2.0 * alpha.imag * q_c * bbh
    else:
        raise ValueError(f"unknown parameter {wrt!r}")
    return np.kron(np.eye(sc.t_symbols), d)


def fim_gaussian_direct(sc: Scenario, r_c: np.ndarray) -> np.ndarray:
    """2x2 information matrix for (theta, |alpha|) from the dense trace formula."""
    r_full = echo_cov_full(sc, r_c)
    r_inv = np.linalg.inv(r_full)
    derivs = [echo_cov_deriv_full(sc, r_c, w) for w in ("theta", "mag")]
    out = np.empty((2, 2))
    for i, di in enumerate(derivs):
        for j, dj in enumerate(derivs):
            out[i, j] = np.trace(r_inv @ di @ r_inv @ dj).real
    return out


def fim_super_direct(sc: Scenario, r_c: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """3x3 information matrix for (theta, Re alpha, Im alpha), dense formula.

    Covariance part as in the Gaussian case; the known component x0 (shape
    m_tx x t_symbols) contributes the mean-derivative term
    2 Re{du_i^H R^-1 du_j}. Exact agreement with the closed form requires x0
    to realize its design covariance exactly, i.e. x0 x0^H / T = r_s.
    """
    x0 = np.asarray(x0, dtype=np.complex128)
    if x0.shape != (sc.ula.m_tx, sc.t_symbols):
        raise ValueError(f"x0 must be {sc.ula.m_tx}x{sc.t_symbols}, got {x0.shape}")
    r_full = echo_cov_full(sc, r_c)
    r_inv = np.linalg.inv(r_full)
    derivs = [echo_cov_deriv_full(sc, r_c, w) for w in ("theta", "re", "im")]

    a = sc.steering_dod()
    b = sc.steering_doa()
    bd = sc.doa_deriv()
    alpha = complex(sc.alpha)
    row = a @ x0  # a^T x0(t) for every symbol
    # Mean vectors stacked symbol-major, matching the kron block order.
    du = [
        np.ravel(alpha * np.outer(bd, row), order="F"),
        np.ravel(np.outer(b, row), order="F"),
        np.ravel(1j * np.outer(b, row), order="F"),
    ]
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            cov_term = np.trace(r_inv @ derivs[i] @ r_inv @ derivs[j]).real
            mean_term = 2.0 * np.real(np.vdot(du[i], r_inv @ du[j]))
            out[i, j] = cov_term + mean_term
    return out


# ---------------------------------------------------------------------------
# Projected-gradient reference solver for the linear covariance programs


def _proj_psd_trace(blocks, p):
    """Exact projection onto {(X_i) all PSD, sum_i tr X_i <= p}.

    Blockwise unitary invariance reduces this to projecting the pooled
    eigenvalues onto {lam >= 0, sum lam <= p} (clip, and if still over budget,
    the usual sorted-threshold simplex projection).
    """
    eig = [np.linalg.eigh(0.5 * (b + b.conj().T)) for b in blocks]
    mu = np.concatenate([lam for lam, _ in eig])
    lam = np.maximum(mu, 0.0)
    if lam.sum() > p:
        s = np.sort(mu)[::-1]
        csum = np.cumsum(s) - p
        idx = np.arange(1, len(s) + 1)
        rho = np.max(np.nonzero(s - csum / idx > 0.0)[0]) + 1
        tau = csum[rho - 1] / rho
        lam = np.maximum(mu - tau, 0.0)
    out = []
    start = 0
    for (_, v), b in zip(eig, blocks):
        k = b.shape[0]
        li = lam[start : start + k]
        start += k
        out.append((v * li) @ v.conj().T)
    return out


def _dykstra(blocks, coef, sinr_rhs, p, tol=1e-11, max_iter=350):
    """Project Hermitian blocks onto {PSD, joint trace <= p} ∩ {SINR halfspace}.

    Dykstra's algorithm over two sets; the first projection is exact
    (pooled-eigenvalue waterfilling), the second is an affine halfspace
    sum_i <coef_i, z_i> >= sinr_rhs.
    """
    x = [np.array(b, dtype=np.complex128) for b in blocks]
    if coef is None:
        return _proj_psd_trace(x, p)
    corr_a = [np.zeros_like(xi) for xi in x]
    corr_b = [np.zeros_like(xi) for xi in x]
    coef_norm2 = sum(float(np.linalg.norm(c) ** 2) for c in coef)
    scale = max(p, 1.0e-300)
    for _ in range(max_iter):
        y = [xi + ci for xi, ci in zip(x, corr_a)]
        new = _proj_psd_trace(y, p)
        corr_a = [yi - ni for yi, ni in zip(y, new)]
        shift = sum(float(np.linalg.norm(ni - xi)) for ni, xi in zip(new, x))
        x = new
        y = [xi + ci for xi, ci in zip(x, corr_b)]
        val = sum(float(np.real(np.vdot(c, yi))) for c, yi in zip(coef, y))
        if val < sinr_rhs:
            step = (sinr_rhs - val) / coef_norm2
            new = [yi + step * c for yi, c in zip(y, coef)]
        else:
            new = y
        corr_b = [yi - ni for yi, ni in zip(y, new)]
        shift += sum(float(np.linalg.norm(ni - xi)) for ni, xi in zip(new, x))
        x = new
        if shift < tol * scale:
            break
    return x


def pgd_linear_cov_max(objs, h, gamma0, sigma_c2, p, steps=70, growth=1.5):
    """Maximize sum_i <z_i, objs[i]> over the SINR-constrained power ball.

    Projected gradient ascent with geometrically growing (then capped) steps:
    the objective is linear, so projecting x + s * grad approaches the optimal
    face as s grows, and any fixed point of the projected step is exactly
    optimal for every fixed s. Feasibility is restored with Dykstra
    projections and only iterates that verify feasibility are recorded.
    Returns (blocks, value).
    """
    n = len(objs)
    m = objs[0].shape[0]
    h = np.asarray(h, dtype=np.complex128)
    h_outer = np.outer(h, h.conj())
    hn2 = float(np.vdot(h, h).real)
    sinr_rhs = gamma0 * sigma_c2
    if gamma0 > 0.0 and sinr_rhs > p * hn2 * (1.0 + 1e-12):
        raise ValueError("infeasible SINR threshold for the reference solver")
    use_sinr = gamma0 > 0.0 and sinr_rhs > 0.0
    coef = ([h_outer] + [-gamma0 * h_outer] * (n - 1)) if use_sinr else None

    def value(bs):
        return sum(float(np.real(np.vdot(o, b))) for o, b in zip(objs, bs))

    def is_feasible(bs):
        tol = 1e-9 * max(p, 1e-300)
        if sum(float(np.trace(b).real) for b in bs) > p + tol:
            return False
        if any(float(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0]) < -tol for b in bs):
            return False
        if use_sinr:
            val = sum(float(np.real(np.vdot(c, b))) for c, b in zip(coef, bs))
            if val < sinr_rhs - 1e-9 * max(sinr_rhs, p * hn2):
                return False
        return True

    # Feasible start: full power toward the user in the first block.
    blocks = [np.zeros((m, m), dtype=np.complex128) for _ in range(n)]
    if hn2 > 0.0:
        blocks[0] = p * h_outer / hn2
    best = [b.copy() for b in blocks]
    best_val = value(blocks)

    grad_norm = max(np.sqrt(sum(float(np.linalg.norm(o) ** 2) for o in objs)), 1e-300)
    step = p / grad_norm
    step_cap = 3e4 * p / grad_norm
    for _ in range(steps):
        trial = [b + step * o for b, o in zip(blocks, objs)]
        blocks = _dykstra(trial, coef, sinr_rhs, p)
        v = value(blocks)
        if v > best_val and is_feasible(blocks):
            best_val = v
            best = [b.copy() for b in blocks]
        step = min(step * growth, step_cap)
    return [0.5 * (b + b.conj().T) for b in best], best_val


def pgd_gaussian_cov(a, h, gamma0, sigma_c2, p, **kw) -> np.ndarray:
    """Reference maximizer of a^T R a^* with user SINR h^H R h >= gamma0 sigma_c2."""
    a = np.asarray(a, dtype=np.complex128)
    obj = np.outer(a.conj(), a)
    blocks, _ = pgd_linear_cov_max([obj], h, gamma0, sigma_c2, p, **kw)
    return blocks[0]


def dual_bound_cov(objs, h, gamma0, sigma_c2, p, iters=90) -> float:
    """Certified upper bound on max sum_i <z_i, objs[i]> over the same set.

    Lagrange dual of the linear SDP: for SINR multiplier nu >= 0 the trace
    multiplier collapses to mu(nu) = max_i lambda_max(objs[i] + nu * sinr_i),
    leaving the one-dimensional convex function D(nu) = p * mu(nu) - nu * rhs
    (sinr_0 = h h^H, sinr_i = -gamma0 h h^H for the remaining blocks). The
    minimum over nu, found by bracketing plus golden section, upper-bounds the
    primal value by weak duality; a primal iterate matching it is certified
    optimal.
    """
    h = np.asarray(h, dtype=np.complex128)
    h_outer = np.outer(h, h.conj())
    rhs = gamma0 * sigma_c2
    sinr = [h_outer] + [-gamma0 * h_outer] * (len(objs) - 1)

    def dual(nu: float) -> float:
        mu = max(float(np.linalg.eigvalsh(o + nu * s)[-1]) for o, s in zip(objs, sinr))
        return p * max(mu, 0.0) - nu * rhs

    if gamma0 <= 0.0:
        return dual(0.0)
    lo, hi = 0.0, 1.0
    while dual(3.0 * hi) < dual(hi) and hi < 1e30:
        hi *= 3.0
    hi *= 3.0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = dual(x1), dual(x2)
    for _ in range(iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = dual(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = dual(x2)
    return min(f1, f2, dual(0.0))


def dual_bound_pair(coef_c, coef_s, a, h, gamma0, sigma_c2, p) -> float:
    """Dual certificate for the linearized two-block problem of the SCA step."""
    a = np.asarray(a, dtype=np.complex128)
    base = np.outer(a.conj(), a)
    return dual_bound_cov([coef_c * base, coef_s * base], h, gamma0, sigma_c2, p)
