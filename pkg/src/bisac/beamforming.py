"""Transmit covariance design for sensing under a user SINR constraint.

Three problems, increasing in generality:

* Gaussian-only signaling: rank-one KKT solution in span{a*, h} (`solve_p2`),
  MRT when the user constraint is inactive.
* Superposed signaling without a user constraint: all power to the known
  component, beamformed at the target (`solve_p3`).
* Superposed signaling with the constraint (`solve_p4`): successive convex
  approximation. The effective-information objective is affine in the known
  part and convex increasing in the Gaussian steered power, so the tangent
  linearization is a global under-estimator and the outer loop ascends
  monotonically. Each inner problem is a linear objective over PSD pairs and
  is solved exactly in the two-dimensional subspace span{a*, h} with a
  log-det barrier Newton method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import Scenario
from .crb import check_covariance, fisher_factor, tx_quadform
from .errors import InfeasibleError, NumericalError


@dataclass(frozen=True)
class CovPair:
    """Transmit covariance split: Gaussian part r_c, deterministic part r_s."""

    r_c: np.ndarray
    r_s: np.ndarray

    def total(self) -> np.ndarray:
        return self.r_c + self.r_s


@dataclass(frozen=True)
class ScaOptions:
    """Outer-loop and barrier tolerances for `solve_p4`."""

    max_iters: int = 100
    rel_tol: float = 1e-8
    barrier_t0: float = 1.0
    barrier_mu: float = 10.0
    barrier_gap: float = 1e-9
    newton_tol: float = 1e-8
    newton_max: int = 100


@dataclass(frozen=True)
class ScaTrace:
    """Objective value after each outer iteration (effective information f)."""

    objectives: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def mrt_cov(p: float, a: np.ndarray) -> np.ndarray:
    """Rank-one covariance steering power p at the direction of a: p a* a^T / ||a||^2."""
    if not (np.isfinite(p) and p >= 0.0):
        raise ValueError(f"power must be >= 0, got {p!r}")
    a = np.asarray(a, dtype=np.complex128)
    n2 = float(np.vdot(a, a).real)
    if n2 <= 0.0:
        raise ValueError("cannot beamform along a zero vector")
    return p * np.outer(a.conj(), a) / n2


def _check_feasible(sc: Scenario) -> float:
    """Return ||h||^2 after verifying the SINR threshold is attainable at all."""
    hn2 = float(np.vdot(sc.h, sc.h).real)
    if sc.gamma0 > 0.0 and sc.gamma0 * sc.sigma_c2 > sc.p_max * hn2 * (1.0 + 1e-12):
        cap = sc.p_max * hn2 / sc.sigma_c2
        raise InfeasibleError(f"SINR threshold {sc.gamma0!r} exceeds the full-power cap {cap!r}")
    return hn2


def solve_p2(sc: Scenario) -> np.ndarray:
    """Best Gaussian-only covariance: max a^T R a^* s.t. SINR and power budget.

    MRT at the target whenever it already satisfies the user; otherwise the
    rank-one optimum in span{a*, h} that holds the SINR with equality.
    """
    hn2 = _check_feasible(sc)
    a = sc.steering_dod()
    acj = a.conj()
    p, g0, s_c2, m_t = sc.p_max, sc.gamma0, sc.sigma_c2, sc.ula.m_tx
    cross = abs(np.vdot(sc.h, acj)) ** 2  # |h^H a^*|^2
    if p * cross >= m_t * g0 * s_c2:
        return mrt_cov(p, a)
    u1 = sc.h / np.sqrt(hn2)
    c1 = np.vdot(u1, acj)  # u1^H a^*
    w = acj - c1 * u1
    wn = float(np.linalg.norm(w))
    if wn <= 1e-9 * np.sqrt(m_t):
        return mrt_cov(p, a)  # user and target directions coincide
    u2 = w / wn
    lam1 = g0 * s_c2 / hn2
    lam2 = max(p - lam1, 0.0)
    chi = c1 / abs(c1) if abs(c1) > 1e-300 else 1.0
    lam12 = np.sqrt(lam1 * lam2) * chi
    u = np.column_stack([u1, u2])
    mid = np.array([[lam1, lam12], [np.conj(lam12), lam2]])
    r = u @ mid @ u.conj().T
    return 0.5 * (r + r.conj().T)


def solve_p3(sc: Scenario) -> CovPair:
    """Best unconstrained superposed split: everything in the known component."""
    m = sc.ula.m_tx
    return CovPair(
        r_c=np.zeros((m, m), dtype=np.complex128),
        r_s=mrt_cov(sc.p_max, sc.steering_dod()),
    )


# ---------------------------------------------------------------------------
# Inner linearized problem, solved in span{a*, h}
#
# Each 2x2 Hermitian block is parametrized by 4 reals [x00, x11, re, im];
# log-det, trace and the SINR slack are all simple polynomials in these, so
# Newton steps use exact gradients and Hessians.

_DET_HESS = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -2.0, 0.0],
        [0.0, 0.0, 0.0, -2.0],
    ]
)


def _blk_mat(x4: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [x4[0], x4[2] + 1j * x4[3]],
            [x4[2] - 1j * x4[3], x4[1]],
        ]
    )


def _blk_det(x4: np.ndarray) -> float:
    return x4[0] * x4[1] - x4[2] ** 2 - x4[3] ** 2


def _blk_det_grad(x4: np.ndarray) -> np.ndarray:
    return np.array([x4[1], x4[0], -2.0 * x4[2], -2.0 * x4[3]])


def _quad_coef(g: np.ndarray) -> np.ndarray:
    """Coefficients of g^H X g as a linear form in the block parameters."""
    rho = np.conj(g[0]) * g[1]
    return np.array([abs(g[0]) ** 2, abs(g[1]) ** 2, 2.0 * rho.real, -2.0 * rho.imag])


def _subspace_basis(sc: Scenario, hn2: float) -> np.ndarray:
    """Orthonormal (m_tx x 2) basis whose span contains a^* and h."""
    acj = sc.steering_dod().conj()
    m_t = sc.ula.m_tx
    if hn2 > 0.0:
        u1 = sc.h / np.sqrt(hn2)
    else:
        u1 = acj / np.linalg.norm(acj)
    w = acj - np.vdot(u1, acj) * u1
    wn = float(np.linalg.norm(w))
    if wn > 1e-9 * np.sqrt(m_t):
        u2 = w / wn
    else:
        # Degenerate span: complete with any orthonormal direction.
        probe = np.zeros(m_t, dtype=np.complex128)
        probe[int(np.argmin(np.abs(u1)))] = 1.0
        w = probe - np.vdot(u1, probe) * u1
        u2 = w / np.linalg.norm(w)
    return np.column_stack([u1, u2])


class _BarrierProblem:
    """max obj.x over {blocks PSD, sum trace <= 1, sinr slack >= 0}, barrier form."""

    def __init__(self, obj_vec, sinr_vec, sinr_rhs, use_sinr):
        self.obj = obj_vec
        self.tr = np.array([1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
        self.sinr_vec = sinr_vec
        self.sinr_rhs = sinr_rhs
        self.use_sinr = use_sinr
        self.nu = 5.0 + (1.0 if use_sinr else 0.0)

    def slacks(self, x):
        out = [_blk_det(x[:4]), x[0], _blk_det(x[4:]), x[4], 1.0 - self.tr @ x]
        if self.use_sinr:
            out.append(self.sinr_vec @ x - self.sinr_rhs)
        return out

    def feasible(self, x):
        return all(s > 0.0 for s in self.slacks(x))

    def phi(self, x, t):
        dc, ds = _blk_det(x[:4]), _blk_det(x[4:])
        s_pow = 1.0 - self.tr @ x
        val = -t * (self.obj @ x) - np.log(dc) - np.log(ds) - np.log(s_pow)
        if self.use_sinr:
            val -= np.log(self.sinr_vec @ x - self.sinr_rhs)
        return val

    def grad_hess(self, x, t):
        g = -t * self.obj.copy()
        h = np.zeros((8, 8))
        for sl in (slice(0, 4), slice(4, 8)):
            d = _blk_det(x[sl])
            gd = _blk_det_grad(x[sl])
            g[sl] += -gd / d
            h[sl, sl] += np.outer(gd, gd) / d**2 - _DET_HESS / d
        s_pow = 1.0 - self.tr @ x
        g += self.tr / s_pow
        h += np.outer(self.tr, self.tr) / s_pow**2
        if self.use_sinr:
            s = self.sinr_vec @ x - self.sinr_rhs
            g += -self.sinr_vec / s
            h += np.outer(self.sinr_vec, self.sinr_vec) / s**2
        return g, h

    def center(self, x, t, tol, max_steps):
        lam2 = np.inf
        for _ in range(max_steps):
            g, h = self.grad_hess(x, t)
            try:
                delta = np.linalg.solve(h, -g)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(h, -g, rcond=None)[0]
            lam2 = float(-g @ delta)
            if lam2 <= 2.0 * tol:
                return x
            step, f0 = 1.0, self.phi(x, t)
            noise = 1e-12 * (abs(f0) + 1.0)  # float-cancellation allowance at large t
            while step > 1e-14:
                trial = x + step * delta
                if self.feasible(trial) and self.phi(trial, t) <= f0 - 0.1 * step * lam2 + noise:
                    break
                step *= 0.5
            else:
                return x  # line search exhausted: at the numerical optimum
            x = x + step * delta
        if lam2 <= 1e-2:
            return x  # inside the quadratic-convergence region: accuracy suffices
        raise NumericalError("barrier centering did not converge")


def _surrogate_slope(sc: Scenario, q_k: float) -> float:
    """Tangent slope of the Gaussian-part information kappa q^2/(1+kappa q)."""
    kappa = abs(sc.alpha) ** 2 * sc.ula.m_rx / sc.sigma_s2
    return 1.0 - 1.0 / (1.0 + kappa * max(q_k, 0.0)) ** 2


def inner_solve_p4k(sc: Scenario, r_c_prev: np.ndarray, opts: ScaOptions = ScaOptions()) -> CovPair:
    """One linearized step: max c_c a^T R_c a^* + a^T R_s a^* over the SINR set.

    c_c is the tangent slope of the Gaussian-covariance information at the
    previous iterate. The search space is compressed to span{a*, h} (the
    compression preserves both quadratic forms and can only free up trace),
    leaving two 2x2 Hermitian blocks handled by a log-det barrier.
    """
    r_c_prev = check_covariance(r_c_prev, sc.ula.m_tx, "r_c_prev")
    hn2 = _check_feasible(sc)
    p, g0 = sc.p_max, sc.gamma0
    base = g0 * sc.sigma_c2 / (p * hn2) if g0 > 0.0 else 0.0
    u = _subspace_basis(sc, hn2)

    if base >= 1.0 - 1e-9:
        # Feasible set collapses to full power on the user beam.
        r_c = p * np.outer(u[:, 0], u[:, 0].conj())
        return CovPair(r_c=0.5 * (r_c + r_c.conj().T), r_s=np.zeros_like(r_c))

    c_c = _surrogate_slope(sc, tx_quadform(sc, r_c_prev))
    a_sub = u.conj().T @ sc.steering_dod().conj()  # a^* in the subspace
    lin_a = _quad_coef(a_sub)
    obj = np.concatenate([c_c * lin_a, lin_a]) / sc.ula.m_tx
    use_sinr = g0 > 0.0
    sinr_vec = np.array([1.0, 0.0, 0.0, 0.0, -g0, 0.0, 0.0, 0.0])
    prob = _BarrierProblem(obj, sinr_vec, base, use_sinr)

    p1 = (1.0 + base) / 2.0
    eps = min(1e-3, (p1 - base) / (4.0 * (1.0 + g0)), (1.0 - p1) / 8.0)
    x = np.array([p1, eps, 0.0, 0.0, eps, eps, 0.0, 0.0])
    if not prob.feasible(x):
        raise NumericalError("could not construct a strictly feasible start")

    t = opts.barrier_t0
    while True:
        x = prob.center(x, t, opts.newton_tol, opts.newton_max)
        if prob.nu / t <= opts.barrier_gap:
            break
        t *= opts.barrier_mu

    r_c = p * (u @ _blk_mat(x[:4]) @ u.conj().T)
    r_s = p * (u @ _blk_mat(x[4:]) @ u.conj().T)
    return CovPair(r_c=0.5 * (r_c + r_c.conj().T), r_s=0.5 * (r_s + r_s.conj().T))


def _sca_run(sc: Scenario, init: CovPair, opts: ScaOptions) -> tuple[CovPair, ScaTrace]:
    """Iterate tangent linearizations from one starting covariance pair.

    The surrogate touches the true objective at the expansion point, so each
    inner solve can only improve on the current pair up to barrier accuracy.
    Steps that fail to improve (a fixed point seen through barrier noise) are
    rejected, which keeps the recorded sequence strictly non-decreasing and
    the returned pair at least as good as the start.
    """
    pair = init
    objectives = [fisher_factor(sc, pair.r_c, pair.r_s)]
    converged = False
    for _ in range(opts.max_iters):
        cand = inner_solve_p4k(sc, pair.r_c, opts)
        f_new = fisher_factor(sc, cand.r_c, cand.r_s)
        if f_new <= objectives[-1]:
            converged = f_new >= objectives[-1] * (1.0 - 10.0 * opts.rel_tol)
            break
        pair = cand
        objectives.append(f_new)
        if f_new - objectives[-2] <= opts.rel_tol * objectives[-2]:
            converged = True
            break
    return pair, ScaTrace(
        objectives=objectives, iterations=len(objectives) - 1, converged=converged
    )


def solve_p4(sc: Scenario, opts: ScaOptions = ScaOptions()) -> tuple[CovPair, ScaTrace]:
    """Constrained superposed covariance split via multi-start SCA.

    The exact information objective is convex in the two quadratic forms, so
    its maximum sits at an extreme point and a single tangent iteration can
    park at whichever vertex it started near. Running the ascent from both
    extremes and keeping the better fixed point removes that trap: one start
    is the Gaussian-only optimum (so the result never loses to it), the other
    holds the user's SINR with a minimal beam and gives the remaining budget
    to the known component (so the result never loses to a fixed two-beam
    split either).
    """
    hn2 = _check_feasible(sc)
    m = sc.ula.m_tx
    a = sc.steering_dod()
    zeros = np.zeros((m, m), dtype=np.complex128)
    cross = abs(np.vdot(sc.h, a.conj())) ** 2 / m
    p_com = sc.gamma0 * (sc.p_max * cross + sc.sigma_c2) / (hn2 + sc.gamma0 * cross)
    p_com = min(p_com, sc.p_max)
    inits = [
        CovPair(
            r_c=p_com * np.outer(sc.h, sc.h.conj()) / hn2,
            r_s=mrt_cov(sc.p_max - p_com, a),
        )
    ]
    if sc.gamma0 > 0.0:
        inits.append(CovPair(r_c=solve_p2(sc), r_s=zeros))

    best: tuple[CovPair, ScaTrace] | None = None
    for init in inits:
        pair, trace = _sca_run(sc, init, opts)
        if best is None or trace.objectives[-1] > best[1].objectives[-1]:
            best = (pair, trace)
    return best
