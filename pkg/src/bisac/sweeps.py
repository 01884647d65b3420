"""Seeded parameter sweeps: bounds, Monte Carlo MSE, and rate tradeoffs.

Every random draw in a sweep is keyed by (master seed, point index, trial
index) through numpy's seed-sequence mechanism, so results do not depend on
execution order or worker count. Schemes at the same point share the same
draws on purpose: paired noise makes scheme comparisons far less noisy than
independent streams would.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import math

import numpy as np

from . import __version__
from .beamforming import mrt_cov, solve_p2, solve_p4
from .channel import Scenario, db_to_lin, lin_to_db
from .config import EstimateConfig, HarnessConfig, config_echo
from .crb import (
    crb_deterministic,
    crb_gaussian,
    crb_super,
    quadform_real,
    sensing_snr,
)
from .errors import InfeasibleError
from .estimators import (
    GridSpec,
    TxRealization,
    mle_gaussian,
    mle_super,
    receive,
    synth_deterministic,
    synth_gaussian,
    synth_super,
)

SCHEMA_ID = "bisac-sweep-1"
ESTIMATE_SCHEMA_ID = "bisac-estimate-1"

BOUND_AXES = ("power_dbm", "sensing_snr_db", "target_distance_m")
TRADEOFF_AXES = ("rate_bps", "sinr_threshold_db")
AXES = BOUND_AXES + TRADEOFF_AXES

BOUND_SCHEMES = ("gaussian", "deterministic", "superposed")
TRADEOFF_SCHEMES = (
    "gaussian-opt",
    "superposed-opt",
    "known-realization",
    "time-switching",
    "power-splitting",
)

# Column contract for CSV output. Versioned through the schema column; any
# change to names, order, or meaning must bump SCHEMA_ID.
COLUMNS = (
    "schema",
    "axis",
    "value",
    "scheme",
    "feasible",
    "crb_rad2",
    "crb_db",
    "mse_rad2",
    "mse_db",
    "rate_bps",
    "sensing_snr_db",
    "iterations",
)


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """What to sweep: an axis, its points, the schemes, and the seeding.

    Args:
        axis: one of AXES.
        values: strictly monotone axis points.
        schemes: scheme identifiers drawn from BOUND_SCHEMES or
            TRADEOFF_SCHEMES depending on the axis family.
        trials: Monte Carlo trials per point for MSE estimation.
        seed: master seed; combined with point and trial indices per draw.
        det_fraction: share of the power budget given to the known component
            in the fixed superposed split.
    """

    axis: str
    values: tuple
    schemes: tuple
    trials: int = 1
    seed: int = 1234
    det_fraction: float = 0.1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("values must be non-empty")
        if any(not np.isfinite(v) for v in vals):
            raise ValueError("values must be finite")
        diffs = np.diff(vals)
        if len(vals) > 1 and not (np.all(diffs > 0.0) or np.all(diffs < 0.0)):
            raise ValueError("values must be strictly monotone")
        object.__setattr__(self, "values", vals)
        family = BOUND_SCHEMES if self.axis in BOUND_AXES else TRADEOFF_SCHEMES
        schemes = tuple(self.schemes)
        if not schemes:
            raise ValueError("schemes must be non-empty")
        for s in schemes:
            if s not in family:
                raise ValueError(f"scheme {s!r} not valid for axis {self.axis!r}")
        if len(set(schemes)) != len(schemes):
            raise ValueError("schemes must be unique")
        object.__setattr__(self, "schemes", schemes)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.det_fraction <= 1.0:
            raise ValueError("det_fraction must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in a u64")


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """One (axis value, scheme) result; None marks a column not produced."""

    axis: str
    value: float
    scheme: str
    feasible: bool
    crb_rad2: float | None
    mse_rad2: float | None = None
    rate_bps: float | None = None
    sensing_snr_db: float | None = None
    iterations: int | None = None

    def record(self) -> dict:
        def db(x):
            return None if x is None or x <= 0.0 else lin_to_db(x)

        return {
            "schema": SCHEMA_ID,
            "axis": self.axis,
            "value": self.value,
            "scheme": self.scheme,
            "feasible": self.feasible,
            "crb_rad2": self.crb_rad2,
            "crb_db": db(self.crb_rad2),
            "mse_rad2": self.mse_rad2,
            "mse_db": db(self.mse_rad2),
            "rate_bps": self.rate_bps,
            "sensing_snr_db": self.sensing_snr_db,
            "iterations": self.iterations,
        }


@dataclasses.dataclass(frozen=True)
class SweepResult:
    kind: str
    spec: SweepSpec
    config: HarnessConfig
    rows: tuple


# ---------------------------------------------------------------------------
# Point construction


def _point_scenario(cfg: HarnessConfig, axis: str, value: float) -> Scenario:
    """Scenario for one bound-axis point; the channel draw is shared."""
    if axis == "power_dbm":
        return cfg.scenario(power_w=db_to_lin(value - 30.0))
    if axis == "sensing_snr_db":
        # Pin the sensing SNR of the full-power beam aimed at the target, so
        # the axis value is exactly the SNR every scheme operates at.
        alpha2 = db_to_lin(value) * cfg.sigma_s2() / (cfg.power_w() * cfg.m_tx * cfg.m_rx)
        return cfg.scenario(alpha2=alpha2)
    if axis == "target_distance_m":
        return cfg.scenario(alpha2=cfg.alpha2_at_distance(value))
    raise ValueError(f"axis {axis!r} is not a bound-sweep axis")


def _zeros_cov(m: int) -> np.ndarray:
    return np.zeros((m, m), dtype=np.complex128)


def _bound_pair(sc: Scenario, scheme: str, det_fraction: float):
    """Fixed target-pointed covariance split for the bound/MSE schemes."""
    a = sc.steering_dod()
    m = sc.ula.m_tx
    if scheme == "gaussian":
        return mrt_cov(sc.p_max, a), _zeros_cov(m)
    if scheme == "deterministic":
        return _zeros_cov(m), mrt_cov(sc.p_max, a)
    return (
        mrt_cov((1.0 - det_fraction) * sc.p_max, a),
        mrt_cov(det_fraction * sc.p_max, a),
    )


def _bound_crb(sc: Scenario, scheme: str, r_c: np.ndarray, r_s: np.ndarray) -> float:
    if scheme == "gaussian":
        return crb_gaussian(sc, r_c)
    if scheme == "deterministic":
        return crb_deterministic(sc, r_s)
    return crb_super(sc, r_c, r_s)


def _bound_row(cfg: HarnessConfig, spec: SweepSpec, p_idx: int, scheme: str) -> SweepRow:
    value = spec.values[p_idx]
    sc = _point_scenario(cfg, spec.axis, value)
    r_c, r_s = _bound_pair(sc, scheme, spec.det_fraction)
    return SweepRow(
        axis=spec.axis,
        value=value,
        scheme=scheme,
        feasible=True,
        crb_rad2=_bound_crb(sc, scheme, r_c, r_s),
        sensing_snr_db=lin_to_db(sensing_snr(sc, r_c + r_s)),
    )


def _mse_point(cfg: HarnessConfig, spec: SweepSpec, p_idx: int, scheme: str) -> SweepRow:
    """Monte Carlo squared-error mean for one point and scheme."""
    bound = _bound_row(cfg, spec, p_idx, scheme)
    sc = _point_scenario(cfg, spec.axis, spec.values[p_idx])
    r_c, r_s = _bound_pair(sc, scheme, spec.det_fraction)
    grid = GridSpec()
    sq_sum = 0.0
    for trial in range(spec.trials):
        rng = np.random.default_rng([spec.seed, p_idx, trial])
        if scheme == "gaussian":
            x = synth_gaussian(sc, r_c, rng)
            tx = TxRealization(gaussian=x, deterministic=np.zeros_like(x))
            est = mle_gaussian(receive(sc, tx, rng), sc, r_c, grid)
        elif scheme == "deterministic":
            x0 = synth_deterministic(sc, r_s, rng)
            tx = TxRealization(gaussian=np.zeros_like(x0), deterministic=x0)
            est = mle_super(receive(sc, tx, rng), sc, r_c, r_s, tx, grid)
        else:
            tx = synth_super(sc, r_c, r_s, rng)
            est = mle_super(receive(sc, tx, rng), sc, r_c, r_s, tx, grid)
        sq_sum += (est.theta_hat - sc.theta) ** 2
    return dataclasses.replace(bound, mse_rad2=sq_sum / spec.trials)


def _mse_task(args):
    cfg, spec, p_idx, scheme = args
    return p_idx, scheme, _mse_point(cfg, spec, p_idx, scheme)


# ---------------------------------------------------------------------------
# Tradeoff schemes


def _rate_to_gamma0(axis: str, value: float) -> tuple[float, float]:
    """Map an axis point to (target rate, SINR threshold)."""
    if axis == "rate_bps":
        if value < 0.0:
            raise ValueError("rate targets must be >= 0")
        return value, 2.0**value - 1.0
    gamma0 = db_to_lin(value)
    return math.log2(1.0 + gamma0), gamma0


def _achieved_rate(sc: Scenario, r_c: np.ndarray, r_s: np.ndarray | None) -> float:
    signal = quadform_real(r_c, sc.h, "user beam power")
    interf = 0.0 if r_s is None else quadform_real(r_s, sc.h, "user leak power")
    return math.log2(1.0 + signal / (interf + sc.sigma_c2))


def _tradeoff_row(cfg: HarnessConfig, spec: SweepSpec, p_idx: int, scheme: str) -> SweepRow:
    value = spec.values[p_idx]
    rate, gamma0 = _rate_to_gamma0(spec.axis, value)
    sc = cfg.scenario(gamma0=gamma0)
    base = dict(axis=spec.axis, value=value, scheme=scheme)
    infeasible = SweepRow(feasible=False, crb_rad2=None, **base)
    a = sc.steering_dod()

    try:
        if scheme == "gaussian-opt":
            r = solve_p2(sc)
            return SweepRow(
                feasible=True,
                crb_rad2=crb_gaussian(sc, r),
                rate_bps=_achieved_rate(sc, r, None),
                sensing_snr_db=lin_to_db(sensing_snr(sc, r)),
                **base,
            )
        if scheme == "known-realization":
            r = solve_p2(sc)
            return SweepRow(
                feasible=True,
                crb_rad2=crb_deterministic(sc, r),
                rate_bps=_achieved_rate(sc, r, None),
                sensing_snr_db=lin_to_db(sensing_snr(sc, r)),
                **base,
            )
        if scheme == "superposed-opt":
            pair, trace = solve_p4(sc)
            return SweepRow(
                feasible=True,
                crb_rad2=crb_super(sc, pair.r_c, pair.r_s),
                rate_bps=_achieved_rate(sc, pair.r_c, pair.r_s),
                sensing_snr_db=lin_to_db(sensing_snr(sc, pair.total())),
                iterations=trace.iterations,
                **base,
            )
    except InfeasibleError:
        return infeasible

    hn2 = float(np.vdot(sc.h, sc.h).real)
    if scheme == "time-switching":
        # Full-power user beam while communicating, full-power target beam
        # while sensing; the sensing block shrinks as the rate target grows.
        rate_cap = math.log2(1.0 + sc.p_max * hn2 / sc.sigma_c2)
        f_sense = 1.0 - rate / rate_cap
        if f_sense <= 0.0:
            return infeasible
        r_s = mrt_cov(sc.p_max, a)
        return SweepRow(
            feasible=True,
            crb_rad2=crb_deterministic(sc, r_s) / f_sense,
            rate_bps=rate,
            sensing_snr_db=lin_to_db(sensing_snr(sc, r_s)),
            **base,
        )
    if scheme == "power-splitting":
        # Two fixed beams; the user beam gets exactly the power that holds
        # the SINR threshold against the target beam's leakage.
        cross = quadform_real(mrt_cov(1.0, a), sc.h, "target beam leak") if gamma0 > 0 else 0.0
        p_com = gamma0 * (sc.p_max * cross + sc.sigma_c2) / (hn2 + gamma0 * cross)
        if p_com > sc.p_max * (1.0 + 1e-12):
            return infeasible
        p_com = min(p_com, sc.p_max)
        r_c = p_com * np.outer(sc.h, sc.h.conj()) / hn2
        r_s = mrt_cov(sc.p_max - p_com, a)
        return SweepRow(
            feasible=True,
            crb_rad2=crb_super(sc, r_c, r_s),
            rate_bps=_achieved_rate(sc, r_c, r_s),
            sensing_snr_db=lin_to_db(sensing_snr(sc, r_c + r_s)),
            **base,
        )
    raise ValueError(f"unknown tradeoff scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Drivers


def _ordered_rows(spec: SweepSpec, keyed: dict) -> tuple:
    return tuple(
        keyed[(p, s)] for p in range(len(spec.values)) for s in spec.schemes
    )


def run_crb_sweep(spec: SweepSpec, cfg: HarnessConfig) -> SweepResult:
    """Bound-only sweep over power, sensing SNR, or distance."""
    if spec.axis not in BOUND_AXES:
        raise ValueError(f"axis {spec.axis!r} is not a bound-sweep axis")
    keyed = {}
    for p_idx in range(len(spec.values)):
        for scheme in spec.schemes:
            keyed[(p_idx, scheme)] = _bound_row(cfg, spec, p_idx, scheme)
    return SweepResult(kind="crb-sweep", spec=spec, config=cfg, rows=_ordered_rows(spec, keyed))


def run_mse_sweep(spec: SweepSpec, cfg: HarnessConfig, workers: int = 1) -> SweepResult:
    """Monte Carlo MSE next to the bound at every point.

    Points and schemes fan out over a process pool when workers > 1; the
    per-trial seed streams make the result identical for any worker count.
    """
    if spec.axis not in BOUND_AXES:
        raise ValueError(f"axis {spec.axis!r} is not a bound-sweep axis")
    tasks = [
        (cfg, spec, p_idx, scheme)
        for p_idx in range(len(spec.values))
        for scheme in spec.schemes
    ]
    keyed = {}
    if workers <= 1 or len(tasks) == 1:
        for task in tasks:
            p_idx, scheme, row = _mse_task(task)
            keyed[(p_idx, scheme)] = row
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for p_idx, scheme, row in pool.map(_mse_task, tasks):
                keyed[(p_idx, scheme)] = row
    return SweepResult(kind="mse-sweep", spec=spec, config=cfg, rows=_ordered_rows(spec, keyed))


def run_tradeoff(spec: SweepSpec, cfg: HarnessConfig) -> SweepResult:
    """Bound-vs-rate boundary for the optimized and benchmark designs."""
    if spec.axis not in TRADEOFF_AXES:
        raise ValueError(f"axis {spec.axis!r} is not a tradeoff axis")
    keyed = {}
    for p_idx in range(len(spec.values)):
        for scheme in spec.schemes:
            keyed[(p_idx, scheme)] = _tradeoff_row(cfg, spec, p_idx, scheme)
    return SweepResult(kind="tradeoff", spec=spec, config=cfg, rows=_ordered_rows(spec, keyed))


def run_estimate(cfg: HarnessConfig, est: EstimateConfig, seed: int | None = None) -> dict:
    """One synthesize -> receive -> estimate round trip.

    Returns a JSON-ready dict with the true and estimated parameters and,
    when est.emit_curve is set, the coarse objective curve.
    """
    sc = cfg.scenario()
    master = cfg.seed if seed is None else seed
    rng = np.random.default_rng([master, 0, 0])
    r_c, r_s = _bound_pair(sc, est.model, est.det_fraction)
    if est.model == "gaussian":
        x = synth_gaussian(sc, r_c, rng)
        tx = TxRealization(gaussian=x, deterministic=np.zeros_like(x))
        res = mle_gaussian(receive(sc, tx, rng), sc, r_c, return_curve=est.emit_curve)
    elif est.model == "deterministic":
        x0 = synth_deterministic(sc, r_s, rng)
        tx = TxRealization(gaussian=np.zeros_like(x0), deterministic=x0)
        res = mle_super(receive(sc, tx, rng), sc, r_c, r_s, tx, return_curve=est.emit_curve)
    else:
        tx = synth_super(sc, r_c, r_s, rng)
        res = mle_super(receive(sc, tx, rng), sc, r_c, r_s, tx, return_curve=est.emit_curve)
    result = {
        "model": est.model,
        "theta_true": sc.theta,
        "theta_hat": res.theta_hat,
        "theta_error": res.theta_hat - sc.theta,
        "alpha_true_mag": abs(sc.alpha),
        "alpha_hat_re": res.alpha_hat.real,
        "alpha_hat_im": res.alpha_hat.imag,
        "objective": res.objective,
    }
    if est.emit_curve:
        result["curve"] = [[float(t), float(v)] for t, v in res.curve]
    return {
        "meta": {
            "schema": ESTIMATE_SCHEMA_ID,
            "package_version": __version__,
            "kind": "estimate",
            "seed": master,
            "config": config_echo(cfg),
        },
        "result": result,
    }


# ---------------------------------------------------------------------------
# Emission


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(result: SweepResult, fh) -> None:
    """Emit the column-stable CSV: header row plus one row per record."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in result.rows:
        rec = row.record()
        writer.writerow([_csv_cell(rec[c]) for c in COLUMNS])


def json_payload(result: SweepResult) -> dict:
    """JSON object with run metadata and the same records as the CSV."""
    return {
        "meta": {
            "schema": SCHEMA_ID,
            "package_version": __version__,
            "kind": result.kind,
            "seed": result.spec.seed,
            "config": config_echo(result.config),
            "sweep": {
                "axis": result.spec.axis,
                "values": list(result.spec.values),
                "schemes": list(result.spec.schemes),
                "trials": result.spec.trials,
                "det_fraction": result.spec.det_fraction,
            },
        },
        "rows": [row.record() for row in result.rows],
    }
