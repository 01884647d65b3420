"""Command-line front end: sweeps, single estimation runs, and self checks.

Exit codes: 0 on success, 1 on a numerical failure or failed self check,
2 on configuration or I/O problems. Failures print one JSON object on the
diagnostic stream so callers can parse the reason.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, desk_scale, load_config
from .errors import NumericalError
from .sweeps import (
    BOUND_SCHEMES,
    TRADEOFF_SCHEMES,
    SweepSpec,
    json_payload,
    run_crb_sweep,
    run_estimate,
    run_mse_sweep,
    run_tradeoff,
    write_csv,
)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

# Built-in sweep shapes used when the config file does not pin one.
_SWEEP_DEFAULTS = {
    "crb-sweep": {
        "axis": "power_dbm",
        "start": -10.0,
        "stop": 40.0,
        "count": 11,
        "schemes": list(BOUND_SCHEMES),
        "trials": 1,
    },
    "mse-sweep": {
        "axis": "sensing_snr_db",
        "start": 0.0,
        "stop": 25.0,
        "count": 6,
        "schemes": list(BOUND_SCHEMES),
        "trials": 50,
    },
    "tradeoff": {
        "axis": "rate_bps",
        "start": 0.0,
        "stop": 6.5,
        "count": 14,
        "schemes": list(TRADEOFF_SCHEMES),
        "trials": 1,
    },
}


def _diagnostic(kind: str, message: str) -> None:
    print(json.dumps({"error": {"kind": kind, "message": message}}), file=sys.stderr)


def _resolve_values(table: dict) -> list:
    if "values" in table:
        vals = table["values"]
        if not isinstance(vals, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
        ):
            raise ConfigError("[sweep] values must be a list of numbers")
        return [float(v) for v in vals]
    missing = [k for k in ("start", "stop", "count") if k not in table]
    if missing:
        raise ConfigError(f"[sweep] needs either values or start/stop/count (missing {missing})")
    count = table["count"]
    if count < 2:
        raise ConfigError("[sweep] count must be >= 2")
    return [float(v) for v in np.linspace(table["start"], table["stop"], count)]


def _build_spec(command: str, rc: RunConfig, args) -> SweepSpec:
    table = dict(_SWEEP_DEFAULTS[command])
    overrides = dict(rc.sweep)
    if "values" in overrides:
        for k in ("start", "stop", "count"):
            table.pop(k, None)
    table.update(overrides)
    if args.trials is not None:
        table["trials"] = args.trials
    schemes = table["schemes"]
    if not isinstance(schemes, list) or not all(isinstance(s, str) for s in schemes):
        raise ConfigError("[sweep] schemes must be a list of strings")
    try:
        return SweepSpec(
            axis=table["axis"],
            values=_resolve_values(table),
            schemes=tuple(schemes),
            trials=table["trials"],
            seed=rc.harness.seed if args.seed is None else args.seed,
            det_fraction=table.get("det_fraction", 0.1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(payload_obj, result, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(payload_obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    else:
        buf = io.StringIO()
        write_csv(result, buf)
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc}") from exc


def _cmd_sweep(command: str, args) -> int:
    rc = load_config(args.config)
    cfg = rc.harness
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if command == "mse-sweep" and not args.heavy:
        cfg = desk_scale(cfg)
    spec = _build_spec(command, rc, args)
    workers = args.workers if args.workers is not None else rc.sweep.get("workers", 1)
    if command == "crb-sweep":
        result = run_crb_sweep(spec, cfg)
    elif command == "mse-sweep":
        result = run_mse_sweep(spec, cfg, workers=workers)
    else:
        result = run_tradeoff(spec, cfg)
    _emit(json_payload(result), result, args.format, args.out)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    rc = load_config(args.config)
    payload = run_estimate(rc.harness, rc.estimate, seed=args.seed)
    _emit(payload, None, "json", args.out)
    return EXIT_OK


def _selftest_checks():
    """Yield (name, callable) pairs; each callable raises on failure."""
    from .beamforming import mrt_cov, solve_p2, solve_p4
    from .channel import Scenario
    from .config import HarnessConfig
    from .crb import crb_deterministic, crb_gaussian, crb_super, fim_gaussian, tx_quadform
    from .oracles import dual_bound_cov, fim_gaussian_direct
    from .sweeps import run_mse_sweep
    from .ula import UlaConfig, rx_deriv_norm_sq, steering_rx, steering_rx_deriv

    def check_steering():
        ula = UlaConfig(m_tx=4, m_rx=6, spacing=0.05, wavelength=0.1)
        rng = np.random.default_rng(1)
        for theta in rng.uniform(-1.4, 1.4, size=25):
            b = steering_rx(ula, theta)
            db = steering_rx_deriv(ula, theta)
            if abs(np.vdot(b, db)) > 1e-10:
                raise AssertionError("steering and its derivative are not orthogonal")
            if abs(np.vdot(db, db).real - rx_deriv_norm_sq(ula, theta)) > 1e-10:
                raise AssertionError("derivative norm mismatch")

    def check_fim():
        ula = UlaConfig(m_tx=4, m_rx=4, spacing=0.05, wavelength=0.1)
        rng = np.random.default_rng(2)
        for _ in range(5):
            g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            r_c = g @ g.conj().T / 4.0
            h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            sc = Scenario(ula=ula, theta=0.3, phi=-0.2, alpha=0.8, h=h, p_max=1.0,
                          sigma_c2=1.0, sigma_s2=0.5, t_symbols=2)
            closed = fim_gaussian(sc, r_c).as_matrix()
            direct = fim_gaussian_direct(sc, r_c)
            if np.max(np.abs(closed - direct)) > 1e-8 * np.max(np.abs(direct)):
                raise AssertionError("closed-form information matrix disagrees with oracle")

    def check_ordering():
        cfg = HarnessConfig()
        sc = cfg.scenario()
        a = sc.steering_dod()
        rng = np.random.default_rng(3)
        for _ in range(100):
            f = rng.uniform(0.0, 1.0)
            r_c = mrt_cov((1.0 - f) * sc.p_max, a)
            r_s = mrt_cov(f * sc.p_max, a)
            total = r_c + r_s
            crb_d = crb_deterministic(sc, total)
            crb_2 = crb_super(sc, r_c, r_s)
            crb_1 = crb_gaussian(sc, total)
            if not (crb_d <= crb_2 * (1 + 1e-12) and crb_2 <= crb_1 * (1 + 1e-12)):
                raise AssertionError("bound ordering violated")

    def check_design():
        cfg = HarnessConfig()
        rng = np.random.default_rng(4)
        for _ in range(5):
            gamma0 = float(rng.uniform(0.5, 50.0))
            sc = cfg.scenario(gamma0=gamma0)
            r = solve_p2(sc)
            a = sc.steering_dod()
            bound = dual_bound_cov([np.outer(a.conj(), a)], sc.h, gamma0, sc.sigma_c2, sc.p_max)
            val = tx_quadform(sc, r)
            if not val >= bound * (1 - 1e-6):
                raise AssertionError("single-beam design does not certify against its dual bound")
        sc = cfg.scenario(gamma0=12.0)
        _, trace = solve_p4(sc)
        if any(b < a_ for a_, b in zip(trace.objectives, trace.objectives[1:])):
            raise AssertionError("ascent sequence decreased")

    def check_determinism():
        cfg = desk_scale(HarnessConfig())
        spec = SweepSpec(axis="sensing_snr_db", values=[15.0], schemes=("gaussian",),
                         trials=5, seed=7)
        one = json.dumps(json_payload(run_mse_sweep(spec, cfg, workers=1)), sort_keys=True)
        two = json.dumps(json_payload(run_mse_sweep(spec, cfg, workers=2)), sort_keys=True)
        if one != two:
            raise AssertionError("sweep output depends on worker count")

    return [
        ("steering identities", check_steering),
        ("information matrix vs oracle", check_fim),
        ("bound ordering", check_ordering),
        ("covariance design vs dual bound", check_design),
        ("sweep determinism", check_determinism),
    ]


def _cmd_selftest(_args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # report every failed check, keep going
            failures += 1
            print(f"FAIL - {name}: {exc}")
        else:
            print(f"ok - {name}")
    if failures:
        _diagnostic("numerical", f"{failures} self check(s) failed")
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bisac",
        description="Bounds, estimators, and transmit designs for bistatic "
        "sensing-plus-communication scenes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_workers=False, formats=("csv", "json")):
        p.add_argument("--config", metavar="PATH", help="TOML config file (default: built-in preset)")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
        p.add_argument("--heavy", action="store_true",
                       help="run Monte Carlo at the full configured scale")
        if with_workers:
            p.add_argument("--workers", type=int, help="process pool size (default 1)")

    add_common(sub.add_parser("crb-sweep", help="bound sweep over power, SNR, or distance"))
    add_common(sub.add_parser("mse-sweep", help="Monte Carlo MSE next to the bound"),
               with_workers=True)
    add_common(sub.add_parser("tradeoff", help="bound-vs-rate boundary for all designs"))
    add_common(sub.add_parser("estimate", help="one synthesize/receive/estimate round trip"),
               formats=("json",))
    sub.add_parser("selftest", help="fast internal consistency checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "workers"):
        args.workers = None
    try:
        if args.command == "crb-sweep":
            return _cmd_sweep("crb-sweep", args)
        if args.command == "mse-sweep":
            return _cmd_sweep("mse-sweep", args)
        if args.command == "tradeoff":
            return _cmd_sweep("tradeoff", args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        return _cmd_selftest(args)
    except ConfigError as exc:
        _diagnostic("config", str(exc))
        return EXIT_CONFIG
    except NumericalError as exc:
        _diagnostic("numerical", str(exc))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
