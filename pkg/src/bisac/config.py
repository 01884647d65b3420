"""Preset values and TOML configuration for the sweep harness.

All unit conversions happen at this boundary: powers enter in dBm and leave
as watts, angles enter in degrees and leave as radians. Everything below this
module works in SI units and radians.
"""

from __future__ import annotations

import dataclasses
import math
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # 3.10 ships without a stdlib TOML parser
    import tomli as tomllib

from .channel import PathLossModel, Scenario, db_to_lin, path_loss, rician_cu_channel
from .ula import UlaConfig

# Monte Carlo scale used when --heavy is not given: small enough that a full
# mse sweep stays interactive, large enough that the estimators still sit on
# their asymptotic branch.
DESK_M = 8
DESK_T = 64


class ConfigError(ValueError):
    """Raised when a configuration file fails to parse or validate."""


@dataclasses.dataclass(frozen=True)
class HarnessConfig:
    """Scenario plus path-loss settings with presentation-layer units.

    The default values describe the shipped "default" preset: a 32x32
    half-wavelength array pair, 30 dBm transmit power, -80 dBm noise floors,
    1024-symbol blocks, broadside target, and a Rician user channel drawn
    once per master seed. The target's power gain is not taken from the
    path-loss product (which at these distances would bury the echo); it is
    calibrated so that the full-power sensing SNR at ``cal_power_dbm`` equals
    ``sensing_snr_cal_db``, and the path-loss exponent then only shapes the
    distance sweep.
    """

    m_tx: int = 32
    m_rx: int = 32
    element_spacing_m: float = 0.05
    wavelength_m: float = 0.1
    power_dbm: float = 30.0
    noise_comm_dbm: float = -80.0
    noise_sense_dbm: float = -80.0
    t_symbols: int = 1024
    theta_deg: float = 0.0
    phi_deg: float = 0.0
    cu_los_deg: float = 30.0
    rician_k: float = 1.0
    k0_db: float = -30.0
    d0_m: float = 1.0
    pl_exponent: float = 2.5
    bs_target_m: float = 200.0
    target_rx_m: float = 200.0
    bs_cu_m: float = 1000.0
    sensing_snr_cal_db: float = 10.6
    cal_power_dbm: float = 30.0
    seed: int = 1234

    def __post_init__(self):
        if self.m_tx < 2 or self.m_rx < 2:
            raise ConfigError("m_tx and m_rx must be at least 2")
        if self.m_tx % 2 or self.m_rx % 2:
            raise ConfigError("m_tx and m_rx must be even (midpoint-referenced arrays)")
        if self.t_symbols < 1:
            raise ConfigError("t_symbols must be positive")
        for field in ("element_spacing_m", "wavelength_m", "d0_m", "bs_target_m",
                      "target_rx_m", "bs_cu_m"):
            if not getattr(self, field) > 0.0:
                raise ConfigError(f"{field} must be positive")
        if not -90.0 < self.theta_deg < 90.0 or not -90.0 < self.phi_deg < 90.0:
            raise ConfigError("theta_deg and phi_deg must lie in (-90, 90)")
        if self.rician_k < 0.0:
            raise ConfigError("rician_k must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in a u64")

    def ula(self) -> UlaConfig:
        return UlaConfig(
            m_tx=self.m_tx,
            m_rx=self.m_rx,
            spacing=self.element_spacing_m,
            wavelength=self.wavelength_m,
        )

    def power_w(self) -> float:
        return db_to_lin(self.power_dbm - 30.0)

    def sigma_c2(self) -> float:
        return db_to_lin(self.noise_comm_dbm - 30.0)

    def sigma_s2(self) -> float:
        return db_to_lin(self.noise_sense_dbm - 30.0)

    def pathloss(self) -> PathLossModel:
        return PathLossModel(k0_db=self.k0_db, d0=self.d0_m, exponent=self.pl_exponent)

    def alpha2_reference(self) -> float:
        """Target power gain |alpha|^2 at the reference geometry.

        Pinned so that the sensing SNR of a full-power transmit beam aimed at
        the target equals sensing_snr_cal_db when transmitting cal_power_dbm:
        gamma = |alpha|^2 p m_tx m_rx / sigma_s^2.
        """
        p_cal = db_to_lin(self.cal_power_dbm - 30.0)
        return db_to_lin(self.sensing_snr_cal_db) * self.sigma_s2() / (
            p_cal * self.m_tx * self.m_rx
        )

    def alpha2_at_distance(self, d_tr_m: float) -> float:
        """Gain when the target-receiver leg moves; reference leg stays fixed."""
        if not d_tr_m > 0.0:
            raise ConfigError("distance must be positive")
        return self.alpha2_reference() * (d_tr_m / self.target_rx_m) ** (-self.pl_exponent)

    def cu_channel(self) -> np.ndarray:
        """The user's channel draw: fixed once per master seed."""
        gain = path_loss(self.pathloss(), self.bs_cu_m)
        return rician_cu_channel(
            self.ula(),
            los_angle=math.radians(self.cu_los_deg),
            k_factor=self.rician_k,
            gain=gain,
            seed=np.random.default_rng([self.seed]),
        )

    def scenario(
        self,
        gamma0: float = 0.0,
        power_w: float | None = None,
        alpha2: float | None = None,
    ) -> Scenario:
        """Materialize a Scenario in SI units.

        Args:
            gamma0: user SINR threshold (linear), 0 disables the constraint.
            power_w: overrides the configured transmit power (watts).
            alpha2: overrides the calibrated target power gain.
        """
        a2 = self.alpha2_reference() if alpha2 is None else alpha2
        return Scenario(
            ula=self.ula(),
            theta=math.radians(self.theta_deg),
            phi=math.radians(self.phi_deg),
            alpha=math.sqrt(a2),
            h=self.cu_channel(),
            p_max=self.power_w() if power_w is None else power_w,
            sigma_c2=self.sigma_c2(),
            sigma_s2=self.sigma_s2(),
            t_symbols=self.t_symbols,
            gamma0=gamma0,
        )


def desk_scale(cfg: HarnessConfig) -> HarnessConfig:
    """Shrink arrays and block length to the fast Monte Carlo scale."""
    return dataclasses.replace(cfg, m_tx=DESK_M, m_rx=DESK_M, t_symbols=DESK_T)


@dataclasses.dataclass(frozen=True)
class EstimateConfig:
    """Settings for a single end-to-end estimation run."""

    model: str = "superposed"
    det_fraction: float = 0.1
    emit_curve: bool = False

    def __post_init__(self):
        if self.model not in ("gaussian", "superposed", "deterministic"):
            raise ConfigError(f"unknown estimate model {self.model!r}")
        if not 0.0 <= self.det_fraction <= 1.0:
            raise ConfigError("det_fraction must lie in [0, 1]")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs: scenario settings plus raw sweep table."""

    harness: HarnessConfig
    sweep: dict
    estimate: EstimateConfig


_PATHLOSS_KEYS = {"k0_db", "d0_m", "exponent", "bs_target_m", "target_rx_m", "bs_cu_m"}
_PATHLOSS_ALIASES = {"exponent": "pl_exponent"}
_SCENARIO_KEYS = (
    {f.name for f in dataclasses.fields(HarnessConfig)}
    - {"seed"}
    - {_PATHLOSS_ALIASES.get(k, k) for k in _PATHLOSS_KEYS}
)
_SWEEP_KEYS = {
    "axis", "values", "start", "stop", "count", "schemes", "trials",
    "det_fraction", "workers",
}
_ESTIMATE_KEYS = {f.name for f in dataclasses.fields(EstimateConfig)}


_INT_FIELDS = {"m_tx", "m_rx", "t_symbols", "seed", "count", "trials", "workers"}


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")


def _check_numbers(table: dict, where: str, skip: tuple = ()) -> dict:
    """Reject values whose TOML type cannot map onto the target field."""
    for key, val in table.items():
        if key in skip:
            continue
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"[{where}] {key}: expected a number, got {type(val).__name__}")
        if key in _INT_FIELDS and not isinstance(val, int):
            raise ConfigError(f"[{where}] {key}: expected an integer")
    return dict(table)


def default_config() -> RunConfig:
    return RunConfig(harness=HarnessConfig(), sweep={}, estimate=EstimateConfig())


def load_config(path: str | None) -> RunConfig:
    """Parse a TOML config file; None returns the shipped preset.

    Layout: top-level ``seed``, a ``[scenario]`` table whose keys mirror
    HarnessConfig, a ``[pathloss]`` table folded into the same dataclass,
    a ``[sweep]`` table kept raw (the subcommand applies its own defaults),
    and an ``[estimate]`` table.

    Raises:
        ConfigError: on unreadable files, TOML syntax errors, unknown keys,
            or values that fail validation.
    """
    if path is None:
        return default_config()
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc

    _check_keys(raw, {"seed", "scenario", "pathloss", "sweep", "estimate"}, "top level")
    scenario = raw.get("scenario", {})
    pathloss = raw.get("pathloss", {})
    _check_keys(scenario, _SCENARIO_KEYS, "scenario")
    _check_keys(pathloss, _PATHLOSS_KEYS, "pathloss")
    _check_numbers(scenario, "scenario")
    _check_numbers(pathloss, "pathloss")
    fields = dict(scenario)
    fields.update({_PATHLOSS_ALIASES.get(k, k): v for k, v in pathloss.items()})
    if "seed" in raw:
        if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool):
            raise ConfigError("seed must be an integer")
        fields["seed"] = raw["seed"]
    harness = HarnessConfig(**fields)

    sweep = raw.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    _check_numbers(sweep, "sweep", skip=("axis", "values", "schemes"))

    est_table = raw.get("estimate", {})
    _check_keys(est_table, _ESTIMATE_KEYS, "estimate")
    if "model" in est_table and not isinstance(est_table["model"], str):
        raise ConfigError("[estimate] model: expected a string")
    if "emit_curve" in est_table and not isinstance(est_table["emit_curve"], bool):
        raise ConfigError("[estimate] emit_curve: expected a boolean")
    if "det_fraction" in est_table:
        _check_numbers({"det_fraction": est_table["det_fraction"]}, "estimate")
    estimate = EstimateConfig(**est_table)
    return RunConfig(harness=harness, sweep=sweep, estimate=estimate)


def config_echo(cfg: HarnessConfig) -> dict:
    """Plain-dict rendering of the active settings for output metadata."""
    return dataclasses.asdict(cfg)
