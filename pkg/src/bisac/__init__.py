"""Bistatic sensing-plus-communication analysis: bounds, estimators, design.

The pipeline mirrors how the pieces are used: `ula`/`channel` describe the
scene, `crb` evaluates estimation bounds for each signaling mode, `estimators`
draws synthetic blocks and runs the grid ML receivers, `beamforming` designs
the transmit covariance split, and `sweeps`/`cli` turn all of it into seeded,
reproducible tables.
"""

__version__ = "0.1.0"

from .beamforming import (
    CovPair,
    ScaOptions,
    ScaTrace,
    inner_solve_p4k,
    mrt_cov,
    solve_p2,
    solve_p3,
    solve_p4,
)
from .channel import (
    PathLossModel,
    Scenario,
    db_to_lin,
    lin_to_db,
    path_loss,
    rician_cu_channel,
    target_gain,
)
from .crb import (
    CrbReport,
    FimGaussian,
    FimSuper,
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
    quadform_real,
    sensing_snr,
    tx_quadform,
)
from .errors import InfeasibleError, NumericalError, UnobservableError
from .estimators import (
    EstimateResult,
    GridSpec,
    RxBlock,
    TxRealization,
    mle_gaussian,
    mle_super,
    receive,
    synth_deterministic,
    synth_gaussian,
    synth_super,
)
from .config import (
    ConfigError,
    EstimateConfig,
    HarnessConfig,
    RunConfig,
    default_config,
    desk_scale,
    load_config,
)
from .sweeps import (
    SweepResult,
    SweepRow,
    SweepSpec,
    json_payload,
    run_crb_sweep,
    run_estimate,
    run_mse_sweep,
    run_tradeoff,
    write_csv,
)
from .ula import (
    UlaConfig,
    element_offsets,
    rx_deriv_norm_sq,
    steering_rx,
    steering_rx_deriv,
    steering_tx,
)

__all__ = [
    "ConfigError",
    "CovPair",
    "CrbReport",
    "EstimateConfig",
    "EstimateResult",
    "FimGaussian",
    "FimSuper",
    "GridSpec",
    "HarnessConfig",
    "InfeasibleError",
    "NumericalError",
    "PathLossModel",
    "RunConfig",
    "RxBlock",
    "ScaOptions",
    "ScaTrace",
    "Scenario",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "TxRealization",
    "UlaConfig",
    "UnobservableError",
    "check_covariance",
    "crb_deterministic",
    "crb_gaussian",
    "crb_min_closed_forms",
    "crb_report",
    "crb_sinr_gaussian_closed",
    "crb_super",
    "db_to_lin",
    "default_config",
    "desk_scale",
    "element_offsets",
    "fim_gaussian",
    "fim_super",
    "fisher_factor",
    "inner_solve_p4k",
    "json_payload",
    "lin_to_db",
    "load_config",
    "mle_gaussian",
    "mle_super",
    "mrt_cov",
    "path_loss",
    "quadform_real",
    "receive",
    "rician_cu_channel",
    "run_crb_sweep",
    "run_estimate",
    "run_mse_sweep",
    "run_tradeoff",
    "rx_deriv_norm_sq",
    "sensing_snr",
    "solve_p2",
    "solve_p3",
    "solve_p4",
    "steering_rx",
    "steering_rx_deriv",
    "steering_tx",
    "synth_deterministic",
    "synth_gaussian",
    "synth_super",
    "target_gain",
    "tx_quadform",
    "write_csv",
    "__version__",
]
