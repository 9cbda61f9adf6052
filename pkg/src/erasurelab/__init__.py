"""Feedback-controlled single-bit erasure in a duty-ratio-tilted bistable trap.

Simulates a Brownian particle in a time-multiplexed two-well optical trap,
runs measurement-feedback erasure protocols with a noisy sensor, accounts
the stochastic switch work, and checks the information-thermodynamic
ledger: the quasistatic feedback work may undercut the Landauer limit by
exactly the measurement mutual information.
"""

from .analysis import (
    DeficitReport,
    EnsembleStats,
    FitResult,
    WorkHistogram,
    aggregate,
    deficit_report,
    fit_work_model,
    work_histogram,
    work_regressor,
)
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .dynamics import (
    DutySchedule,
    EscapeError,
    SimConfig,
    Trajectory,
    multiplex_r,
    simulate_trajectory,
    stationary_stats,
    step_em,
    stream,
)
from .energetics import (
    LN2,
    LedgerReport,
    feedback_bound,
    glb,
    ledger_check,
    switch_work,
)
from .measurement import (
    ACT,
    NO_ACTION,
    ErasureProbability,
    MIEstimate,
    MixtureModel,
    SensorModel,
    decide_action,
    draw_mixture_pairs,
    erasure_prob_analytic,
    mi_monte_carlo,
    mi_quadrature,
    sample_measurement,
)
from .potential import (
    PotentialCurve,
    PotentialParams,
    bistable_energy,
    bistable_force,
    effective_energy,
    effective_force,
    reconstruct_potential,
    single_well_energy,
)
from .protocol import (
    FEEDBACK,
    INIT_LEFT,
    INIT_RANDOM,
    INIT_RIGHT,
    OPEN_LOOP,
    ErasureRun,
    ProtocolSchedule,
    classify_outcome,
    run_ensemble,
    run_feedback_erasure,
    run_openloop_erasure,
    tau_for_duty,
)
from .units import KB, kbt

__version__ = "0.1.0"
