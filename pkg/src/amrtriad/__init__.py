"""Resistance-reversal model of plasmid-borne antimicrobial resistance.

Deterministic (RK4), stochastic (Euler-Maruyama) and Caputo fractional
(Adams-Bashforth-Moulton) solvers, threshold and equilibrium formulas,
trajectory analysis, and a scenario runner with CSV/SVG output.
"""

__version__ = "0.1.0"

from .analysis import (
    Histogram,
    Outcome,
    OutcomeKind,
    band_entry_time,
    classify_outcome,
    level_crossings,
    log_slope,
    stationary_histogram,
    time_to_band,
)
from .config import ConfigError, ScenarioConfig, load_config, parse_config, serialize_config
from .fde import CaputoProblem, integrate_caputo, mittag_leffler, solve_caputo
from .grid import Engine, TimeGrid, Trajectory
from .model import (
    DomainError,
    ModelError,
    ModelParams,
    NoEquilibriumError,
    ParameterError,
    Regime,
    ThresholdReport,
    compute_thresholds,
    diffusion,
    drift,
    equilibrium_deterministic,
    equilibrium_stochastic,
    functional_response,
    lyapunov_sV,
    persistence_level_eta,
)
from .ode import StepSizeError, integrate_euler, integrate_ode, step_rk4
from .presets import PRESET_NAMES, preset
from .runner import ScenarioError, run_scenario
from .sde import (
    EnsembleResult,
    IncrementRule,
    NoisePlan,
    simulate_ensemble,
    simulate_path,
)

__all__ = [name for name in dir() if not name.startswith("_")]
