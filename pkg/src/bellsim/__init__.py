"""Monte Carlo simulation and analysis toolkit for Bell-CHSH experiments.

Quantum (singlet) and local-hidden-variable trial generators, a detector
model with losses and dark counts, fair-sampling and all-events CHSH
estimators with error propagation, and lightcone audits of experiment
geometry.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config, load_preset, parse_config
from .core import (
    JointOutcomeDistribution,
    SettingsPair,
    chsh_max_grouping,
    chsh_value,
    ideal_correlator,
    singlet_joint_probabilities,
)
from .errors import BellsimError, ConfigError, GeometryError, LogParseError, NoDataError
from .estimators import (
    ChshReport,
    CorrelatorEstimate,
    CountsTable,
    chsh_report,
    fair_sampling_correlator,
    inclusive_correlator,
    no_signaling_max_sigma,
    tabulate,
)
from .lhv import (
    DeterministicStrategy,
    GisinGisinModel,
    enumerate_deterministic_chsh_bound,
    sample_deterministic_trial,
    sample_lhv_trial,
)
from .sim import (
    EventLog,
    TrialRecord,
    read_event_log,
    resolve_detection,
    run_experiment,
    write_event_log,
)
from .spacetime import (
    CausalVerdict,
    SpacetimeEvent,
    StationTimeline,
    classify_interval,
    lightcone_audit,
    load_geometry,
)

__all__ = [
    "BellsimError",
    "ChshReport",
    "CausalVerdict",
    "ConfigError",
    "CorrelatorEstimate",
    "CountsTable",
    "DeterministicStrategy",
    "EventLog",
    "ExperimentConfig",
    "GeometryError",
    "GisinGisinModel",
    "JointOutcomeDistribution",
    "LogParseError",
    "NoDataError",
    "SettingsPair",
    "SpacetimeEvent",
    "StationTimeline",
    "TrialRecord",
    "chsh_max_grouping",
    "chsh_report",
    "chsh_value",
    "classify_interval",
    "enumerate_deterministic_chsh_bound",
    "fair_sampling_correlator",
    "ideal_correlator",
    "inclusive_correlator",
    "lightcone_audit",
    "load_config",
    "load_geometry",
    "load_preset",
    "no_signaling_max_sigma",
    "parse_config",
    "read_event_log",
    "resolve_detection",
    "run_experiment",
    "sample_deterministic_trial",
    "sample_lhv_trial",
    "singlet_joint_probabilities",
    "tabulate",
    "write_event_log",
]
