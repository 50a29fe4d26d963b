"""HAP-to-UAV assignment simulator.

Stable matching of UAV relays to high-altitude platforms under link-budget
preferences, with a random-assignment baseline and a Monte Carlo harness.
"""

from .channel import (
    ChannelParams,
    PathLossMatrix,
    basic_path_loss,
    build_path_loss_matrix,
    fspl,
    sample_shadow_fading,
    total_path_loss,
)
from .errors import ConfigError, StabilityError
from .geo import GeoPoint, Hap, Scenario, Uav, distance_3d, load_scenario, save_scenario
from .harness import (
    ExperimentConfig,
    TrialResult,
    default_config,
    derive_trial_seed,
    load_experiment_config,
    run_experiment,
    run_trial,
)
from .matching import (
    BlockingPair,
    BlockingReason,
    Matching,
    enumerate_stable_matchings,
    find_blocking_pairs,
    gale_shapley,
    is_stable,
    random_matching,
)
from .preferences import (
    PreferenceProfile,
    ScoreReport,
    build_preferences,
    hap_preference_key,
    score_matching,
)
from .scenario import ScenarioConfig, generate_scenario

__version__ = "0.1.0"

__all__ = [
    "BlockingPair",
    "BlockingReason",
    "ChannelParams",
    "ConfigError",
    "ExperimentConfig",
    "GeoPoint",
    "Hap",
    "Matching",
    "PathLossMatrix",
    "PreferenceProfile",
    "Scenario",
    "ScenarioConfig",
    "ScoreReport",
    "StabilityError",
    "TrialResult",
    "Uav",
    "basic_path_loss",
    "build_path_loss_matrix",
    "build_preferences",
    "default_config",
    "derive_trial_seed",
    "distance_3d",
    "enumerate_stable_matchings",
    "find_blocking_pairs",
    "fspl",
    "gale_shapley",
    "generate_scenario",
    "hap_preference_key",
    "is_stable",
    "load_experiment_config",
    "load_scenario",
    "random_matching",
    "run_experiment",
    "run_trial",
    "sample_shadow_fading",
    "save_scenario",
    "score_matching",
    "total_path_loss",
]
