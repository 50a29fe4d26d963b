"""Monte Carlo experiment harness.

A trial generates a random topology, draws one path-loss matrix, solves it
twice (deferred acceptance and the random baseline) and scores both against
the same matrix. Sweeps repeat this over growing network sizes with many
trials per point and write a results CSV plus an aggregate summary.

Seeding is hierarchical so runs are reproducible and trials independent:

    counter    = point_index * 2**32 + trial_index
    trial_seed = mix64(master_seed XOR mix64(counter))

with mix64 the SplitMix64 finalizer. Adding sweep points or trials never
changes the seed of an existing trial. Inside a trial, independent
substreams (scenario, channel, baseline) are split off the trial seed with
the SplitMix64 sequence step.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TextIO

import numpy as np

from .channel import ChannelParams, build_path_loss_matrix
from .errors import ConfigError, StabilityError
from .geo import MAX_SEED, Scenario
from .matching import Matching, TraceFn, find_blocking_pairs, gale_shapley, random_matching
from .preferences import DEFAULT_USER_WEIGHT_DB_PER_USER, build_preferences, score_matching
from .scenario import ScenarioConfig, generate_scenario

RESULTS_CSV_HEADER = ("sweep_point,n_haps,m_uavs,trial,gs_mean_score,"
                      "random_mean_score,score_gap,gs_matched,"
                      "gs_runtime_ms,random_runtime_ms")
RESULTS_FILENAME = "results.csv"
SUMMARY_FILENAME = "summary.json"

DEFAULT_TRIALS_PER_POINT = 30
DEFAULT_MASTER_SEED = 1729
DEFAULT_SWEEP_HAP_COUNTS = (100, 200, 300, 400, 500)
DEFAULT_UAVS_PER_HAP = 5

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

_SCENARIO_STREAM = 0
_CHANNEL_STREAM = 1
_BASELINE_STREAM = 2


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective hash."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Seed of one trial: the (point, trial) counter hashed against the master."""
    if not (0 <= trial_index < 1 << 32):
        raise ValueError(f"trial_index out of range: {trial_index}")
    counter = (point_index << 32) + trial_index
    return mix64(master_seed ^ mix64(counter))


def substream_seed(seed: int, stream: int) -> int:
    """The stream-th child seed of `seed` (SplitMix64 sequence step)."""
    return mix64((seed + (stream + 1) * _SPLITMIX_GAMMA) & _MASK64)


def channel_seed_for_scenario(scenario_seed: int) -> int:
    """Channel substream used when a scenario's own seed drives a trial.

    The pathloss and verify commands rebuild a scenario's loss matrix from
    this seed, so their view of the channel is reproducible from the
    scenario file alone.
    """
    return substream_seed(scenario_seed, _CHANNEL_STREAM)


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one trial: both algorithms scored on the same instance."""

    sweep_point: int
    trial_index: int
    n_haps: int
    m_uavs: int
    gs_mean_score: float
    random_mean_score: float
    score_gap: float
    gs_matched_count: int
    gs_runtime_ms: float
    random_runtime_ms: float


@dataclass(frozen=True)
class ExperimentConfig:
    """A full sweep: scenario sizes, channel constants and trial counts.

    Sweep points must grow strictly in (n_haps, m_uavs). The seed fields of
    the sweep's ScenarioConfigs are ignored: each trial regenerates its
    topology from a seed derived from master_seed.
    """

    sweep: tuple[ScenarioConfig, ...]
    channel: ChannelParams = ChannelParams()
    user_weight_db_per_user: float = DEFAULT_USER_WEIGHT_DB_PER_USER
    trials_per_point: int = DEFAULT_TRIALS_PER_POINT
    master_seed: int = DEFAULT_MASTER_SEED
    output_path: str = "results"
    record_runtimes: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple(self.sweep))
        bad = []
        if not self.sweep:
            bad.append("sweep must contain at least one point")
        for a, b in zip(self.sweep, self.sweep[1:]):
            if not (a.n_haps, a.m_uavs) < (b.n_haps, b.m_uavs):
                bad.append(
                    "sweep points must be strictly increasing in "
                    f"(n_haps, m_uavs): ({a.n_haps}, {a.m_uavs}) then "
                    f"({b.n_haps}, {b.m_uavs})"
                )
        if self.trials_per_point < 1:
            bad.append(f"trials_per_point must be >= 1, got {self.trials_per_point}")
        if not self.user_weight_db_per_user >= 0:
            bad.append(
                f"user_weight_db_per_user must be >= 0, got {self.user_weight_db_per_user}"
            )
        if not (0 <= self.master_seed <= MAX_SEED):
            bad.append(f"master_seed must be an unsigned 64-bit int, got {self.master_seed}")
        if not self.output_path:
            bad.append("output_path must be non-empty")
        if bad:
            raise ConfigError("invalid experiment config: " + "; ".join(bad))


def default_config(output_path: str = "results") -> ExperimentConfig:
    """The standard sweep: 100..500 HAPs, five UAVs per HAP, capacity 5."""
    sweep = tuple(
        ScenarioConfig(n_haps=n, m_uavs=DEFAULT_UAVS_PER_HAP * n)
        for n in DEFAULT_SWEEP_HAP_COUNTS
    )
    return ExperimentConfig(sweep=sweep, output_path=output_path)


def run_trial(scenario: Scenario, channel: ChannelParams, user_weight: float,
              trial_seed: int, sweep_point: int = 0, trial_index: int = 0,
              on_event: TraceFn | None = None) -> TrialResult:
    """Run both algorithms once on a shared instance and score them.

    One path-loss matrix is drawn from the trial seed's channel substream
    and used for preferences, for both matchings and for both scores, so the
    two algorithms see the identical instance. The baseline's randomness
    comes from a separate substream. The deferred-acceptance result is
    verified stable; a blocking pair here is a defect, reported together
    with the trial seed.
    """
    capacities = [h.capacity for h in scenario.haps]
    served_users = [u.served_users for u in scenario.uavs]

    channel_rng = np.random.default_rng(substream_seed(trial_seed, _CHANNEL_STREAM))
    matrix = build_path_loss_matrix(scenario, channel, channel_rng)
    profile = build_preferences(matrix, served_users, user_weight)

    t0 = time.perf_counter()
    gs = gale_shapley(profile, capacities, on_event=on_event)
    gs_ms = (time.perf_counter() - t0) * 1e3

    baseline_rng = np.random.default_rng(substream_seed(trial_seed, _BASELINE_STREAM))
    t0 = time.perf_counter()
    baseline = random_matching(baseline_rng, scenario.n_haps, capacities,
                               scenario.m_uavs)
    baseline_ms = (time.perf_counter() - t0) * 1e3

    blocking = find_blocking_pairs(gs, profile, capacities)
    if blocking:
        raise StabilityError(
            f"deferred acceptance produced {len(blocking)} blocking pair(s) "
            f"on trial seed {trial_seed}; first: {blocking[0]}",
            trial_seed=trial_seed,
        )

    gs_report = score_matching(gs, matrix, served_users, user_weight)
    baseline_report = score_matching(baseline, matrix, served_users, user_weight)
    if gs_report.mean_score is None or baseline_report.mean_score is None:
        raise StabilityError(
            f"empty matching on a non-empty instance (trial seed {trial_seed})",
            trial_seed=trial_seed,
        )
    return TrialResult(
        sweep_point=sweep_point,
        trial_index=trial_index,
        n_haps=scenario.n_haps,
        m_uavs=scenario.m_uavs,
        gs_mean_score=gs_report.mean_score,
        random_mean_score=baseline_report.mean_score,
        score_gap=baseline_report.mean_score - gs_report.mean_score,
        gs_matched_count=gs_report.matched_count,
        gs_runtime_ms=gs_ms,
        random_runtime_ms=baseline_ms,
    )


def format_result_row(result: TrialResult, record_runtimes: bool) -> str:
    """One CSV data row. Runtimes print as zero unless requested.

    Runtime columns are wall-clock measurements and vary from run to run;
    zeroing them keeps the results file byte-for-byte reproducible, which
    the experiment promises by default.
    """
    gs_ms = result.gs_runtime_ms if record_runtimes else 0.0
    rnd_ms = result.random_runtime_ms if record_runtimes else 0.0
    return (f"{result.sweep_point},{result.n_haps},{result.m_uavs},"
            f"{result.trial_index},{result.gs_mean_score:.6f},"
            f"{result.random_mean_score:.6f},{result.score_gap:.6f},"
            f"{result.gs_matched_count},{gs_ms:.6f},{rnd_ms:.6f}")


def _point_stats(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {
        "mean": float(arr.mean()),
        "std": std,
        "stderr": std / float(np.sqrt(arr.size)),
    }


def summarize(results: list[TrialResult], config: ExperimentConfig) -> dict:
    """Aggregate per-point statistics of a finished run."""
    points = []
    for p, scfg in enumerate(config.sweep):
        rows = [r for r in results if r.sweep_point == p]
        entry = {
            "sweep_point": p,
            "n_haps": scfg.n_haps,
            "m_uavs": scfg.m_uavs,
            "trials": len(rows),
            "gs_mean_score": _point_stats([r.gs_mean_score for r in rows]),
            "random_mean_score": _point_stats([r.random_mean_score for r in rows]),
            "score_gap": _point_stats([r.score_gap for r in rows]),
        }
        if config.record_runtimes:
            entry["runtime_ms"] = {
                "gs_mean": float(np.mean([r.gs_runtime_ms for r in rows])),
                "random_mean": float(np.mean([r.random_runtime_ms for r in rows])),
            }
        points.append(entry)
    return {
        "trials_per_point": config.trials_per_point,
        "user_weight_db_per_user": config.user_weight_db_per_user,
        "master_seed": config.master_seed,
        "carrier_freq_ghz": config.channel.carrier_freq_ghz,
        "points": points,
        "notes": [
            "trials_per_point is a configurable default, not a calibrated value",
            "score_gap = random_mean_score - gs_mean_score; positive favors deferred acceptance",
        ],
    }


def run_experiment(config: ExperimentConfig,
                   on_event: TraceFn | None = None,
                   progress: TextIO | None = None) -> list[TrialResult]:
    """Execute every sweep point and write results.csv plus summary.json.

    The output directory is created (and the CSV opened) before any trial
    runs, so an unwritable path fails immediately. Rows are written in
    (sweep_point, trial) order.

    Returns the per-trial results in the same order as the CSV rows.
    """
    out_dir = Path(config.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[TrialResult] = []
    csv_path = out_dir / RESULTS_FILENAME
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RESULTS_CSV_HEADER + "\n")
        for p, scfg in enumerate(config.sweep):
            for t in range(config.trials_per_point):
                trial_seed = derive_trial_seed(config.master_seed, p, t)
                scenario = generate_scenario(
                    replace(scfg, seed=substream_seed(trial_seed, _SCENARIO_STREAM))
                )
                if on_event is not None:
                    on_event(f"# point={p} trial={t} seed={trial_seed}")
                result = run_trial(scenario, config.channel,
                                   config.user_weight_db_per_user, trial_seed,
                                   sweep_point=p, trial_index=t,
                                   on_event=on_event)
                results.append(result)
                fh.write(format_result_row(result, config.record_runtimes) + "\n")
            if progress is not None:
                print(f"point {p} ({scfg.n_haps} HAPs, {scfg.m_uavs} UAVs): "
                      f"{config.trials_per_point} trials done", file=progress)
    with open(out_dir / SUMMARY_FILENAME, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summarize(results, config), fh, indent=2)
        fh.write("\n")
    return results


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}")


def _parse_scenario_section(obj: dict, where: str = "scenario") -> ScenarioConfig:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = {"n_haps", "m_uavs", "hap_capacity", "area_side_km",
               "hap_alt_range_km", "uav_alt_range_km", "users_range", "seed"}
    _reject_unknown(obj, allowed, where)
    for required in ("n_haps", "m_uavs"):
        if required not in obj:
            raise ConfigError(f"{where}: missing required field '{required}'")
    try:
        return ScenarioConfig(**{k: tuple(v) if isinstance(v, list) else v
                                 for k, v in obj.items()})
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_channel_params(obj: dict, where: str = "channel") -> ChannelParams:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = {"carrier_freq_ghz", "atmospheric_loss_db", "scintillation_loss_db",
               "clutter_loss_db", "shadow_fading_variance_db2", "elevation_angle_deg"}
    _reject_unknown(obj, allowed, where)
    try:
        return ChannelParams(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_experiment_config(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config tree.

    The tree has sections `scenario` (one object or a list, the sweep),
    `channel` and `experiment`; missing sections fall back to defaults.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config file: top level must be an object")
    _reject_unknown(doc, {"scenario", "channel", "experiment"}, "config file")
    if "scenario" not in doc:
        raise ConfigError("config file: missing required section 'scenario'")
    raw_scenario = doc["scenario"]
    if isinstance(raw_scenario, list):
        sweep = tuple(_parse_scenario_section(entry, f"scenario[{i}]")
                      for i, entry in enumerate(raw_scenario))
    else:
        sweep = (_parse_scenario_section(raw_scenario),)
    channel = parse_channel_params(doc.get("channel", {}))
    exp = doc.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("experiment must be an object")
    allowed = {"user_weight_db_per_user", "trials_per_point", "master_seed",
               "output_path", "record_runtimes"}
    _reject_unknown(exp, allowed, "experiment")
    try:
        return ExperimentConfig(sweep=sweep, channel=channel, **exp)
    except TypeError as exc:
        raise ConfigError(f"experiment: {exc}") from exc


def load_experiment_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
    return parse_experiment_config(doc)


def load_scenario_config(path: str) -> ScenarioConfig:
    """Read a generator config: either a bare object or a `scenario` section."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
    if isinstance(doc, dict) and "scenario" in doc:
        doc = doc["scenario"]
        if isinstance(doc, list):
            raise ConfigError("scenario generation needs a single scenario object")
    return _parse_scenario_section(doc if isinstance(doc, dict) else {})


def load_channel_file(path: str) -> ChannelParams:
    """Read channel params: either a bare object or a `channel` section."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"params file {path}: invalid JSON ({exc})") from exc
    if isinstance(doc, dict) and "channel" in doc:
        doc = doc["channel"]
    return parse_channel_params(doc if isinstance(doc, dict) else {})


def save_matching(matching: Matching, path: str) -> None:
    doc = {
        "n_haps": matching.n_haps,
        "m_uavs": matching.m_uavs,
        "matches": [{"uav": u, "hap": h} for h, u in matching.pairs()],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_matching(path: str) -> Matching:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"matching file {path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError("matching file: top level must be an object")
    for required in ("n_haps", "m_uavs", "matches"):
        if required not in doc:
            raise ConfigError(f"matching file: missing field '{required}'")
    uav_to_hap = [-1] * int(doc["m_uavs"])
    try:
        for entry in doc["matches"]:
            u, h = int(entry["uav"]), int(entry["hap"])
            if not (0 <= u < len(uav_to_hap)):
                raise ConfigError(f"matching file: uav id {u} out of range")
            if uav_to_hap[u] != -1:
                raise ConfigError(f"matching file: uav {u} listed twice")
            uav_to_hap[u] = h
        return Matching(uav_to_hap=tuple(uav_to_hap), n_haps=int(doc["n_haps"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"matching file: {exc}") from exc
