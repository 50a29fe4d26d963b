import json
import subprocess
import sys

import numpy as np
import pytest

from hapmatch.channel import ChannelParams, build_path_loss_matrix
from hapmatch.cli import main
from hapmatch.geo import load_scenario
from hapmatch.harness import channel_seed_for_scenario, save_matching
from hapmatch.matching import Matching, gale_shapley
from hapmatch.preferences import build_preferences


@pytest.fixture
def scenario_path(tmp_path):
    config = tmp_path / "scenario_config.json"
    config.write_text(json.dumps(
        {"n_haps": 3, "m_uavs": 9, "hap_capacity": 3, "seed": 42}))
    out = tmp_path / "scenario.json"
    assert main(["gen-scenario", "--config", str(config), "--out", str(out)]) == 0
    return out


def _experiment_config(tmp_path) -> str:
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({
        "scenario": [
            {"n_haps": 2, "m_uavs": 6, "hap_capacity": 3},
            {"n_haps": 3, "m_uavs": 9, "hap_capacity": 3},
        ],
        "experiment": {"trials_per_point": 2, "master_seed": 9,
                       "output_path": str(tmp_path / "default_out")},
    }))
    return str(path)


def test_gen_scenario_writes_valid_file(scenario_path):
    scenario = load_scenario(str(scenario_path))
    assert scenario.n_haps == 3
    assert scenario.m_uavs == 9
    assert scenario.seed == 42


def test_pathloss_matches_library_matrix(scenario_path, tmp_path):
    out = tmp_path / "loss.csv"
    assert main(["pathloss", "--scenario", str(scenario_path),
                 "--out", str(out)]) == 0
    scenario = load_scenario(str(scenario_path))
    matrix = build_path_loss_matrix(
        scenario, ChannelParams(),
        np.random.default_rng(channel_seed_for_scenario(scenario.seed)))
    lines = out.read_text().splitlines()
    assert lines[0] == "hap_id,uav_id,loss_db"
    assert len(lines) == 1 + 3 * 9
    for line in lines[1:]:
        h, u, loss = line.split(",")
        assert loss == f"{matrix.loss_db[int(h), int(u)]:.6f}"


def _stable_matching_file(scenario_path, tmp_path) -> str:
    scenario = load_scenario(str(scenario_path))
    matrix = build_path_loss_matrix(
        scenario, ChannelParams(),
        np.random.default_rng(channel_seed_for_scenario(scenario.seed)))
    profile = build_preferences(matrix, [u.served_users for u in scenario.uavs])
    matching = gale_shapley(profile, [h.capacity for h in scenario.haps])
    path = tmp_path / "matching.json"
    save_matching(matching, str(path))
    return str(path)


def test_verify_accepts_solver_output(scenario_path, tmp_path, capsys):
    matching_file = _stable_matching_file(scenario_path, tmp_path)
    assert main(["verify", "--scenario", str(scenario_path),
                 "--matching", matching_file]) == 0
    assert "stable" in capsys.readouterr().out


def test_verify_rejects_empty_matching(scenario_path, tmp_path, capsys):
    path = tmp_path / "empty.json"
    save_matching(Matching(uav_to_hap=(-1,) * 9, n_haps=3), str(path))
    assert main(["verify", "--scenario", str(scenario_path),
                 "--matching", str(path)]) == 1
    out = capsys.readouterr().out
    assert "unstable" in out
    assert "blocking pair" in out


def test_verify_rejects_size_mismatch(scenario_path, tmp_path):
    path = tmp_path / "wrong_size.json"
    save_matching(Matching(uav_to_hap=(0, 1), n_haps=2), str(path))
    assert main(["verify", "--scenario", str(scenario_path),
                 "--matching", str(path)]) == 2


def test_simulate_writes_outputs_and_plots(tmp_path):
    config = _experiment_config(tmp_path)
    out_dir = tmp_path / "run"
    code = main(["simulate", "--config", config, "--out", str(out_dir),
                 "--plots"])
    assert code == 0
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "scores.png").exists()
    assert (out_dir / "score_gap.png").exists()
    lines = (out_dir / "results.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 2


def test_simulate_trial_and_seed_overrides(tmp_path):
    config = _experiment_config(tmp_path)
    out_dir = tmp_path / "run_override"
    assert main(["simulate", "--config", config, "--out", str(out_dir),
                 "--trials", "1", "--seed", "123"]) == 0
    lines = (out_dir / "results.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 1


def test_simulate_same_seed_is_byte_identical(tmp_path):
    config = _experiment_config(tmp_path)
    assert main(["simulate", "--config", config,
                 "--out", str(tmp_path / "r1")]) == 0
    assert main(["simulate", "--config", config,
                 "--out", str(tmp_path / "r2")]) == 0
    assert ((tmp_path / "r1" / "results.csv").read_bytes()
            == (tmp_path / "r2" / "results.csv").read_bytes())


def test_simulate_trace_log(tmp_path):
    config = _experiment_config(tmp_path)
    out_dir = tmp_path / "run_trace"
    assert main(["simulate", "--config", config, "--out", str(out_dir),
                 "--trace"]) == 0
    trace = (out_dir / "trace.log").read_text().splitlines()
    assert any(line.startswith("PROPOSE") for line in trace)
    assert any(line.startswith("# point=") for line in trace)


def test_report_renders_next_to_csv(tmp_path):
    config = _experiment_config(tmp_path)
    out_dir = tmp_path / "run_report"
    assert main(["simulate", "--config", config, "--out", str(out_dir)]) == 0
    assert main(["report", "--results", str(out_dir / "results.csv")]) == 0
    assert (out_dir / "scores.png").exists()
    assert (out_dir / "score_gap.png").exists()


def test_bad_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"scenario": {"n_haps": 2}}))
    assert main(["simulate", "--config", str(path)]) == 2


def test_missing_input_file_exits_3(tmp_path):
    assert main(["pathloss", "--scenario", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x.csv")]) == 3


def test_stability_assertion_exits_4(tmp_path, monkeypatch):
    import hapmatch.harness as harness

    def fake_find_blocking_pairs(matching, profile, capacities):
        class Fake:
            def __str__(self):
                return "synthetic pair"
        return [Fake()]

    monkeypatch.setattr(harness, "find_blocking_pairs", fake_find_blocking_pairs)
    config = _experiment_config(tmp_path)
    assert main(["simulate", "--config", config,
                 "--out", str(tmp_path / "broken")]) == 4


def test_module_invocation_smoke(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"n_haps": 2, "m_uavs": 4, "seed": 1}))
    out = tmp_path / "scen.json"
    proc = subprocess.run(
        [sys.executable, "-m", "hapmatch", "gen-scenario",
         "--config", str(config), "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
