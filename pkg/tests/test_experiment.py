import json

import pytest

from stochsub.cli import main
from stochsub.core import RandomSource
from stochsub.experiment import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    certify_maps_command,
    check_command,
    generate_instance,
    rows_to_csv,
    run_experiment,
)

MATCHING = {"generator": "random-graph-matching", "n_vertices": 6, "edge_prob": 0.7, "weight_range": [1, 10]}


def test_complete_graph_instance():
    D, f = generate_instance({"generator": "random-graph-matching", "n_vertices": 4, "edge_prob": 1.0,
                              "weight_range": [1, 1]}, RandomSource(0))
    assert D.kind == "matching" and D.n == 6
    assert f.value(range(6)) == 6


def test_knapsack_sizes_in_range():
    D, _ = generate_instance({"generator": "random-knapsack", "n": 5, "size_range": [0.4, 0.6]}, RandomSource(1))
    assert all(0.4 <= c <= 0.6 for c in D.sizes)


def test_heavy_fraction():
    D, _ = generate_instance({"generator": "random-knapsack", "n": 10, "heavy_fraction": 0.4}, RandomSource(2))
    assert len(D.heavy()) == 4


def test_same_seed_same_instance():
    spec = {"domain": MATCHING, "objective": {"generator": "random-coverage", "items": 6}}
    a = generate_instance(spec, RandomSource(5).child(1))
    b = generate_instance(spec, RandomSource(5).child(1))
    assert a[0].edges == b[0].edges
    assert a[1].value(range(a[1].n)) == b[1].value(range(b[1].n))


def test_cap_enforced():
    with pytest.raises(ConfigError):
        generate_instance({"generator": "random-knapsack", "n": 23}, RandomSource(0))


def test_fixed_instance_dicts():
    D, f = generate_instance({"domain": {"kind": "cardinality", "n": 3, "r": 1},
                              "objective": {"kind": "linear", "weights": [1, 2, 3]}}, RandomSource(0))
    assert D.n == 3 and f.value({2}) == 3


def test_certain_activation_summary():
    cfg = ExperimentConfig(MATCHING, p=1.0, trials=1, seed=3, threshold=1.0 - 1e-9)
    summary, rows = run_experiment(cfg)
    assert summary.success_probability == 1.0 and rows[0]["ratio"] == 1.0


def test_summary_recomputable_from_rows():
    summary, rows = run_experiment(ExperimentConfig(MATCHING, p=0.5, trials=10, seed=4))
    assert summary.trials == len(rows)
    assert summary.mean_rounds == pytest.approx(sum(r["rounds_used"] for r in rows) / 10)
    assert 0 <= summary.success_probability <= 1


def test_csv_is_deterministic_and_thread_independent():
    cfg = dict(instance=MATCHING, p=0.5, trials=12, seed=2**63 + 5)
    a = rows_to_csv(run_experiment(ExperimentConfig(**cfg))[1])
    b = rows_to_csv(run_experiment(ExperimentConfig(**cfg))[1])
    c = rows_to_csv(run_experiment(ExperimentConfig(**cfg, threads=4))[1])
    assert a == b == c
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)


@pytest.mark.parametrize("bad", [dict(trials=0), dict(strategy="greedy-dance"), dict(format="xml"),
                                 dict(p=0.0), dict(epsilon=1.0), dict(seed=-1)])
def test_invalid_config(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"instance": MATCHING, **bad})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"instance": MATCHING, "tirals": 3})


def test_trivial_map_rows():
    rows = certify_maps_command({"map": "trivial-k-exchange", "instance": MATCHING, "pairs": 20, "p": 0.5})
    assert len(rows) == 20
    for r in rows:
        assert r["violations"] == 0 and r["beta_hat"] <= 1.0
        assert r["alpha_hat"] == (1.0 if r["vacuous"] else 0.5)
        assert r["gain_slack"] >= -1e-9


def test_heavy_map_rows():
    rows = certify_maps_command({"map": "knapsack-heavy", "pairs": 15, "p": 0.5,
                                 "instance": {"generator": "random-knapsack", "n": 6, "size_range": [0.34, 0.6]}})
    for r in rows:
        X, Y = set(r["X"].split()), set(r["Y"].split())
        # nothing to remove means beta is 0; otherwise every x leaves iff R is nonempty
        want = 1 - 0.5 ** len(Y - X) if X - Y else 0.0
        assert r["beta_hat"] == pytest.approx(want, abs=1e-9)


def test_vacuous_rows_flagged():
    rows = certify_maps_command({"map": "matroid-rota", "pairs": 30, "p": 0.3,
                                 "instance": {"generator": "random-partition-matroid", "n": 6}})
    vac = [r for r in rows if r["vacuous"]]
    assert vac and all(r["alpha_hat"] == 1.0 for r in vac)


def test_check_command_passes():
    rows = check_command({"instances": 3, "seed": 1})
    assert rows and all(r["ok"] for r in rows)


def test_cli_run_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instance": MATCHING, "p": 0.5}))
    out = tmp_path / "rows.csv"
    assert main(["run", "--config", str(cfg), "--trials", "4", "--seed", "9", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 5
    assert "success=" in capsys.readouterr().err


def test_cli_json_output(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instance": MATCHING}))
    out = tmp_path / "rows.json"
    assert main(["run", "--config", str(cfg), "--format", "json", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["rows"]) == 1 and "wall_time" not in payload["summary"]


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"instance": {},\n "trials": }')
    assert main(["run", "--config", str(cfg)]) != 0
    assert "cfg.json:2" in capsys.readouterr().err
    cfg.write_text(json.dumps({"instance": MATCHING, "strategy": "nope"}))
    assert main(["run", "--config", str(cfg)]) != 0


def test_cli_certify_and_check(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"map": "trivial-k-exchange", "instance": MATCHING, "p": 0.5}))
    out = tmp_path / "c.csv"
    assert main(["certify", "--config", str(cfg), "--trials", "5", "--out", str(out)]) == 0
    assert out.read_text().startswith("pair,kind,X,Y,alpha_hat,beta_hat,method,samples,radius,vacuous")
    assert main(["check", "--trials", "2", "--out", str(tmp_path / "k.csv")]) == 0
