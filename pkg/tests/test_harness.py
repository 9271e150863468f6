import json

import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigError, EquilibrateError, NumericalError
from src.games.efg import TreeGame
from src.games.nfg import Profile, exploitability
from src.games.random_nfg import random_nfg
from src.harness.config import Algorithm, load_config, parse_config
from src.harness.main import main
from src.harness.oracle import oracle_exploitability, pure_strategies
from src.harness.runner import execute, prepare_game, run
from src.harness.sweep import SUMMARY_COLUMNS, sweep
from src.models.diagnostics import decay_rate, fit_log_decay
from src.models.records import CSV_COLUMNS, ConvergenceRecord, RecordCollector, at_iteration, write_records_csv
from src.visualization.visualize import convergence_svg

RTCFR_KUHN = {
    "name": "rtcfr_plus_kuhn",
    "game": {"kind": "KUHN"},
    "algorithm": "RTCFR_PLUS",
    "mu": 0.5,
    "inner_iterations": 5,
    "outer_iterations": 400,
}


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def _rm_plus_config(seed):
    return {
        "name": f"rm_plus_3x3_seed{seed}",
        "game": {"kind": "RANDOM_NFG", "rows": 3, "cols": 3, "seed": seed},
        "algorithm": "RM_PLUS",
        "total_iterations": 100,
        "seed": seed,
    }


def test_unknown_algorithm_exits_with_config_error(tmp_path, capsys):
    path = _write(tmp_path / "bad.json", {"game": {"kind": "KUHN"}, "algorithm": "SIMPLEX"})
    assert main(["solve", "--config", path]) == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "UNKNOWN_ALGORITHM"


def test_print_config_applies_overrides(tmp_path, capsys):
    path = _write(tmp_path / "kuhn.json", RTCFR_KUHN)
    assert main(["solve", "--config", path, "--print-config", "--mu", "0.25"]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["mu"] == 0.25
    assert echoed["algorithm"] == "RTCFR_PLUS"


def test_solve_writes_outputs(tmp_path):
    path = _write(tmp_path / "kuhn.json", RTCFR_KUHN)
    out = tmp_path / "run"
    assert main(["solve", "--config", path, "--out", str(out), "--eval-every", "100", "--svg"]) == 0
    records = pd.read_csv(out / "records.csv")
    assert list(records.columns) == CSV_COLUMNS
    assert len(records) == 20
    assert records["iteration"].tolist() == list(range(100, 2001, 100))
    assert records["sccp_index"].iloc[-1] == 400
    final = json.loads((out / "final_profile.json").read_text())
    assert final["exploitability"] == pytest.approx(records["exploitability"].iloc[-1])
    assert "0:Jpb" in final["profile"]
    assert (out / "curve.svg").exists()
    assert json.loads((out / "config.json").read_text())["eval_every"] == 100


def test_runs_are_deterministic(tmp_path):
    path = _write(tmp_path / "kuhn.json", RTCFR_KUHN)
    for name in ("a", "b"):
        assert main(["solve", "--config", path, "--out", str(tmp_path / name)]) == 0
    for output in ("records.csv", "final_profile.json"):
        assert (tmp_path / "a" / output).read_bytes() == (tmp_path / "b" / output).read_bytes()


def test_numerical_failure_exits_with_code_3(tmp_path, capsys, monkeypatch):
    def explode(config, out=None, svg=False):
        raise NumericalError("non-finite metric", iteration=5)

    monkeypatch.setattr("src.harness.main.run", explode)
    path = _write(tmp_path / "kuhn.json", RTCFR_KUHN)
    assert main(["solve", "--config", path, "--out", str(tmp_path / "run")]) == 3
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error == {"error": "NUMERICAL_FAILURE", "detail": "non-finite metric", "iteration": 5}


def test_overflowing_step_exits_with_code_3_naming_iteration(tmp_path, capsys):
    config = {
        "game": {"kind": "MATRIX", "payoff": [[1e308, 1e308], [-1e308, -1e308]]},
        "algorithm": "GDA",
        "learning_rate": 10.0,
        "total_iterations": 10,
    }
    path = _write(tmp_path / "overflow.json", config)
    assert main(["solve", "--config", path, "--out", str(tmp_path / "run")]) == 3
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "NUMERICAL_FAILURE"
    assert error["iteration"] == 1


def test_at_iteration_tags_untagged_errors():
    with pytest.raises(NumericalError) as excinfo:
        with at_iteration(7):
            raise NumericalError("loss contains NaN or Inf")
    assert excinfo.value.iteration == 7
    assert excinfo.value.to_dict()["iteration"] == 7

    with pytest.raises(NumericalError) as excinfo:
        with at_iteration(7):
            raise NumericalError("non-finite metric", iteration=3)
    assert excinfo.value.iteration == 3


def test_dump_game(tmp_path):
    out = tmp_path / "kuhn.json"
    assert main(["dump-game", "--game", "kuhn", "--out", str(out)]) == 0
    assert TreeGame.from_json(out.read_text()).num_nodes == 58


def test_sweep_is_thread_count_invariant(tmp_path):
    configs = [parse_config(_rm_plus_config(seed)) for seed in range(20)]
    single = sweep(configs, out_root=str(tmp_path / "one"), threads=1)
    pooled = sweep(configs, out_root=str(tmp_path / "four"), threads=4)
    assert len(single) == 20
    assert list(single.columns) == SUMMARY_COLUMNS
    pd.testing.assert_frame_equal(single, pooled)
    assert (tmp_path / "four" / "summary.csv").read_bytes() == (tmp_path / "one" / "summary.csv").read_bytes()

    standalone = run(configs[7], out=str(tmp_path / "alone"))
    assert single.loc[7, "final_exploitability"] == standalone.final_exploitability


def test_sweep_cli(tmp_path):
    for seed in range(3):
        _write(tmp_path / f"rm_plus_{seed}.json", _rm_plus_config(seed))
    out = tmp_path / "runs"
    assert main(["sweep", "--configs", str(tmp_path / "rm_plus_*.json"), "--out", str(out)]) == 0
    assert len(pd.read_csv(out / "summary.csv")) == 3


def test_sweep_finishes_other_runs_after_a_crash(tmp_path, monkeypatch):
    def crash_second(config, out=None, svg=False):
        if out.endswith("001_rm_plus_3x3_seed1"):
            raise RuntimeError("worker died")
        return run(config, out=out, svg=svg)

    monkeypatch.setattr("src.harness.sweep.run", crash_second)
    configs = [parse_config(_rm_plus_config(seed)) for seed in range(3)]
    with pytest.raises(EquilibrateError) as excinfo:
        sweep(configs, out_root=str(tmp_path), threads=2)
    assert excinfo.value.code == "RUN_FAILED"
    assert "RuntimeError: worker died" in excinfo.value.detail

    summary = pd.read_csv(tmp_path / "summary.csv")
    assert summary["status"].tolist() == ["ok", "RUN_FAILED", "ok"]
    assert np.isfinite(summary["final_exploitability"].iloc[2])
    assert (tmp_path / "002_rm_plus_3x3_seed2" / "records.csv").exists()


def test_config_seed_only_labels_the_run(tmp_path):
    labelled = [parse_config({**RTCFR_KUHN, "outer_iterations": 20, "seed": seed}) for seed in (0, 9)]
    summary = sweep(labelled, out_root=str(tmp_path))
    assert summary["seed"].tolist() == [0, 9]
    first, second = (tmp_path / f"{i:03d}_rtcfr_plus_kuhn" / "records.csv" for i in (0, 1))
    assert first.read_bytes() == second.read_bytes()


def test_empty_sweep(tmp_path, capsys):
    assert main(["sweep", "--configs", str(tmp_path / "missing_*.json")]) == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "EMPTY_SWEEP"


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        parse_config({**RTCFR_KUHN, "total_iterations": 7})
    with pytest.raises(ConfigError):
        parse_config({"game": {"kind": "KUHN"}, "algorithm": "CFR_PLUS"})
    with pytest.raises(ConfigError):
        parse_config({**RTCFR_KUHN, "colour": "blue"})
    with pytest.raises(ConfigError) as info:
        parse_config({**RTCFR_KUHN, "game": {"kind": "CHESS"}})
    assert info.value.code == "UNKNOWN_GAME"
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def test_config_defaults():
    config = parse_config(RTCFR_KUHN)
    assert config.iterations == 2000
    assert config.resolved_eval_every() == 2
    dogda = parse_config({"game": {"kind": "KUHN"}, "algorithm": "DOGDA", "total_iterations": 10})
    assert dogda.step_size == 2.0
    assert dogda.run_name() == "dogda_kuhn"


def test_matrix_algorithms_need_matrix_games():
    config = parse_config({"game": {"kind": "KUHN"}, "algorithm": "RM_PLUS", "total_iterations": 10})
    with pytest.raises(ConfigError) as info:
        prepare_game(config)
    assert info.value.code == "INCOMPATIBLE_GAME"
    tree_config = parse_config({**_rm_plus_config(0), "algorithm": "CFR_PLUS"})
    assert isinstance(prepare_game(tree_config), TreeGame)


@pytest.mark.parametrize("algorithm", [a.value for a in Algorithm])
def test_every_algorithm_runs_on_a_matrix_game(algorithm):
    data = {
        "game": {"kind": "RANDOM_NFG", "rows": 3, "cols": 4, "seed": 1},
        "algorithm": algorithm,
        "inner_iterations": 5,
        "outer_iterations": 4,
        "mu": 0.5,
        "total_iterations": 20,
    }
    result = execute(parse_config(data))
    assert len(result.records) == 20
    assert result.final_exploitability >= 0.0


def test_oracle_matches_fast_exploitability(rng):
    for seed in range(1000):
        rows, cols = (int(k) for k in rng.integers(1, 5, size=2))
        game = random_nfg(rows, cols, seed=seed)
        profile = Profile.from_arrays(rng.dirichlet(np.ones(rows)), rng.dirichlet(np.ones(cols)))
        assert oracle_exploitability(game, profile) == pytest.approx(exploitability(game, profile), abs=1e-12)


def test_oracle_size_caps(leduc):
    game = random_nfg(101, 100, seed=0)
    with pytest.raises(ConfigError) as info:
        oracle_exploitability(game, Profile.uniform(game))
    assert info.value.code == "SIZE_CAP"
    with pytest.raises(ConfigError):
        next(pure_strategies(leduc, 0))


def test_records_csv_format(tmp_path):
    collector = RecordCollector(eval_every=1)
    collector.add(1, 0.5)
    collector.add(2, 0.25, duality_gap=0.125, sccp_index=1)
    path = tmp_path / "records.csv"
    write_records_csv(collector.records, path)
    lines = path.read_text().splitlines()
    assert lines == [
        "iteration,sccp_index,exploitability,duality_gap,wall_time_ns",
        "1,0,0.5,,0",
        "2,1,0.25,0.125,0",
    ]


def test_non_finite_metrics_raise():
    collector = RecordCollector(eval_every=1)
    with pytest.raises(NumericalError) as info:
        collector.add(3, float("nan"))
    assert info.value.iteration == 3


def test_convergence_svg():
    records = [ConvergenceRecord(t, 10.0 ** (-t / 10)) for t in range(1, 51)]
    svg = convergence_svg(records, title="rm+ <5x5>")
    assert svg.startswith("<svg")
    assert "&lt;5x5&gt;" in svg
    assert "<polyline" in svg
    assert "<polyline" not in convergence_svg([], title="empty")


def test_log_decay_fit():
    iterations = np.arange(1, 101)
    fit = fit_log_decay(iterations, 10.0 ** (-0.05 * iterations))
    assert fit.slope == pytest.approx(-0.05)
    assert fit.r2 == pytest.approx(1.0)
    records = [ConvergenceRecord(int(t), float(10.0 ** (-0.05 * t))) for t in iterations]
    assert decay_rate(records) == pytest.approx(-0.05)
