import math

import pytest

from hamuniv.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    parse_config,
    run_trial,
    success_fractions,
    sweep,
    trial_seed,
)


def test_config_parsing():
    cfg = parse_config("n_grid = 8, 10\nc-grid = 0.5, 4  # comment\ntrials = 3\ncomplete = no\n")
    assert cfg.n_grid == [8, 10] and cfg.c_grid == [0.5, 4.0] and cfg.trials == 3
    assert cfg.points()[1] == (8, min(1.0, 4 * math.log(8) / 8), 4.0)
    with pytest.raises(ValueError):
        parse_config("bogus = 1\n")
    with pytest.raises(ValueError):
        parse_config("n_grid = 8\n")  # no p grid
    with pytest.raises(ValueError):
        ExperimentConfig(p_grid=[1.5])
    with pytest.raises(ValueError):
        ExperimentConfig(p_grid=[0.5], strategy="magic")


def test_c_grid_clamps_to_one():
    cfg = ExperimentConfig(n_grid=[12], c_grid=[20])
    assert cfg.points() == [(12, 1.0, 20.0)]


def test_trial_seeds_distinct():
    seeds = {trial_seed(0, i, j) for i in range(5) for j in range(20)}
    assert len(seeds) == 100


def test_complete_single_point(tmp_path):
    cfg = ExperimentConfig(n_grid=[8], complete=True, trials=1, out=str(tmp_path / "s.csv"))
    rows = sweep(cfg)
    assert len(rows) == 1 and rows[0].split(",")[5] == "true"
    text = (tmp_path / "s.csv").read_text().splitlines()
    assert text[0].startswith("# hamuniv sweep csv v1") and text[1] == CSV_COLUMNS
    wit = tmp_path / "s_witnesses"
    assert sorted(p.name for p in wit.iterdir()) == ["point0_trial0.chi", "point0_trial0.cycle", "point0_trial0.tuple"]


def test_sweep_is_byte_identical(tmp_path):
    outs = []
    for r in range(2):
        cfg = ExperimentConfig(n_grid=[9], p_grid=[0.4, 0.8], trials=4, strategy="pipeline", seed=5,
                               out=str(tmp_path / f"s{r}.csv"))
        sweep(cfg)
        outs.append((tmp_path / f"s{r}.csv").read_bytes())
    assert outs[0] == outs[1]


def test_threads_do_not_change_output(tmp_path):
    base = dict(n_grid=[8], p_grid=[0.6], trials=6, seed=3)
    a = sweep(ExperimentConfig(out=str(tmp_path / "a.csv"), **base), threads=1)
    b = sweep(ExperimentConfig(out=str(tmp_path / "b.csv"), **base), threads=2)
    assert a == b


def test_run_trial_and_fractions():
    cfg = ExperimentConfig(n_grid=[8], p_grid=[0.0, 1.0], trials=2)
    rows = [run_trial(cfg, i, j).row for i in range(2) for j in range(2)]
    fr = success_fractions(rows)
    assert fr[("0", "")] == (0, 2) and fr[("1", "")] == (2, 2)
    assert all(r.split(",")[7] == "" for r in rows)  # runtime left empty without timing
