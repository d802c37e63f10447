import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from swarmlab import commands, db
from swarmlab.errors import ConfigError, ModelFormatError
from swarmlab.experiment_config import ExperimentConfig
from swarmlab.idx import write_idx_images, write_idx_labels
from swarmlab.models import load_model
from swarmlab.reporting import SUMMARY_HEADER, read_csv, read_summary


@pytest.fixture()
def small_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict(
        {
            "algorithms": ["IGA", "SGA", "PSO", "GWO"],
            "functions": ["sphere", "beale"],
            "repeats": 3,
            "master_seed": 1,
            "workers": 2,
            "params": {
                tag: {"iterations": 4, "population_size": 5} for tag in ("IGA", "SGA", "PSO", "GWO")
            },
        },
        name="small",
    )


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_bench_writes_every_artifact(tmp_path, small_config):
    out = commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    assert (out / "experiment.json").exists()
    assert (out / "summary.md").exists()
    assert (out / "curves" / "sphere_mean_convergence.csv").exists()
    rows = read_summary(out / "summary.csv")
    assert len(rows) == 2 * 4
    assert [(r["function"], r["algorithm"]) for r in rows[:4]] == [
        ("sphere", "IGA"), ("sphere", "SGA"), ("sphere", "PSO"), ("sphere", "GWO")
    ]
    run_dir = out / "runs" / "beale" / "GWO"
    assert len(read_csv(run_dir / "finals.csv", ["run_index"])) == 3
    assert len((run_dir / "run_2_convergence.csv").read_text(encoding="utf-8").splitlines()) == 1 + 4
    assert len((run_dir / "run_0_population.csv").read_text(encoding="utf-8").splitlines()) == 1 + 5

    experiment = json.loads((out / "experiment.json").read_text(encoding="utf-8"))
    assert experiment["seeds"] == [small_config.seed_for(k) for k in range(3)]


def test_bench_is_byte_identical_across_invocations(tmp_path, small_config):
    first = commands.cmd_bench(small_config, tmp_path / "a", quiet=True)
    second = commands.cmd_bench(small_config, tmp_path / "b", workers=1, quiet=True)
    assert _tree(first) == _tree(second)


def test_paired_seeds_shared_across_algorithms(tmp_path, small_config):
    out = commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    seeds = {
        algorithm: [r["seed"] for r in read_csv(out / "runs" / "sphere" / algorithm / "finals.csv", ["run_index"])]
        for algorithm in small_config.algorithms
    }
    assert len({tuple(v) for v in seeds.values()}) == 1


def test_report_recomputes_identical_summary(tmp_path, small_config):
    out = commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    original = _tree(out)
    (out / "summary.csv").unlink()
    (out / "summary.md").unlink()
    shutil.rmtree(out / "curves")

    rows = commands.cmd_report(out, quiet=True)
    assert len(rows) == 8
    assert _tree(out) == original


def test_report_without_experiment_file(tmp_path, small_config):
    out = commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    (out / "experiment.json").unlink()
    rows = commands.cmd_report(out, quiet=True)
    assert sorted({r.algorithm for r in rows}) == ["GWO", "IGA", "PSO", "SGA"]
    assert read_csv(out / "summary.csv", SUMMARY_HEADER)


def test_report_requires_directory(tmp_path):
    with pytest.raises(ConfigError):
        commands.cmd_report(tmp_path / "nothing", quiet=True)


def test_bench_is_recorded_in_history(tmp_path, small_config):
    commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    (latest,) = db.get_recent_experiments(1)
    assert latest["kind"] == "bench"
    assert latest["name"] == "small"
    assert latest["runs"] == 24


def test_planted_then_attack(tmp_path):
    model_path = commands.cmd_planted(2, tmp_path / "planted.json", seed=5)
    assert load_model(model_path).layers[0].rows == 10

    paths = commands.cmd_attack(
        model_path, 2, iterations=3, population_size=6, seed=1, out_dir=tmp_path / "attack", quiet=True
    )
    assert paths["image"].read_bytes().startswith(b"P5\n28 28\n255\n")
    meta = json.loads(paths["metadata"].read_text(encoding="utf-8"))
    assert meta["label"] == 2
    assert meta["iteration"] == 3
    assert meta["confidence"] >= 0.99
    assert meta["oracle_queries"] == 6 + 2 * (6 * 784 + 6)
    assert len(paths["curve"].read_text(encoding="utf-8").splitlines()) == 1 + 3


def test_dataset_attack_filters_by_label(tmp_path, rng):
    model_path = commands.cmd_planted(1, tmp_path / "planted.json")
    images = rng.integers(0, 256, size=(8, 28, 28), dtype=np.uint8)
    labels = np.array([1, 0, 1, 0, 1, 0, 1, 0])
    write_idx_images(tmp_path / "images.idx", images)
    write_idx_labels(tmp_path / "labels.idx", labels)

    paths = commands.cmd_attack(
        model_path,
        1,
        iterations=2,
        init_mode="dataset",
        dataset_path=tmp_path / "images.idx",
        labels_path=tmp_path / "labels.idx",
        population_size=4,
        out_dir=tmp_path / "attack",
        quiet=True,
    )
    assert json.loads(paths["metadata"].read_text(encoding="utf-8"))["initialize"] == "dataset"


def test_dataset_attack_without_matching_label(tmp_path, rng):
    model_path = commands.cmd_planted(1, tmp_path / "planted.json")
    write_idx_images(tmp_path / "images.idx", rng.integers(0, 256, size=(2, 784), dtype=np.uint8))
    write_idx_labels(tmp_path / "labels.idx", [0, 0])
    with pytest.raises(ConfigError):
        commands.cmd_attack(
            model_path, 1, init_mode="dataset", dataset_path=tmp_path / "images.idx",
            labels_path=tmp_path / "labels.idx", out_dir=tmp_path / "attack", quiet=True,
        )


def test_dataset_mode_without_dataset_writes_nothing(tmp_path):
    model_path = commands.cmd_planted(0, tmp_path / "planted.json")
    out = tmp_path / "attack"
    with pytest.raises(ConfigError):
        commands.cmd_attack(model_path, 0, init_mode="dataset", out_dir=out, quiet=True)
    assert not out.exists()


def test_attack_with_bad_model(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(ModelFormatError):
        commands.cmd_attack(path, 0, out_dir=tmp_path / "attack", quiet=True)
    assert not (tmp_path / "attack").exists()


def test_attack_rejects_bad_parameters(tmp_path):
    model_path = commands.cmd_planted(0, tmp_path / "planted.json")
    with pytest.raises(ConfigError):
        commands.cmd_attack(model_path, 0, population_size=1, quiet=True)
    with pytest.raises(ConfigError):
        commands.cmd_attack(model_path, 0, threshold=300, quiet=True)


def test_listing_commands_run(tmp_path, small_config):
    commands.cmd_experiments()
    commands.cmd_history(5)
    commands.cmd_bench(small_config, tmp_path / "out", quiet=True)
    commands.cmd_history(5)
