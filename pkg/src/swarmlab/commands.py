from pathlib import Path

import numpy as np

from swarmlab import db
from swarmlab.attack import AttackParams, MlpOracle, run_attack
from swarmlab.encoding import random_chromosome
from swarmlab.errors import ConfigError, InvalidArgumentError
from swarmlab.experiment_config import ExperimentConfig, ExperimentRegistry
from swarmlab.idx import IMAGE_PIXELS, filter_by_label, load_idx_images, load_idx_labels
from swarmlab.models import load_model, planted_model, save_model
from swarmlab.reporting import (
    SummaryRow,
    cells_from_records,
    rebuild_summary,
    write_attack_artifacts,
    write_bench_artifacts,
)
from swarmlab.rich_utils import (
    Colors,
    console,
    create_bar_progress,
    create_table,
    print_info,
    print_success,
    print_table,
)
from swarmlab.runner import execute_plan, plan_runs

DEFAULT_RESULTS_DIR = Path("results")


def _print_summary(rows: list[SummaryRow], title: str) -> None:
    table = create_table(
        title, ["Function", "Algorithm", "Prob(.15)", "Min", "Mean", "Std", "p", "+/=/-"]
    )
    for row in rows:
        s = row.summary
        table.add_row(
            row.function,
            row.algorithm,
            f"{row.prob:g}",
            f"{s.min:.2E}",
            f"{s.mean:.2E}",
            f"{s.std:.2E}",
            "" if row.p is None else f"{row.p:.2E}",
            row.sign,
        )
    print_table(table)


def cmd_bench(
    config: ExperimentConfig,
    out_dir: Path | None = None,
    workers: int | None = None,
    quiet: bool = False,
) -> Path:
    """Run an experiment grid and write every artifact once all runs are done."""
    out_dir = Path(out_dir) if out_dir is not None else DEFAULT_RESULTS_DIR / config.name
    tasks = plan_runs(config)
    if not quiet:
        print_info(
            f"Running {config.name}: {len(config.algorithms)} algorithms x "
            f"{len(config.functions)} functions x {config.repeats} runs"
        )

    records = execute_plan(config, tasks, workers=workers, quiet=quiet)
    cells = cells_from_records(config.functions, config.algorithms, tasks, records)
    rows = write_bench_artifacts(out_dir, config.to_dict(), cells)

    db.record_experiment(
        "bench",
        config.name,
        config.master_seed,
        out_dir,
        runs=[
            {
                "function": task.function,
                "algorithm": task.algorithm,
                "run_index": task.run_index,
                "seed": task.seed,
                "final_value": record.final_best_value,
                "evaluations": record.evaluation_count,
            }
            for task, record in zip(tasks, records)
        ],
    )

    if not quiet:
        _print_summary(rows, f"Benchmark: {config.name}")
        print_success(f"Artifacts written to {out_dir}")
    return out_dir


def _seed_images(dataset_path: Path, labels_path: Path | None, target_label: int) -> np.ndarray:
    images = load_idx_images(dataset_path)
    if labels_path is not None:
        images = filter_by_label(images, load_idx_labels(labels_path), target_label)
    if len(images) == 0:
        raise ConfigError(f"No seed images of label {target_label} in {dataset_path}")
    return images


def cmd_attack(
    model_path: Path,
    target_label: int,
    iterations: int | None = None,
    init_mode: str | None = None,
    dataset_path: Path | None = None,
    labels_path: Path | None = None,
    threshold: int | None = None,
    population_size: int | None = None,
    seed: int = 0,
    out_dir: Path | None = None,
    quiet: bool = False,
) -> dict:
    """Evolve an adversarial binary image against a weights file."""
    try:
        params = AttackParams.from_config(
            {
                "target_label": target_label,
                "iterations": iterations,
                "init_mode": init_mode,
                "threshold": threshold,
                "population_size": population_size,
            }
        )
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    if params.init_mode == "dataset" and dataset_path is None:
        raise ConfigError("--init dataset requires --dataset <idx file>")
    if seed < 0:
        raise ConfigError("--seed must be non-negative")

    model = load_model(model_path)
    seed_images = None
    if params.init_mode == "dataset":
        seed_images = _seed_images(Path(dataset_path), labels_path, params.target_label)

    out_dir = Path(out_dir) if out_dir is not None else DEFAULT_RESULTS_DIR / "attack"
    oracle = MlpOracle(model)

    if quiet:
        record = run_attack(oracle, params, seed, seed_images)
    else:
        print_info(
            f"Attacking label {params.target_label}: {params.population_size} individuals, "
            f"{params.iterations} generations, {params.expected_queries():,} oracle queries"
        )
        with create_bar_progress() as progress:
            bar = progress.add_task(f"Label {params.target_label}", total=params.iterations)

            def advance(_generation: int, _confidence: float) -> None:
                progress.advance(bar)

            record = run_attack(oracle, params, seed, seed_images, on_generation=advance)

    paths = write_attack_artifacts(out_dir, record)
    db.record_experiment(
        "attack",
        f"label{params.target_label}",
        seed,
        out_dir,
        runs=[
            {
                "function": "attack",
                "algorithm": "IGA",
                "run_index": 0,
                "seed": seed,
                "final_value": record.final_confidence,
                "evaluations": record.oracle_query_count,
            }
        ],
    )

    if not quiet:
        table = create_table("Attack result", ["Label", "Initialize", "Iteration", "Confidence"])
        table.add_row(
            str(record.target_label),
            record.init_mode,
            str(len(record.confidence_curve)),
            f"{record.final_confidence:.2%}",
        )
        print_table(table)
        print_success(f"Adversarial image written to {paths['image']}")
    return paths


def cmd_report(in_dir: Path, quiet: bool = False) -> list[SummaryRow]:
    """Regenerate summary documents from the raw per-run CSVs."""
    in_dir = Path(in_dir)
    if not in_dir.is_dir():
        raise ConfigError(f"Results directory not found: {in_dir}")
    rows = rebuild_summary(in_dir)
    if not quiet:
        _print_summary(rows, f"Report: {in_dir}")
        print_success(f"Summary rewritten in {in_dir}")
    return rows


def cmd_planted(target_label: int, out_path: Path, seed: int = 0) -> Path:
    """Write a planted linear-pattern model with a random pattern."""
    if seed < 0:
        raise ConfigError("--seed must be non-negative")
    pattern = random_chromosome(IMAGE_PIXELS, np.random.default_rng(seed))
    try:
        model = planted_model(pattern, target_label)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    path = save_model(model, out_path)
    print_success(f"Planted model for label {target_label} written to {path}")
    return path


def cmd_experiments() -> None:
    """Lists available experiment presets."""
    presets = ExperimentRegistry().list_presets()
    if not presets:
        console.print("No experiment presets found.", style=Colors.YELLOW)
        return

    table = create_table("Experiment Presets", ["Name", "Grid", "Source", "Description"])
    for preset in presets:
        table.add_row(preset["name"], preset["grid"], preset["source"], preset["description"])
    print_table(table)
    console.print("\nUse 'swarmlab bench --config <name>' to run one.", style=Colors.YELLOW)


def cmd_history(limit: int = 10) -> None:
    """Prints recent bench and attack invocations."""
    experiments = db.get_recent_experiments(limit)
    if not experiments:
        console.print("No experiments recorded.", style=Colors.YELLOW)
        return

    table = create_table("Recent Experiments", ["ID", "Kind", "Name", "Seed", "Runs", "Output", "Created"])
    for exp in reversed(experiments):
        table.add_row(
            str(exp["id"]),
            exp["kind"],
            exp["name"],
            exp["master_seed"],
            str(exp["runs"]),
            exp["output_dir"],
            exp["created_at"],
        )
    print_table(table)
