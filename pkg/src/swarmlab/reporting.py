"""
Artifact writers and readers.

CSV files carry a header row, LF line endings and ``repr`` floats, so values
read back are bit-identical to the ones written. Summary tables are always
computed from :class:`CellData`, whether it was built from fresh run records
or re-read from a results directory.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from PIL import Image

from swarmlab import stats
from swarmlab.attack import AttackRecord
from swarmlab.benchmarks import make_problem
from swarmlab.errors import ConfigError, InputFormatError, InvalidArgumentError
from swarmlab.idx import IMAGE_SIDE
from swarmlab.optimizers import RunRecord
from swarmlab.utils import atomic_write_bytes, atomic_write_text

CONVERGENCE_HEADER = ["generation", "best_of_generation", "best_so_far"]
POPULATION_HEADER = ["x", "y", "run_index"]
FINALS_HEADER = ["run_index", "seed", "final_best_value", "best_x", "best_y", "evaluation_count"]
SUMMARY_HEADER = [
    "function", "algorithm", "runs", "prob", "min", "max", "mean", "median", "std",
    "t", "p", "sign", "pooled_density", "best_density",
]
ATTACK_CURVE_HEADER = ["generation", "best_confidence"]


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, render_csv(header, rows))


def write_json(path: Path, data: Any) -> Path:
    return atomic_write_text(path, json.dumps(data, indent=2) + "\n")


def read_csv(path: Path, header: Sequence[str]) -> list[dict[str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or list(reader.fieldnames[: len(header)]) != list(header):
                raise InputFormatError(f"Expected columns {','.join(header)}", path=str(path), offset=0)
            return list(reader)
    except OSError as exc:
        raise InputFormatError(f"Cannot read CSV: {exc.strerror}", path=str(path)) from exc


def _float(row: dict[str, str], key: str, path: Path) -> float:
    try:
        return float(row[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"Column '{key}' is not a number: {row.get(key)!r}", path=str(path)) from exc


# -- bench ----------------------------------------------------------------


@dataclass
class CellData:
    """Raw results of one (function, algorithm) cell across its runs."""

    function: str
    algorithm: str
    run_indices: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    finals: list[float] = field(default_factory=list)
    best_positions: list[list[float]] = field(default_factory=list)
    evaluations: list[int] = field(default_factory=list)
    populations: list[np.ndarray] = field(default_factory=list)
    best_so_far_curves: list[list[float]] = field(default_factory=list)
    best_of_generation_curves: list[list[float]] = field(default_factory=list)

    def add_record(self, run_index: int, record: RunRecord) -> None:
        self.run_indices.append(run_index)
        self.seeds.append(record.seed)
        self.finals.append(record.final_best_value)
        self.best_positions.append([float(v) for v in record.final_best_position])
        self.evaluations.append(record.evaluation_count)
        self.populations.append(np.asarray(record.final_population, dtype=float))
        self.best_so_far_curves.append(list(record.best_so_far_curve))
        self.best_of_generation_curves.append(list(record.best_of_generation_curve))


@dataclass
class SummaryRow:
    function: str
    algorithm: str
    runs: int
    prob: float
    summary: stats.SummaryStats
    t: Optional[float]
    p: Optional[float]
    sign: str
    density: stats.DensityReport

    def cells(self) -> list[Any]:
        s = self.summary
        return [
            self.function, self.algorithm, self.runs, self.prob,
            s.min, s.max, s.mean, s.median, s.std,
            self.t, self.p, self.sign,
            self.density.pooled_density, self.density.best_density,
        ]


def cells_from_records(
    functions: Sequence[str],
    algorithms: Sequence[str],
    tasks: Sequence[Any],
    records: Sequence[RunRecord],
) -> dict[tuple[str, str], CellData]:
    cells = {(f, a): CellData(f, a) for f in functions for a in algorithms}
    for task, record in zip(tasks, records):
        cells[(task.function, task.algorithm)].add_record(task.run_index, record)
    return cells


def summary_rows(
    cells: dict[tuple[str, str], CellData],
    baseline: str,
    precision: float = stats.DEFAULT_PRECISION,
    significance: float = stats.DEFAULT_ALPHA,
) -> list[SummaryRow]:
    rows = []
    for (function, algorithm), cell in cells.items():
        problem = make_problem(function)
        reference = cells.get((function, baseline))
        t = p = None
        sign = ""
        if reference is not None and len(cell.finals) >= 2 and len(reference.finals) >= 2:
            result = stats.t_test(cell.finals, reference.finals)
            t, p = result.t, result.p
            sign = stats.significance_mark(cell.finals, reference.finals, significance)
        rows.append(
            SummaryRow(
                function=function,
                algorithm=algorithm,
                runs=len(cell.finals),
                prob=stats.success_rate(cell.finals, problem.global_minimum_value, precision),
                summary=stats.summarize(cell.finals),
                t=t,
                p=p,
                sign=sign,
                density=stats.density_report(
                    cell.populations, cell.best_positions, problem.global_minimizer
                ),
            )
        )
    return rows


def _sci(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:.2E}"


def render_summary_markdown(rows: Sequence[SummaryRow], title: str, baseline: str) -> str:
    lines = [
        f"# {title}",
        "",
        f"Significance marks compare each algorithm with {baseline} "
        "(`+` better, `=` no significant difference, `-` worse).",
        "",
        "| Function | Algorithm | Runs | Prob(.15) | Min | Max | Mean | Median | Std | t | p | +/=/- | Density (pooled) | Density (best) |",
        "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|",
    ]
    for row in rows:
        s = row.summary
        lines.append(
            "| "
            + " | ".join(
                [
                    row.function, row.algorithm, str(row.runs), f"{row.prob:g}",
                    _sci(s.min), _sci(s.max), _sci(s.mean), _sci(s.median), _sci(s.std),
                    _sci(row.t), _sci(row.p), row.sign,
                    _sci(row.density.pooled_density), _sci(row.density.best_density),
                ]
            )
            + " |"
        )
    return "\n".join(lines) + "\n"


def _mean_curve_rows(cells: Sequence[CellData]) -> list[list[Any]]:
    means = [stats.mean_curve(cell.best_so_far_curves) if cell.best_so_far_curves else [] for cell in cells]
    length = max((len(m) for m in means), default=0)
    return [
        [generation] + [m[generation] if generation < len(m) else None for m in means]
        for generation in range(length)
    ]


def write_summary(
    out_dir: Path,
    cells: dict[tuple[str, str], CellData],
    baseline: str,
    precision: float,
    significance: float,
    title: str,
) -> list[SummaryRow]:
    """Write summary.csv, summary.md and the mean convergence curves."""
    rows = summary_rows(cells, baseline, precision, significance)
    write_csv(out_dir / "summary.csv", SUMMARY_HEADER, (row.cells() for row in rows))
    atomic_write_text(out_dir / "summary.md", render_summary_markdown(rows, title, baseline))

    functions = list(dict.fromkeys(f for f, _ in cells))
    for function in functions:
        group = [cell for (f, _), cell in cells.items() if f == function]
        write_csv(
            out_dir / "curves" / f"{function}_mean_convergence.csv",
            ["generation"] + [cell.algorithm for cell in group],
            _mean_curve_rows(group),
        )
    return rows


def cell_dir(out_dir: Path, function: str, algorithm: str) -> Path:
    return out_dir / "runs" / function / algorithm


def write_cell(out_dir: Path, cell: CellData) -> None:
    directory = cell_dir(out_dir, cell.function, cell.algorithm)
    for k, run_index in enumerate(cell.run_indices):
        best_so_far = cell.best_so_far_curves[k]
        best_of_generation = cell.best_of_generation_curves[k]
        write_csv(
            directory / f"run_{run_index}_convergence.csv",
            CONVERGENCE_HEADER,
            ([g, best_of_generation[g], best_so_far[g]] for g in range(len(best_so_far))),
        )
        population = np.atleast_2d(cell.populations[k])
        if population.shape[1] != 2:
            raise InvalidArgumentError("Population scatter files need two-variable problems")
        write_csv(
            directory / f"run_{run_index}_population.csv",
            POPULATION_HEADER,
            ([x, y, run_index] for x, y in population),
        )
    write_csv(
        directory / "finals.csv",
        FINALS_HEADER,
        (
            [run_index, seed, final, pos[0], pos[1], evals]
            for run_index, seed, final, pos, evals in zip(
                cell.run_indices, cell.seeds, cell.finals, cell.best_positions, cell.evaluations
            )
        ),
    )


def write_bench_artifacts(
    out_dir: Path,
    experiment: dict,
    cells: dict[tuple[str, str], CellData],
) -> list[SummaryRow]:
    out_dir = Path(out_dir)
    for cell in cells.values():
        write_cell(out_dir, cell)
    rows = write_summary(
        out_dir,
        cells,
        experiment["baseline"],
        experiment["precision"],
        experiment["significance"],
        f"Benchmark summary: {experiment['name']}",
    )
    write_json(out_dir / "experiment.json", experiment)
    return rows


def _read_cell(out_dir: Path, function: str, algorithm: str) -> CellData:
    directory = cell_dir(out_dir, function, algorithm)
    finals_path = directory / "finals.csv"
    if not finals_path.exists():
        raise InputFormatError("Missing finals.csv", path=str(finals_path))
    cell = CellData(function, algorithm)
    for row in read_csv(finals_path, FINALS_HEADER):
        run_index = int(_float(row, "run_index", finals_path))
        cell.run_indices.append(run_index)
        cell.seeds.append(int(row["seed"]))
        cell.finals.append(_float(row, "final_best_value", finals_path))
        cell.best_positions.append([_float(row, "best_x", finals_path), _float(row, "best_y", finals_path)])
        cell.evaluations.append(int(_float(row, "evaluation_count", finals_path)))

        population_path = directory / f"run_{run_index}_population.csv"
        cell.populations.append(
            np.array(
                [[_float(r, "x", population_path), _float(r, "y", population_path)]
                 for r in read_csv(population_path, POPULATION_HEADER)],
                dtype=float,
            ).reshape(-1, 2)
        )
        convergence_path = directory / f"run_{run_index}_convergence.csv"
        curve_rows = read_csv(convergence_path, CONVERGENCE_HEADER)
        cell.best_so_far_curves.append([_float(r, "best_so_far", convergence_path) for r in curve_rows])
        cell.best_of_generation_curves.append(
            [_float(r, "best_of_generation", convergence_path) for r in curve_rows]
        )
    return cell


def _discover_grid(in_dir: Path) -> tuple[list[str], list[str]]:
    runs = in_dir / "runs"
    if not runs.is_dir():
        raise ConfigError(f"No runs/ directory under {in_dir}")
    functions = sorted(p.name for p in runs.iterdir() if p.is_dir())
    algorithms = sorted({p.name for f in functions for p in (runs / f).iterdir() if p.is_dir()})
    return functions, algorithms


def read_bench_results(in_dir: Path) -> tuple[dict, dict[tuple[str, str], CellData]]:
    """Experiment description and raw cells of a bench results directory."""
    in_dir = Path(in_dir)
    experiment_path = in_dir / "experiment.json"
    if experiment_path.exists():
        try:
            experiment = json.loads(experiment_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputFormatError(exc.msg, path=str(experiment_path), offset=exc.pos) from exc
    else:
        functions, algorithms = _discover_grid(in_dir)
        experiment = {
            "name": in_dir.name,
            "functions": functions,
            "algorithms": algorithms,
            "baseline": "IGA",
            "precision": stats.DEFAULT_PRECISION,
            "significance": stats.DEFAULT_ALPHA,
        }
    cells = {
        (f, a): _read_cell(in_dir, f, a)
        for f in experiment["functions"]
        for a in experiment["algorithms"]
    }
    return experiment, cells


def rebuild_summary(in_dir: Path) -> list[SummaryRow]:
    """Recompute every summary document of a results directory from its raw CSVs."""
    experiment, cells = read_bench_results(in_dir)
    return write_summary(
        Path(in_dir),
        cells,
        experiment["baseline"],
        experiment["precision"],
        experiment["significance"],
        f"Benchmark summary: {experiment['name']}",
    )


def read_summary(path: Path) -> list[dict[str, str]]:
    return read_csv(path, SUMMARY_HEADER)


# -- attack ---------------------------------------------------------------


def encode_pgm(bits: np.ndarray) -> bytes:
    """Binary PGM (P5) of a 784-bit image, bits scaled to 0/255."""
    pixels = (np.asarray(bits, dtype=np.uint8).reshape(IMAGE_SIDE, IMAGE_SIDE) * 255).astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PPM")
    return buffer.getvalue()


def attack_paths(out_dir: Path, label: int) -> dict[str, Path]:
    out_dir = Path(out_dir)
    return {
        "image": out_dir / f"adversarial_label{label}.pgm",
        "curve": out_dir / f"confidence_label{label}.csv",
        "metadata": out_dir / f"attack_label{label}.json",
    }


def write_attack_artifacts(out_dir: Path, record: AttackRecord) -> dict[str, Path]:
    paths = attack_paths(out_dir, record.target_label)
    atomic_write_bytes(paths["image"], encode_pgm(record.final_bits.bits))
    write_csv(paths["curve"], ATTACK_CURVE_HEADER, enumerate(record.confidence_curve))
    write_json(paths["metadata"], record.to_metadata())
    return paths
