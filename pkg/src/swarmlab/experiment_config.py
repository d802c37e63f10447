"""Experiment presets: which algorithms run on which functions, and how often."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from swarmlab import config as swarmlab_config
from swarmlab.benchmarks import TestFunctionId
from swarmlab.errors import ConfigError, InvalidArgumentError
from swarmlab.optimizers import default_params, get_algorithm
from swarmlab.rich_utils import print_warning


def _candidate_data_dirs() -> list[Path]:
    """Return possible locations for packaged or local experiment data."""
    candidates: list[Path] = []

    # Packaged data (when distributed via wheel)
    candidates.append(Path(__file__).resolve().parent / "data")

    # Repo-root data (local dev layout: repo/data next to src/)
    candidates.append(Path(__file__).resolve().parents[2] / "data")

    candidates.append(Path.cwd() / "data")
    return candidates


def _resolve_experiments_dir() -> Path:
    for base in _candidate_data_dirs():
        candidate = base / "experiments"
        if candidate.exists():
            return candidate
    return Path("data") / "experiments"


def derive_seed(master_seed: int, run_index: int) -> int:
    """
    Seed of run ``run_index`` split off ``master_seed``.

    Depends on nothing but the two integers, so the k-th run of every
    algorithm on every function shares a seed and adding algorithms or
    functions never reshuffles existing runs.
    """
    if master_seed < 0 or run_index < 0:
        raise InvalidArgumentError("master_seed and run_index must be non-negative")
    sequence = np.random.SeedSequence(master_seed, spawn_key=(run_index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ExperimentConfig:
    name: str
    algorithms: List[str]
    functions: List[str]
    repeats: int = 10
    master_seed: int = 0
    params: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    output_dir: Optional[Path] = None
    precision: float = 0.15
    significance: float = 0.05
    baseline: str = "IGA"
    workers: int = 4
    description: str = ""

    @classmethod
    def from_dict(cls, data: dict, name: str = "custom") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"Experiment '{name}' must be a JSON object")
        bench = swarmlab_config.get_section("bench")
        known = {
            "algorithms", "functions", "repeats", "master_seed", "params",
            "precision", "significance", "baseline", "workers", "description",
        }
        unknown = sorted(set(data) - known - {"name"})
        if unknown:
            raise ConfigError(f"Experiment '{name}' has unknown fields: {', '.join(unknown)}")
        config = cls(
            name=data.get("name", name),
            algorithms=list(data.get("algorithms", [])),
            functions=list(data.get("functions", [])),
            repeats=data.get("repeats", bench["repeats"]),
            master_seed=data.get("master_seed", bench["master_seed"]),
            params=dict(data.get("params", {})),
            precision=data.get("precision", bench["precision"]),
            significance=data.get("significance", bench["significance"]),
            baseline=data.get("baseline", bench["baseline"]),
            workers=data.get("workers", bench["workers"]),
            description=data.get("description", ""),
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Check the whole grid before any run starts; raises ConfigError."""
        if not isinstance(self.repeats, int) or self.repeats < 1:
            raise ConfigError(f"repeats must be a positive integer, got {self.repeats!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if not self.algorithms:
            raise ConfigError("At least one algorithm is required")
        if not self.functions:
            raise ConfigError("At least one function is required")
        if self.precision <= 0:
            raise ConfigError("precision must be positive")
        if not 0 < self.significance < 1:
            raise ConfigError("significance must lie in (0, 1)")
        try:
            self.algorithms = [get_algorithm(tag).tag for tag in self.algorithms]
            self.functions = [TestFunctionId.parse(name).value for name in self.functions]
            self.baseline = get_algorithm(self.baseline).tag
            unknown = [tag for tag in self.params if get_algorithm(tag).tag not in self.algorithms]
            if unknown:
                raise ConfigError(f"Parameters given for algorithms not in the grid: {', '.join(unknown)}")
            self.params = {get_algorithm(tag).tag: dict(values) for tag, values in self.params.items()}
            for tag in self.algorithms:
                self.resolved_params(tag)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        if len(set(self.algorithms)) != len(self.algorithms) or len(set(self.functions)) != len(self.functions):
            raise ConfigError("Algorithms and functions must not repeat")

    def resolved_params(self, tag: str):
        return default_params(tag, self.params.get(tag))

    def seed_for(self, run_index: int) -> int:
        return derive_seed(self.master_seed, run_index)

    @property
    def total_runs(self) -> int:
        return len(self.algorithms) * len(self.functions) * self.repeats

    def to_dict(self) -> dict:
        """Resolved configuration as written next to the artifacts."""
        params = {}
        for tag in self.algorithms:
            resolved = self.resolved_params(tag)
            params[tag] = asdict(resolved)
        return {
            "name": self.name,
            "description": self.description,
            "algorithms": list(self.algorithms),
            "functions": list(self.functions),
            "repeats": self.repeats,
            "master_seed": self.master_seed,
            "precision": self.precision,
            "significance": self.significance,
            "baseline": self.baseline,
            "params": params,
            "seeds": [self.seed_for(k) for k in range(self.repeats)],
        }


class ExperimentRegistry:
    """Shipped presets overridden by user presets of the same name."""

    def __init__(self):
        self.user_dir = swarmlab_config.get_home_dir() / "data" / "experiments"
        self.default_dir = _resolve_experiments_dir()
        self.presets: Dict[str, dict] = {}
        self.sources: Dict[str, str] = {}
        self._load_dir(self.default_dir, "default")
        self._load_dir(self.user_dir, "user")

    def _load_dir(self, directory: Path, source: str) -> None:
        if not directory.exists():
            return
        for json_file in sorted(directory.glob("*.json")):
            try:
                with open(json_file, "r", encoding="utf-8") as f:
                    self.presets[json_file.stem] = json.load(f)
                self.sources[json_file.stem] = source
            except (OSError, json.JSONDecodeError) as e:
                print_warning(f"Could not load experiment {json_file.name}: {e}")

    def list_presets(self) -> List[Dict[str, Any]]:
        result = []
        for name, preset in self.presets.items():
            algorithms = preset.get("algorithms", [])
            functions = preset.get("functions", [])
            result.append(
                {
                    "name": name,
                    "description": preset.get("description", ""),
                    "grid": f"{len(algorithms)} x {len(functions)} x {preset.get('repeats', '?')}",
                    "source": self.sources.get(name, "unknown"),
                }
            )
        return sorted(result, key=lambda x: x["name"])

    def resolve(self, name_or_path: str) -> ExperimentConfig:
        """Load a preset by name or an experiment JSON file by path."""
        path = Path(name_or_path).expanduser()
        if path.suffix == ".json" or path.exists():
            if not path.is_file():
                raise ConfigError(f"Experiment file not found: {path}")
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: invalid JSON: {e}") from e
            return ExperimentConfig.from_dict(data, path.stem)

        if name_or_path not in self.presets:
            known = ", ".join(sorted(self.presets)) or "none"
            raise ConfigError(f"Unknown experiment '{name_or_path}' (known: {known})")
        return ExperimentConfig.from_dict(self.presets[name_or_path], name_or_path)
