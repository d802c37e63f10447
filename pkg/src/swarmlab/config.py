import json
import os
from pathlib import Path

from swarmlab.rich_utils import Colors, console

DEFAULT_GA = {
    "iterations": 101,
    "population_size": 50,
    "gene_length": 30,
    "iga_mutation_rate": 0.025,
    "sga_mutation_rate": 0.2,
    "elitism": False,
    "max_mother_attempts": None,
}

DEFAULT_PSO = {
    "iterations": 101,
    "population_size": 50,
    "w": 1.0,
    "c1": 1.49445,
    "c2": 1.49445,
    "v_max_fraction": 0.5,
}

DEFAULT_GWO = {
    "iterations": 101,
    "population_size": 50,
    "a_start": 2.0,
}

DEFAULT_ATTACK = {
    "population_size": 100,
    "iterations": 100,
    "mutation_rate": 0.025,
    "threshold": 128,
    "init": "random",
}

DEFAULT_BENCH = {
    "repeats": 10,
    "precision": 0.15,
    "significance": 0.05,
    "workers": 4,
    "baseline": "IGA",
    "master_seed": 0,
}

DEFAULT_HISTORY = {
    "enabled": True,
    "max_experiments": 200,
}

DEFAULTS = {
    "ga": DEFAULT_GA,
    "pso": DEFAULT_PSO,
    "gwo": DEFAULT_GWO,
    "attack": DEFAULT_ATTACK,
    "bench": DEFAULT_BENCH,
    "history": DEFAULT_HISTORY,
}


def get_home_dir() -> Path:
    return Path.home() / ".swarmlab"


def get_config_path() -> Path:
    override = os.getenv("SWARMLAB_CONFIG_PATH")
    if override:
        return Path(override).expanduser()
    return get_home_dir() / "config.json"


def load_config() -> dict:
    config_path = get_config_path()
    if not config_path.exists():
        return {}
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except Exception as e:
        console.print(f"Warning: Could not load config: {e}", style=Colors.YELLOW)
        return {}


def save_config(config: dict) -> None:
    config_path = get_config_path()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)


def ensure_defaults() -> dict:
    config = load_config()
    changed = False
    for section, defaults in DEFAULTS.items():
        existing = config.get(section)
        if not isinstance(existing, dict):
            config[section] = defaults.copy()
            changed = True
            continue
        for key, value in defaults.items():
            if key not in existing:
                existing[key] = value
                changed = True
    if changed:
        save_config(config)
    return config


def get_section(name: str) -> dict:
    config = load_config()
    defaults = DEFAULTS.get(name, {})
    section = config.get(name, {})
    if not isinstance(section, dict):
        section = {}
    merged = defaults.copy()
    merged.update(section)
    return merged
