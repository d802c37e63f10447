"""Run-history ledger: one Experiment row per bench/attack invocation."""

from datetime import datetime
from pathlib import Path

from peewee import (
    CharField,
    DateTimeField,
    FloatField,
    ForeignKeyField,
    IntegerField,
    Model,
    SqliteDatabase,
)

from swarmlab import config as swarmlab_config
from swarmlab.rich_utils import Colors, console, print_warning

# Bound to a file by initialize(); the home directory is only resolved then.
db = SqliteDatabase(None)


class BaseModel(Model):
    class Meta:
        database = db


class Experiment(BaseModel):
    kind = CharField()
    name = CharField()
    master_seed = CharField()
    output_dir = CharField()
    created_at = DateTimeField(default=datetime.now)


class RunResult(BaseModel):
    experiment = ForeignKeyField(Experiment, backref="runs", on_delete="CASCADE")
    function = CharField()
    algorithm = CharField()
    run_index = IntegerField()
    seed = CharField()
    final_value = FloatField()
    evaluations = IntegerField()


def get_db_path() -> Path:
    return swarmlab_config.get_home_dir() / "history.db"


def initialize(path: Path | None = None) -> None:
    """Open the ledger and create its tables."""
    path = Path(path) if path is not None else get_db_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    if db.database != str(path):
        if not db.is_closed():
            db.close()
        db.init(str(path), pragmas={"foreign_keys": 1})
    db.connect(reuse_if_open=True)
    db.create_tables([Experiment, RunResult], safe=True)


def shutdown_db() -> None:
    """Close the database connection if it is open."""
    try:
        if db.database is not None and not db.is_closed():
            db.close()
    except Exception as exc:
        print_warning(f"Failed to close history database: {exc}")


def prune(max_experiments: int) -> int:
    """Delete the oldest experiments beyond ``max_experiments``; returns how many went."""
    keep = (
        Experiment.select(Experiment.id)
        .order_by(Experiment.created_at.desc(), Experiment.id.desc())
        .limit(max_experiments)
    )
    stale = [e.id for e in Experiment.select(Experiment.id).where(Experiment.id.not_in(keep))]
    if not stale:
        return 0
    with db.atomic():
        RunResult.delete().where(RunResult.experiment.in_(stale)).execute()
        Experiment.delete().where(Experiment.id.in_(stale)).execute()
    return len(stale)


def record_experiment(
    kind: str,
    name: str,
    master_seed: int,
    output_dir: str | Path,
    runs: list[dict] | None = None,
) -> int | None:
    """
    Append an invocation and its runs to the ledger.

    Failures print a warning and return None; a broken ledger never fails a run.
    """
    settings = swarmlab_config.get_section("history")
    if not settings.get("enabled", True):
        return None
    try:
        initialize()
        with db.atomic():
            experiment = Experiment.create(
                kind=kind, name=name, master_seed=str(master_seed), output_dir=str(output_dir)
            )
            for run in runs or []:
                RunResult.create(
                    experiment=experiment,
                    function=run["function"],
                    algorithm=run["algorithm"],
                    run_index=run["run_index"],
                    seed=str(run["seed"]),
                    final_value=run["final_value"],
                    evaluations=run["evaluations"],
                )
        removed = prune(int(settings.get("max_experiments", 200)))
        if removed:
            console.print(f"🧹 History cleanup: removed {removed} old experiments", style=Colors.GREY)
        return experiment.id
    except Exception as exc:
        print_warning(f"Could not record run history: {exc}")
        return None
    finally:
        shutdown_db()


def get_recent_experiments(limit: int = 10) -> list[dict]:
    initialize()
    try:
        experiments = []
        for exp in Experiment.select().order_by(Experiment.created_at.desc(), Experiment.id.desc()).limit(limit):
            experiments.append(
                {
                    "id": exp.id,
                    "kind": exp.kind,
                    "name": exp.name,
                    "master_seed": exp.master_seed,
                    "output_dir": exp.output_dir,
                    "runs": exp.runs.count(),
                    "created_at": exp.created_at.isoformat(timespec="seconds"),
                }
            )
        return experiments
    finally:
        shutdown_db()


def get_experiment_runs(experiment_id: int) -> list[dict]:
    initialize()
    try:
        return [
            {
                "function": run.function,
                "algorithm": run.algorithm,
                "run_index": run.run_index,
                "seed": run.seed,
                "final_value": run.final_value,
                "evaluations": run.evaluations,
            }
            for run in RunResult.select()
            .where(RunResult.experiment == experiment_id)
            .order_by(RunResult.id)
        ]
    finally:
        shutdown_db()
