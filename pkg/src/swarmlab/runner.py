"""Execute an experiment grid on a thread pool, returning results in plan order."""

from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional

from swarmlab.benchmarks import make_problem
from swarmlab.experiment_config import ExperimentConfig
from swarmlab.optimizers import RunRecord, run_algorithm
from swarmlab.rich_utils import create_bar_progress


@dataclass(frozen=True)
class RunTask:
    index: int
    function: str
    algorithm: str
    run_index: int
    seed: int


def plan_runs(config: ExperimentConfig) -> List[RunTask]:
    """Every (function, algorithm, run) triple, functions outermost."""
    tasks: List[RunTask] = []
    for function in config.functions:
        for algorithm in config.algorithms:
            for run_index in range(config.repeats):
                tasks.append(
                    RunTask(
                        index=len(tasks),
                        function=function,
                        algorithm=algorithm,
                        run_index=run_index,
                        seed=config.seed_for(run_index),
                    )
                )
    return tasks


def execute_task(config: ExperimentConfig, task: RunTask) -> RunRecord:
    problem = make_problem(task.function)
    params = config.resolved_params(task.algorithm)
    return run_algorithm(task.algorithm, problem, params, task.seed)


def execute_plan(
    config: ExperimentConfig,
    tasks: Optional[List[RunTask]] = None,
    workers: Optional[int] = None,
    quiet: bool = False,
) -> List[RunRecord]:
    """
    Run every task and return the records indexed like ``tasks``.

    The first failing run re-raises its exception once the pool drains.
    """
    tasks = plan_runs(config) if tasks is None else tasks
    results: List[Optional[RunRecord]] = [None] * len(tasks)
    max_workers = max(1, min(workers or config.workers, len(tasks) or 1))

    progress = None if quiet else create_bar_progress(f"Running {config.name}")
    if progress is not None:
        progress.start()
        bar = progress.add_task(f"Running {config.name}", total=len(tasks))

    try:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures: Dict[Future[RunRecord], int] = {
                executor.submit(execute_task, config, task): position
                for position, task in enumerate(tasks)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                if progress is not None:
                    progress.advance(bar)
    finally:
        if progress is not None:
            progress.stop()

    return [record for record in results if record is not None]
