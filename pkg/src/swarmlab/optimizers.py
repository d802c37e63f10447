"""
Optimizer drivers behind one interface.

Every driver takes a :class:`Problem`, its parameter object and a seed, and
returns a :class:`RunRecord`. Generation 0 is the evaluation of the initial
population, so a run with ``iterations = 101`` records 101 curve entries.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from swarmlab import config as swarmlab_config
from swarmlab.encoding import (
    Chromosome,
    SearchDomain,
    bits_per_variable,
    decode_batch,
    random_chromosome,
)
from swarmlab.errors import InvalidArgumentError, InvariantViolation
from swarmlab.operators import (
    crossover_best,
    crossover_single_point,
    minimization_weights,
    mutate_half,
    mutate_simple,
    select_parents,
)

GenerationCallback = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class Problem:
    """Objective to minimize over a box, with its known optimum."""

    name: str
    objective: Callable[[np.ndarray], np.ndarray]
    domain: SearchDomain
    global_minimum_value: float
    global_minimizer: tuple[float, ...]

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Objective values for an ``(n, n_vars)`` array of points."""
        return np.asarray(self.objective(np.atleast_2d(points)), dtype=float).reshape(-1)

    def evaluate(self, point: Sequence[float] | np.ndarray) -> float:
        return float(self.evaluate_many(np.asarray(point, dtype=float)[np.newaxis, :])[0])


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidArgumentError(message)


def _build(cls, values: dict[str, Any]):
    try:
        return cls(**values)
    except TypeError as exc:
        raise InvalidArgumentError(f"Invalid {cls.__name__} fields: {exc}") from exc


@dataclass(frozen=True)
class GaParams:
    iterations: int = 101
    population_size: int = 50
    gene_length: int = 30
    mutation_rate: float = 0.025
    elitism: bool = False
    max_mother_attempts: Optional[int] = None

    def __post_init__(self) -> None:
        _require(self.iterations >= 1, "iterations must be >= 1")
        _require(self.population_size >= 2, "population_size must be >= 2 (two parents required)")
        _require(self.gene_length >= 1, "gene_length must be >= 1")
        _require(0.0 <= self.mutation_rate <= 1.0, "mutation_rate must lie in [0, 1]")
        _require(
            self.max_mother_attempts is None or self.max_mother_attempts >= 1,
            "max_mother_attempts must be >= 1",
        )

    @classmethod
    def from_config(cls, algorithm: str = "IGA", overrides: dict[str, Any] | None = None) -> "GaParams":
        section = swarmlab_config.get_section("ga")
        rate_key = "sga_mutation_rate" if algorithm.upper() == "SGA" else "iga_mutation_rate"
        values = {
            "iterations": section["iterations"],
            "population_size": section["population_size"],
            "gene_length": section["gene_length"],
            "mutation_rate": section[rate_key],
            "elitism": section["elitism"],
            "max_mother_attempts": section.get("max_mother_attempts"),
        }
        values.update(overrides or {})
        return _build(cls, values)


@dataclass(frozen=True)
class PsoParams:
    iterations: int = 101
    population_size: int = 50
    w: float = 1.0
    c1: float = 1.49445
    c2: float = 1.49445
    v_max: Optional[tuple[float, ...]] = None
    v_max_fraction: float = 0.5

    def __post_init__(self) -> None:
        _require(self.iterations >= 1, "iterations must be >= 1")
        _require(self.population_size >= 2, "population_size must be >= 2")
        _require(self.v_max_fraction > 0, "v_max_fraction must be positive")
        if self.v_max is not None:
            object.__setattr__(self, "v_max", tuple(float(v) for v in self.v_max))
            _require(all(v > 0 for v in self.v_max), "v_max entries must be positive")

    def velocity_limit(self, domain: SearchDomain) -> np.ndarray:
        if self.v_max is not None:
            _require(len(self.v_max) == domain.n_vars, "v_max must have one entry per variable")
            return np.asarray(self.v_max, dtype=float)
        return domain.width * self.v_max_fraction

    @classmethod
    def from_config(cls, algorithm: str = "PSO", overrides: dict[str, Any] | None = None) -> "PsoParams":
        values = dict(swarmlab_config.get_section("pso"))
        values.update(overrides or {})
        return _build(cls, values)


@dataclass(frozen=True)
class GwoParams:
    iterations: int = 101
    population_size: int = 50
    a_start: float = 2.0

    def __post_init__(self) -> None:
        _require(self.iterations >= 1, "iterations must be >= 1")
        _require(self.population_size >= 2, "population_size must be >= 2")
        _require(self.a_start >= 0, "a_start must be non-negative")

    def a_at(self, generation: int) -> float:
        """Exploration coefficient, decaying linearly to 0 at the last generation."""
        if self.iterations <= 1:
            return 0.0
        return self.a_start * (1.0 - generation / (self.iterations - 1))

    @classmethod
    def from_config(cls, algorithm: str = "GWO", overrides: dict[str, Any] | None = None) -> "GwoParams":
        values = dict(swarmlab_config.get_section("gwo"))
        values.update(overrides or {})
        return _build(cls, values)


@dataclass
class RunRecord:
    algorithm: str
    function: str
    seed: int
    best_so_far_curve: list[float]
    best_of_generation_curve: list[float]
    final_population: np.ndarray
    final_best_value: float
    final_best_position: np.ndarray
    evaluation_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "function": self.function,
            "seed": self.seed,
            "best_so_far_curve": list(self.best_so_far_curve),
            "best_of_generation_curve": list(self.best_of_generation_curve),
            "final_population": self.final_population.tolist(),
            "final_best_value": self.final_best_value,
            "final_best_position": self.final_best_position.tolist(),
            "evaluation_count": self.evaluation_count,
        }

    def check_invariants(self, domain: SearchDomain) -> "RunRecord":
        curve = np.asarray(self.best_so_far_curve, dtype=float)
        if curve.size == 0 or np.any(np.diff(curve) > 0):
            raise InvariantViolation(f"{self.algorithm} best-so-far curve is not non-increasing")
        if self.final_best_value != curve[-1]:
            raise InvariantViolation(
                f"{self.algorithm} final best {self.final_best_value!r} differs from the last curve entry {curve[-1]!r}"
            )
        if not (domain.contains(self.final_population) and domain.contains(self.final_best_position)):
            raise InvariantViolation(f"{self.algorithm} reported a position outside the search domain")
        return self


@dataclass
class _Tracker:
    on_generation: Optional[GenerationCallback] = None
    best_value: float = float("inf")
    best_position: Optional[np.ndarray] = None
    best_so_far: list[float] = field(default_factory=list)
    best_of_generation: list[float] = field(default_factory=list)

    def record(self, generation: int, positions: np.ndarray, values: np.ndarray) -> None:
        idx = int(np.argmin(values))
        self.best_of_generation.append(float(values[idx]))
        if values[idx] < self.best_value:
            self.best_value = float(values[idx])
            self.best_position = positions[idx].copy()
        self.best_so_far.append(self.best_value)
        if self.on_generation is not None:
            self.on_generation(generation, positions, values)

    def finish(self, tag: str, problem: Problem, seed: int, positions: np.ndarray, evaluations: int) -> RunRecord:
        return RunRecord(
            algorithm=tag,
            function=problem.name,
            seed=int(seed),
            best_so_far_curve=self.best_so_far,
            best_of_generation_curve=self.best_of_generation,
            final_population=np.asarray(positions, dtype=float).copy(),
            final_best_value=self.best_value,
            final_best_position=np.asarray(self.best_position, dtype=float),
            evaluation_count=evaluations,
        ).check_invariants(problem.domain)


class DecodedFitness:
    """Negated objective of the decoded point; counts every evaluation."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.evaluations = 0

    def objective_values(self, bits: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(bits)
        self.evaluations += matrix.shape[0]
        return self.problem.evaluate_many(decode_batch(matrix, self.problem.domain))

    def evaluate_batch(self, bits: np.ndarray) -> np.ndarray:
        return -self.objective_values(bits)

    def __call__(self, chromosome: Chromosome) -> float:
        return float(self.evaluate_batch(chromosome.bits[np.newaxis, :])[0])


def _stack(population: list[Chromosome]) -> np.ndarray:
    return np.stack([c.bits for c in population])


def _run_ga(
    tag: str,
    problem: Problem,
    params: GaParams,
    seed: int,
    breed: Callable[[Chromosome, Chromosome, DecodedFitness, np.random.Generator], Chromosome],
    on_generation: Optional[GenerationCallback],
) -> RunRecord:
    bits_per_variable(params.gene_length, problem.domain)
    rng = np.random.default_rng(seed)
    fitness = DecodedFitness(problem)
    tracker = _Tracker(on_generation)

    population = [random_chromosome(params.gene_length, rng) for _ in range(params.population_size)]
    matrix = _stack(population)
    values = fitness.objective_values(matrix)
    positions = decode_batch(matrix, problem.domain)
    tracker.record(0, positions, values)

    for generation in range(1, params.iterations):
        weights = minimization_weights(values)
        elite = population[int(np.argmin(values))]
        elite_value = float(values.min())

        children = []
        for _ in range(params.population_size):
            f, m = select_parents(weights, rng, params.max_mother_attempts)
            children.append(breed(population[f], population[m], fitness, rng))

        matrix = _stack(children)
        values = fitness.objective_values(matrix)
        if params.elitism:
            worst = int(np.argmax(values))
            children[worst] = elite
            matrix[worst] = elite.bits
            values[worst] = elite_value

        population = children
        positions = decode_batch(matrix, problem.domain)
        tracker.record(generation, positions, values)

    return tracker.finish(tag, problem, seed, positions, fitness.evaluations)


def run_iga(
    problem: Problem,
    params: GaParams | None = None,
    seed: int = 0,
    *,
    executor: Executor | None = None,
    on_generation: GenerationCallback | None = None,
) -> RunRecord:
    """Genetic algorithm with exhaustive-split crossover and half-split mutation."""
    params = params or GaParams()
    if params.mutation_rate > 0.5:
        raise InvalidArgumentError("IGA base mutation rate must lie in [0, 0.5]")

    def breed(father, mother, fitness, rng):
        child = crossover_best(father, mother, fitness, executor)
        return mutate_half(child, params.mutation_rate, rng)

    return _run_ga("IGA", problem, params, seed, breed, on_generation)


def run_sga(
    problem: Problem,
    params: GaParams | None = None,
    seed: int = 0,
    *,
    on_generation: GenerationCallback | None = None,
) -> RunRecord:
    """Simple genetic algorithm: single-point crossover, single-gene mutation."""
    params = params or GaParams(mutation_rate=0.2)

    def breed(father, mother, fitness, rng):
        child = crossover_single_point(father, mother, rng)
        return mutate_simple(child, params.mutation_rate, rng)

    return _run_ga("SGA", problem, params, seed, breed, on_generation)


def _initial_positions(
    problem: Problem, n: int, rng: np.random.Generator, initial_positions: np.ndarray | None
) -> np.ndarray:
    domain = problem.domain
    if initial_positions is None:
        return rng.uniform(domain.lower_array, domain.upper_array, size=(n, domain.n_vars))
    positions = np.asarray(initial_positions, dtype=float)
    if positions.shape != (n, domain.n_vars):
        raise InvalidArgumentError(f"initial_positions must have shape {(n, domain.n_vars)}")
    return domain.clip(positions.copy())


def run_pso(
    problem: Problem,
    params: PsoParams | None = None,
    seed: int = 0,
    *,
    initial_positions: np.ndarray | None = None,
    on_generation: GenerationCallback | None = None,
) -> RunRecord:
    """Global-best particle swarm with velocity and position clamping."""
    params = params or PsoParams()
    rng = np.random.default_rng(seed)
    domain = problem.domain
    n, d = params.population_size, domain.n_vars
    v_max = params.velocity_limit(domain)
    tracker = _Tracker(on_generation)

    x = _initial_positions(problem, n, rng, initial_positions)
    v = np.zeros((n, d))
    values = problem.evaluate_many(x)
    evaluations = n
    pbest, pbest_values = x.copy(), values.copy()
    g = int(np.argmin(pbest_values))
    gbest = pbest[g].copy()
    tracker.record(0, x, values)

    for generation in range(1, params.iterations):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        v = params.w * v + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (gbest - x)
        v = np.clip(v, -v_max, v_max)
        x = domain.clip(x + v)
        values = problem.evaluate_many(x)
        evaluations += n

        improved = values < pbest_values
        pbest[improved] = x[improved]
        pbest_values[improved] = values[improved]
        g = int(np.argmin(pbest_values))
        gbest = pbest[g].copy()
        tracker.record(generation, x, values)

    return tracker.finish("PSO", problem, seed, x, evaluations)


def _leaders(positions: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(values, kind="stable")[:3]
    while order.size < 3:
        order = np.append(order, order[0])
    return positions[order].copy(), values[order].copy()


def run_gwo(
    problem: Problem,
    params: GwoParams | None = None,
    seed: int = 0,
    *,
    initial_positions: np.ndarray | None = None,
    on_generation: GenerationCallback | None = None,
) -> RunRecord:
    """Grey wolf optimizer led by the three best wolves found so far."""
    params = params or GwoParams()
    rng = np.random.default_rng(seed)
    domain = problem.domain
    n, d = params.population_size, domain.n_vars
    tracker = _Tracker(on_generation)

    x = _initial_positions(problem, n, rng, initial_positions)
    values = problem.evaluate_many(x)
    evaluations = n
    leaders, leader_values = _leaders(x, values)
    tracker.record(0, x, values)

    for generation in range(1, params.iterations):
        a = params.a_at(generation)
        candidate_sum = np.zeros((n, d))
        for leader in leaders:
            A = 2.0 * a * rng.random((n, d)) - a
            C = 2.0 * rng.random((n, d))
            distance = np.abs(C * leader - x)
            candidate_sum += leader - A * distance
        x = domain.clip(candidate_sum / 3.0)
        values = problem.evaluate_many(x)
        evaluations += n

        leaders, leader_values = _leaders(
            np.vstack((leaders, x)), np.concatenate((leader_values, values))
        )
        tracker.record(generation, x, values)

    return tracker.finish("GWO", problem, seed, x, evaluations)


@dataclass(frozen=True)
class Algorithm:
    tag: str
    driver: Callable[..., RunRecord]
    params_type: type


ALGORITHMS: dict[str, Algorithm] = {
    "IGA": Algorithm("IGA", run_iga, GaParams),
    "SGA": Algorithm("SGA", run_sga, GaParams),
    "PSO": Algorithm("PSO", run_pso, PsoParams),
    "GWO": Algorithm("GWO", run_gwo, GwoParams),
}


def get_algorithm(tag: str) -> Algorithm:
    algorithm = ALGORITHMS.get(tag.upper())
    if algorithm is None:
        raise InvalidArgumentError(
            f"Unknown algorithm '{tag}' (known: {', '.join(ALGORITHMS)})"
        )
    return algorithm


def default_params(tag: str, overrides: dict[str, Any] | None = None):
    """Parameters for an algorithm from the config file plus overrides."""
    algorithm = get_algorithm(tag)
    return algorithm.params_type.from_config(algorithm.tag, overrides)


def run_algorithm(tag: str, problem: Problem, params: Any = None, seed: int = 0, **kwargs) -> RunRecord:
    algorithm = get_algorithm(tag)
    if params is None:
        params = default_params(algorithm.tag)
    record = algorithm.driver(problem, params, seed, **kwargs)
    expected = expected_evaluations(algorithm.tag, params)
    if record.evaluation_count != expected:
        raise InvariantViolation(
            f"{algorithm.tag} reported {record.evaluation_count} evaluations, expected {expected}"
        )
    return record


def expected_evaluations(tag: str, params: Any, gene_length: int | None = None) -> int:
    """Evaluation count a complete run must report."""
    n, iterations = params.population_size, params.iterations
    if tag.upper() == "IGA":
        length = gene_length if gene_length is not None else params.gene_length
        return n + (iterations - 1) * (n * length + n)
    return n * iterations
