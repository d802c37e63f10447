"""
Black-box adversarial images from an improved genetic algorithm.

The attacker only sees label confidences. A population of 784-bit binary
images evolves toward maximum confidence of one target label using roulette
selection, exhaustive-split crossover and half-split mutation.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from swarmlab import config as swarmlab_config
from swarmlab.encoding import Chromosome, random_chromosome
from swarmlab.errors import InvalidArgumentError, InvariantViolation, ModelError, OracleError
from swarmlab.idx import IMAGE_PIXELS
from swarmlab.models import NUM_LABELS, ClassifierModel
from swarmlab.operators import crossover_best, mutate_half, select_parents

INIT_MODES = ("random", "dataset")
SUM_TOLERANCE = 1e-6
# Split children scored this close to the best are re-scored through the batch path.
RESCORE_WINDOW = 1e-9

AttackCallback = Callable[[int, float], None]


class ClassifierOracle(ABC):
    """Label confidences for binary 28x28 images; implementations must be deterministic."""

    reentrant: bool = False

    @abstractmethod
    def classify(self, bits: np.ndarray) -> np.ndarray:
        """Confidence vector over the 10 labels for one 784-bit image."""

    def classify_batch(self, bits: np.ndarray) -> np.ndarray:
        return np.stack([np.asarray(self.classify(row), dtype=float) for row in np.atleast_2d(bits)])


class MlpOracle(ClassifierOracle):
    """Oracle backed by a dense :class:`ClassifierModel`."""

    reentrant = True

    def __init__(self, model: ClassifierModel):
        self.model = model

    def classify(self, bits: np.ndarray) -> np.ndarray:
        return mlp_classify(self.model, bits)

    def classify_batch(self, bits: np.ndarray) -> np.ndarray:
        return self.model.forward(np.atleast_2d(np.asarray(bits, dtype=float)))

    def classify_splits(self, father_bits: np.ndarray, mother_bits: np.ndarray) -> np.ndarray:
        """
        Confidences of every split child ``father[0:i] ++ mother[i:]``.

        Child ``i`` differs from the mother only on genes below ``i``, so its
        first-layer pre-activation is the mother's plus a running sum of the
        weight columns where the parents disagree. Matches ``classify_batch``
        on the candidate matrix up to floating-point rounding.
        """
        father = np.asarray(father_bits, dtype=float).reshape(-1)
        mother = np.asarray(mother_bits, dtype=float).reshape(-1)
        first = self.model.layers[0]
        base = first.pre_activation(mother[np.newaxis, :])
        steps = first.weights.T * (father - mother)[:, np.newaxis]
        running = np.cumsum(steps, axis=0)
        shifts = np.vstack([np.zeros((1, first.rows)), running[:-1]])
        return self.model.forward_from_first(base + shifts)


def mlp_classify(model: ClassifierModel, bits: Chromosome | np.ndarray) -> np.ndarray:
    x = np.asarray(getattr(bits, "bits", bits), dtype=float).reshape(-1)
    if x.size != IMAGE_PIXELS:
        raise ModelError(f"Model expects {IMAGE_PIXELS} inputs, got {x.size}")
    return model.forward(x[np.newaxis, :])[0]


def binarize(image: np.ndarray, threshold: int = 128) -> Chromosome:
    pixels = np.asarray(image).reshape(-1)
    if pixels.size != IMAGE_PIXELS:
        raise InvalidArgumentError(f"Image must have {IMAGE_PIXELS} pixels, got {pixels.size}")
    if not 0 <= threshold <= 255:
        raise InvalidArgumentError(f"threshold must lie in [0, 255], got {threshold}")
    return Chromosome((pixels >= threshold).astype(np.uint8))


def check_confidences(confidences: np.ndarray, rows: int) -> np.ndarray:
    probs = np.asarray(confidences, dtype=float)
    if probs.shape != (rows, NUM_LABELS):
        raise OracleError(f"Oracle returned shape {probs.shape}, expected ({rows}, {NUM_LABELS})")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise OracleError("Oracle returned negative or non-finite confidences")
    sums = probs.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOLERANCE)
    if bad.size:
        raise OracleError(f"Oracle confidences sum to {sums[bad[0]]!r}, not 1")
    return probs


@dataclass(frozen=True)
class AttackParams:
    target_label: int = 0
    population_size: int = 100
    iterations: int = 100
    mutation_rate: float = 0.025
    init_mode: str = "random"
    threshold: int = 128

    def __post_init__(self) -> None:
        if not 0 <= self.target_label < NUM_LABELS:
            raise InvalidArgumentError(f"target_label must lie in [0, {NUM_LABELS}), got {self.target_label}")
        if self.population_size < 2:
            raise InvalidArgumentError("population_size must be >= 2")
        if self.iterations < 1:
            raise InvalidArgumentError("iterations must be >= 1")
        if not 0.0 <= self.mutation_rate <= 0.5:
            raise InvalidArgumentError("mutation_rate must lie in [0, 0.5]")
        if self.init_mode not in INIT_MODES:
            raise InvalidArgumentError(f"init_mode must be one of {', '.join(INIT_MODES)}")
        if not 0 <= self.threshold <= 255:
            raise InvalidArgumentError("threshold must lie in [0, 255]")

    @classmethod
    def from_config(cls, overrides: dict[str, Any] | None = None) -> "AttackParams":
        section = swarmlab_config.get_section("attack")
        values = {
            "population_size": section["population_size"],
            "iterations": section["iterations"],
            "mutation_rate": section["mutation_rate"],
            "init_mode": section["init"],
            "threshold": section["threshold"],
        }
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return cls(**values)
        except TypeError as exc:
            raise InvalidArgumentError(f"Invalid AttackParams fields: {exc}") from exc

    def expected_queries(self) -> int:
        n = self.population_size
        return n + (self.iterations - 1) * (n * IMAGE_PIXELS + n)


@dataclass
class AttackRecord:
    target_label: int
    init_mode: str
    seed: int
    confidence_curve: list[float]
    final_bits: Chromosome
    final_confidence: float
    initial_confidence: float
    oracle_query_count: int
    params: AttackParams = field(default_factory=AttackParams)

    def to_metadata(self) -> dict[str, Any]:
        return {
            "label": self.target_label,
            "initialize": self.init_mode,
            "iteration": len(self.confidence_curve),
            "confidence": self.final_confidence,
            "initial_confidence": self.initial_confidence,
            "seed": self.seed,
            "oracle_queries": self.oracle_query_count,
            "population_size": self.params.population_size,
            "mutation_rate": self.params.mutation_rate,
            "threshold": self.params.threshold,
        }

    def check_invariants(self) -> "AttackRecord":
        curve = np.asarray(self.confidence_curve, dtype=float)
        if curve.size == 0 or np.any(np.diff(curve) < 0):
            raise InvariantViolation("Attack confidence curve is not non-decreasing")
        if self.final_confidence != curve[-1] or self.initial_confidence != curve[0]:
            raise InvariantViolation("Attack confidences disagree with the curve end points")
        expected = self.params.expected_queries()
        if self.oracle_query_count != expected:
            raise InvariantViolation(f"Attack made {self.oracle_query_count} oracle queries, expected {expected}")
        return self


class OracleFitness:
    """Target-label confidence as a GA fitness; counts oracle queries."""

    def __init__(self, oracle: ClassifierOracle, target_label: int, executor: Executor | None = None):
        self.oracle = oracle
        self.target_label = target_label
        self.executor = executor if oracle.reentrant else None
        self.queries = 0
        if callable(getattr(oracle, "classify_splits", None)):
            self.evaluate_splits = self._evaluate_splits

    def _classify(self, matrix: np.ndarray) -> np.ndarray:
        if self.executor is not None:
            probs = np.stack(list(self.executor.map(self.oracle.classify, matrix)))
        else:
            probs = self.oracle.classify_batch(matrix)
        return check_confidences(probs, matrix.shape[0])

    def evaluate_batch(self, bits: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(bits)
        self.queries += matrix.shape[0]
        return self._classify(matrix)[:, self.target_label]

    def _evaluate_splits(self, father_bits: np.ndarray, mother_bits: np.ndarray) -> np.ndarray:
        """
        Split scores from the oracle's prefix-sum pass.

        Candidates near the best are re-scored through the regular batch path
        so the winning split matches per-candidate scoring. The re-scored
        children are the same queries and are not counted twice.
        """
        length = father_bits.size
        self.queries += length
        probs = check_confidences(self.oracle.classify_splits(father_bits, mother_bits), length)
        scores = probs[:, self.target_label].copy()
        near = np.flatnonzero(scores >= scores.max() - RESCORE_WINDOW)
        prefix = np.arange(length)[np.newaxis, :] < near[:, np.newaxis]
        rows = np.where(prefix, father_bits[np.newaxis, :], mother_bits[np.newaxis, :])
        scores[near] = self._classify(rows)[:, self.target_label]
        return scores

    def __call__(self, chromosome: Chromosome) -> float:
        return float(self.evaluate_batch(chromosome.bits[np.newaxis, :])[0])


def _initial_population(
    params: AttackParams, rng: np.random.Generator, seed_images: Optional[np.ndarray]
) -> list[Chromosome]:
    n = params.population_size
    if params.init_mode == "random":
        return [random_chromosome(IMAGE_PIXELS, rng) for _ in range(n)]

    if seed_images is None or len(seed_images) == 0:
        raise InvalidArgumentError("Dataset initialization needs at least one seed image")
    images = np.asarray(seed_images).reshape(len(seed_images), -1)
    if len(images) >= n:
        picks = rng.choice(len(images), size=n, replace=False)
    else:
        picks = rng.integers(0, len(images), size=n)
    return [binarize(images[i], params.threshold) for i in picks]


def run_attack(
    oracle: ClassifierOracle,
    params: AttackParams | None = None,
    seed: int = 0,
    seed_images: np.ndarray | None = None,
    *,
    executor: Executor | None = None,
    on_generation: AttackCallback | None = None,
) -> AttackRecord:
    """Evolve a binary image maximizing ``oracle`` confidence in the target label."""
    params = params or AttackParams()
    rng = np.random.default_rng(seed)
    fitness = OracleFitness(oracle, params.target_label, executor)

    population = _initial_population(params, rng, seed_images)
    values = fitness.evaluate_batch(np.stack([c.bits for c in population]))

    best_idx = int(np.argmax(values))
    best_value = float(values[best_idx])
    best_bits = population[best_idx]
    initial_confidence = best_value
    curve = [best_value]
    if on_generation is not None:
        on_generation(0, best_value)

    for generation in range(1, params.iterations):
        children = []
        for _ in range(params.population_size):
            f, m = select_parents(values, rng)
            child = crossover_best(population[f], population[m], fitness, executor)
            children.append(mutate_half(child, params.mutation_rate, rng))

        population = children
        values = fitness.evaluate_batch(np.stack([c.bits for c in population]))
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value = float(values[idx])
            best_bits = population[idx]
        curve.append(best_value)
        if on_generation is not None:
            on_generation(generation, best_value)

    return AttackRecord(
        target_label=params.target_label,
        init_mode=params.init_mode,
        seed=int(seed),
        confidence_curve=curve,
        final_bits=best_bits,
        final_confidence=best_value,
        initial_confidence=initial_confidence,
        oracle_query_count=fitness.queries,
        params=params,
    ).check_invariants()
