"""
Genetic operators.

Roulette selection is shared by both genetic algorithms. ``crossover_best`` and
``mutate_half`` are the improved operators; ``crossover_single_point`` and
``mutate_simple`` are the simple-GA ones.
"""

from __future__ import annotations

from concurrent.futures import Executor
from typing import Callable, Protocol, Sequence, Union, runtime_checkable

import numpy as np

from swarmlab.encoding import Chromosome, splice
from swarmlab.errors import DegenerateSelectionError, InvalidArgumentError, InvalidPairError

SELECTION_EPSILON = 1e-12
# Split scores this close to the best (relative, floored at 1) count as ties.
SPLIT_TIE_TOLERANCE = 1e-12


@runtime_checkable
class BatchFitness(Protocol):
    """Fitness that can score many gene rows at once."""

    def __call__(self, chromosome: Chromosome) -> float: ...

    def evaluate_batch(self, bits: np.ndarray) -> np.ndarray: ...


FitnessFn = Union[Callable[[Chromosome], float], BatchFitness]


def _check_pair(father: Chromosome, mother: Chromosome) -> None:
    if father.length != mother.length:
        raise InvalidPairError(f"Parent lengths differ: {father.length} != {mother.length}")


def _check_rate(rate: float, upper: float, name: str) -> None:
    if not 0.0 <= rate <= upper:
        raise InvalidArgumentError(f"{name} must lie in [0, {upper}], got {rate}")


def roulette_select(weights: Sequence[float] | np.ndarray, rng: np.random.Generator) -> int:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidArgumentError("weights must be a non-empty 1-D sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidArgumentError("weights must be finite and non-negative")
    cumulative = np.cumsum(w)
    total = cumulative[-1]
    if total <= 0:
        raise DegenerateSelectionError("All roulette weights are zero")
    u = rng.random() * total
    index = int(np.searchsorted(cumulative, u, side="right"))
    return min(index, w.size - 1)


def minimization_weights(values: Sequence[float] | np.ndarray, epsilon: float = SELECTION_EPSILON) -> np.ndarray:
    """Shift objective values so the smallest gets the largest non-negative weight."""
    v = np.asarray(values, dtype=float)
    return (v.max() - v) + epsilon


def select_parents(
    weights: Sequence[float] | np.ndarray,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> tuple[int, int]:
    """Roulette father and mother, re-drawing the mother until her index differs."""
    w = np.asarray(weights, dtype=float)
    n = w.size
    attempts = n if max_attempts is None else max_attempts

    try:
        father = roulette_select(w, rng)
        uniform = False
    except DegenerateSelectionError:
        father = int(rng.integers(n))
        uniform = True

    def draw() -> int:
        return int(rng.integers(n)) if uniform else roulette_select(w, rng)

    mother = draw()
    tries = 1
    while mother == father and tries < attempts and n > 1:
        mother = draw()
        tries += 1
    return father, mother


def crossover_candidates(father: Chromosome, mother: Chromosome) -> np.ndarray:
    """Row ``i`` is ``father[0:i] ++ mother[i:]`` for ``i`` in ``[0, length)``."""
    _check_pair(father, mother)
    length = father.length
    take_father = np.arange(length)[np.newaxis, :] < np.arange(length)[:, np.newaxis]
    return np.where(take_father, father.bits[np.newaxis, :], mother.bits[np.newaxis, :]).astype(np.uint8)


def _score_candidates(
    father: Chromosome,
    mother: Chromosome,
    fitness: FitnessFn,
    executor: Executor | None,
) -> np.ndarray:
    evaluate_splits = getattr(fitness, "evaluate_splits", None)
    if callable(evaluate_splits):
        return np.asarray(evaluate_splits(father.bits, mother.bits), dtype=float)

    candidates = crossover_candidates(father, mother)
    evaluate_batch = getattr(fitness, "evaluate_batch", None)
    if callable(evaluate_batch):
        return np.asarray(evaluate_batch(candidates), dtype=float)

    children = [Chromosome(row) for row in candidates]
    if executor is not None:
        return np.fromiter(executor.map(fitness, children), dtype=float, count=len(children))
    return np.fromiter((fitness(child) for child in children), dtype=float, count=len(children))


def best_split_index(scores: np.ndarray) -> int:
    """Smallest index whose score ties the maximum within ``SPLIT_TIE_TOLERANCE``."""
    best = float(np.max(scores))
    if not np.isfinite(best):
        raise InvalidArgumentError(f"Best split score must be finite, got {best!r}")
    slack = SPLIT_TIE_TOLERANCE * max(abs(best), 1.0)
    return int(np.flatnonzero(scores >= best - slack)[0])


def crossover_best(
    father: Chromosome,
    mother: Chromosome,
    fitness: FitnessFn,
    executor: Executor | None = None,
) -> Chromosome:
    """
    Try every split point and keep the fittest child.

    Exactly ``length`` fitness evaluations are made. Ties resolve to the
    smallest split index, where scores within ``SPLIT_TIE_TOLERANCE`` of the
    best count as tied, so batched and per-candidate scoring pick the same
    child. A pure father clone is not among the candidates.
    """
    _check_pair(father, mother)
    scores = _score_candidates(father, mother, fitness, executor)
    if scores.shape != (father.length,):
        raise InvalidArgumentError(
            f"Fitness returned {scores.shape} scores for {father.length} split candidates"
        )
    best_split = best_split_index(scores)
    return splice(father, mother, best_split)


def half_split_rates(length: int, base_rate: float) -> np.ndarray:
    """Per-position flip probability: base rate up to ``length // 2``, doubled after."""
    rates = np.full(length, base_rate, dtype=float)
    rates[np.arange(length) > length // 2] = 2.0 * base_rate
    return rates


def mutate_half(child: Chromosome, base_rate: float, rng: np.random.Generator) -> Chromosome:
    _check_rate(base_rate, 0.5, "base_rate")
    flips = rng.random(child.length) < half_split_rates(child.length, base_rate)
    if not flips.any():
        return child
    return Chromosome(np.bitwise_xor(child.bits, flips.astype(np.uint8)))


def crossover_single_point(
    father: Chromosome, mother: Chromosome, rng: np.random.Generator
) -> Chromosome:
    _check_pair(father, mother)
    split = int(rng.integers(0, father.length))
    return splice(father, mother, split)


def mutate_simple(child: Chromosome, rate: float, rng: np.random.Generator) -> Chromosome:
    _check_rate(rate, 1.0, "rate")
    if rng.random() >= rate:
        return child
    bits = child.bits.copy()
    position = int(rng.integers(0, child.length))
    bits[position] ^= 1
    return Chromosome(bits)
