from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from swarmlab.encoding import Chromosome, random_chromosome, splice
from swarmlab.errors import DegenerateSelectionError, InvalidArgumentError, InvalidPairError
from swarmlab.operators import (
    BatchFitness,
    SELECTION_EPSILON,
    crossover_best,
    crossover_candidates,
    crossover_single_point,
    half_split_rates,
    minimization_weights,
    mutate_half,
    mutate_simple,
    roulette_select,
    select_parents,
)


def count_ones(chromosome: Chromosome) -> float:
    return float(chromosome.bits.sum())


class CountingFitness:
    """Plain callable that remembers every child it scored."""

    def __init__(self, fn):
        self.fn = fn
        self.seen: list[str] = []

    def __call__(self, chromosome: Chromosome) -> float:
        self.seen.append(str(chromosome))
        return self.fn(chromosome)


class WeightedBatchFitness:
    def __init__(self, weights: np.ndarray):
        self.weights = weights
        self.rows = 0

    def evaluate_batch(self, bits: np.ndarray) -> np.ndarray:
        self.rows += bits.shape[0]
        return bits @ self.weights

    def __call__(self, chromosome: Chromosome) -> float:
        return float(self.evaluate_batch(chromosome.bits[np.newaxis, :])[0])


# ---------------------------------------------------------------- selection


def test_roulette_single_weight_always_zero(rng):
    assert {roulette_select([7.0], rng) for _ in range(50)} == {0}


def test_roulette_never_picks_zero_weight(rng):
    assert {roulette_select([0.0, 5.0, 0.0], rng) for _ in range(500)} == {1}


def test_roulette_frequency_follows_weights(rng):
    picks = np.array([roulette_select([1.0, 3.0], rng) for _ in range(20_000)])
    assert abs(picks.mean() - 0.75) < 0.015


def test_roulette_rejects_bad_weights(rng):
    with pytest.raises(DegenerateSelectionError):
        roulette_select([0.0, 0.0], rng)
    with pytest.raises(InvalidArgumentError):
        roulette_select([], rng)
    with pytest.raises(InvalidArgumentError):
        roulette_select([1.0, -1.0], rng)
    with pytest.raises(InvalidArgumentError):
        roulette_select([1.0, np.nan], rng)


def test_minimization_weights_favour_smallest_value():
    weights = minimization_weights([3.0, 1.0, 2.0])
    assert weights.tolist() == pytest.approx([SELECTION_EPSILON, 2.0, 1.0])
    assert int(np.argmax(weights)) == 1
    assert np.all(minimization_weights([4.0, 4.0]) > 0)


def test_select_parents_redraws_mother(rng):
    for _ in range(200):
        father, mother = select_parents([1.0, 1.0], rng, max_attempts=200)
        assert father != mother


def test_select_parents_gives_up_after_attempt_budget(rng):
    assert select_parents([1.0, 0.0, 0.0], rng, max_attempts=5) == (0, 0)


def test_select_parents_falls_back_to_uniform_on_zero_weights(rng):
    pairs = [select_parents([0.0, 0.0, 0.0], rng) for _ in range(300)]
    picked = {i for pair in pairs for i in pair}
    assert picked == {0, 1, 2}


# ---------------------------------------------------------------- improved crossover


def test_crossover_candidates_are_every_split_below_length():
    father, mother = Chromosome.from_string("111"), Chromosome.from_string("000")
    rows = ["".join(map(str, row)) for row in crossover_candidates(father, mother)]
    assert rows == ["000", "100", "110"]


def test_crossover_best_finds_all_ones():
    fitness = CountingFitness(count_ones)
    child = crossover_best(Chromosome.from_string("1100"), Chromosome.from_string("0011"), fitness)
    assert str(child) == "1111"
    assert len(fitness.seen) == 4
    assert "1100" not in fitness.seen


def test_crossover_best_tie_takes_smallest_split():
    # Every candidate has the same fitness, so split 0 (the mother) wins.
    child = crossover_best(Chromosome.from_string("1010"), Chromosome.from_string("0101"), lambda c: 1.0)
    assert str(child) == "0101"


def test_crossover_best_matches_brute_force(rng):
    weights = rng.normal(size=40)
    for _ in range(25):
        father, mother = random_chromosome(40, rng), random_chromosome(40, rng)
        scores = [float(splice(father, mother, i).bits @ weights) for i in range(40)]
        expected = splice(father, mother, int(np.argmax(scores)))

        batched = WeightedBatchFitness(weights)
        assert crossover_best(father, mother, batched) == expected
        assert batched.rows == 40
        plain = CountingFitness(lambda c: float(c.bits @ weights))
        assert crossover_best(father, mother, plain) == expected


def test_crossover_best_executor_path_matches_serial(rng):
    weights = rng.normal(size=24)
    father, mother = random_chromosome(24, rng), random_chromosome(24, rng)

    def fitness(c):
        return float(c.bits @ weights)

    with ThreadPoolExecutor(max_workers=3) as pool:
        assert crossover_best(father, mother, fitness, pool) == crossover_best(father, mother, fitness)


def test_crossover_best_uses_split_evaluator_when_offered():
    class SplitFitness:
        def evaluate_splits(self, father_bits, mother_bits):
            scores = np.zeros(father_bits.size)
            scores[2] = 1.0
            return scores

        def __call__(self, chromosome):
            raise AssertionError("per-candidate path must not run")

    child = crossover_best(Chromosome.from_string("1111"), Chromosome.from_string("0000"), SplitFitness())
    assert str(child) == "1100"


def test_crossover_best_rejects_unequal_parents():
    with pytest.raises(InvalidPairError):
        crossover_best(Chromosome.from_string("11"), Chromosome.from_string("000"), count_ones)


def test_crossover_best_checks_score_count():
    class ShortScores:
        def evaluate_batch(self, bits):
            return np.zeros(1)

        def __call__(self, chromosome):
            return 0.0

    with pytest.raises(InvalidArgumentError):
        crossover_best(Chromosome.from_string("11"), Chromosome.from_string("00"), ShortScores())


def test_batch_fitness_protocol_is_runtime_checkable():
    assert isinstance(WeightedBatchFitness(np.ones(3)), BatchFitness)
    assert not isinstance(count_ones, BatchFitness)


# ---------------------------------------------------------------- half-split mutation


def test_half_split_rates_boundary():
    rates = half_split_rates(784, 0.025)
    assert np.count_nonzero(rates == 0.025) == 393
    assert np.count_nonzero(rates == 0.05) == 391
    assert rates[392] == 0.025 and rates[393] == 0.05
    assert half_split_rates(30, 0.1).tolist() == [0.1] * 16 + [0.2] * 14


def test_mutate_half_flip_frequencies(rng):
    zero = Chromosome(np.zeros(784, dtype=int))
    trials = 2000
    flips = np.zeros(784)
    for _ in range(trials):
        flips += mutate_half(zero, 0.025, rng).bits
    rate = flips / trials
    assert abs(rate[:393].mean() - 0.025) < 0.002
    assert abs(rate[393:].mean() - 0.05) < 0.003


def test_mutate_half_zero_rate_is_identity(rng):
    child = random_chromosome(50, rng)
    assert mutate_half(child, 0.0, rng) is child


def test_mutate_half_rejects_rate_above_half(rng):
    with pytest.raises(InvalidArgumentError):
        mutate_half(random_chromosome(10, rng), 0.6, rng)


# ---------------------------------------------------------------- simple GA operators


def test_single_point_split_is_uniform(rng):
    father, mother = Chromosome.from_string("1111"), Chromosome.from_string("0000")
    counts = np.bincount(
        [int(crossover_single_point(father, mother, rng).bits.sum()) for _ in range(8000)], minlength=5
    )
    assert counts[4] == 0
    assert np.allclose(counts[:4] / 8000, 0.25, atol=0.02)


def test_mutate_simple_flips_at_most_one_gene(rng):
    child = random_chromosome(20, rng)
    mutated = mutate_simple(child, 1.0, rng)
    assert np.count_nonzero(mutated.bits != child.bits) == 1
    assert mutate_simple(child, 0.0, rng) is child
    with pytest.raises(InvalidArgumentError):
        mutate_simple(child, 1.5, rng)


def test_crossover_best_equals_smallest_brute_force_argmax(rng):
    for _ in range(1000):
        length = int(rng.integers(4, 33))
        weights = rng.integers(-3, 4, size=length)
        father, mother = random_chromosome(length, rng), random_chromosome(length, rng)

        def fitness(c, weights=weights):
            return float(int(c.bits.astype(np.int64) @ weights))

        scores = [fitness(splice(father, mother, i)) for i in range(length)]
        best = max(scores)
        child = crossover_best(father, mother, fitness)
        assert fitness(child) == best
        assert child == splice(father, mother, scores.index(best))


def test_mutate_half_almost_always_flips_something(rng):
    child = Chromosome(np.zeros(784, dtype=int))
    changed = np.mean([mutate_half(child, 0.025, rng) is not child for _ in range(2000)])
    expected = 1 - (1 - 0.025) ** 393 * (1 - 0.05) ** 391
    assert abs(changed - expected) < 0.01


def test_mutate_half_flips_halves_independently(rng):
    zero = Chromosome(np.zeros(30, dtype=int))
    flips = np.array([mutate_half(zero, 0.1, rng).bits for _ in range(100_000)])
    first, second = flips[:, :16].sum(axis=1), flips[:, 16:].sum(axis=1)
    assert abs(np.corrcoef(first, second)[0, 1]) < 0.01
