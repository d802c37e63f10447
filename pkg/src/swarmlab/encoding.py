"""
Binary chromosomes and their mapping onto real-valued search domains.

Each variable owns a contiguous, big-endian slice of ``bits_per_var`` genes.
The slice value ``k`` decodes to ``lower + k * (upper - lower) / 2**bits_per_var``,
so the decoded point always lies in ``[lower, upper)`` and the grid contains
``0.0`` exactly for symmetric domains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from swarmlab.errors import InvalidArgumentError, InvalidChromosomeError, InvalidPairError


@dataclass(frozen=True, eq=False)
class Chromosome:
    """Immutable fixed-length bitstring."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.array(self.bits, dtype=np.int64, copy=True).reshape(-1)
        if bits.size == 0:
            raise InvalidChromosomeError("Chromosome must have at least one gene")
        if np.any((bits != 0) & (bits != 1)):
            raise InvalidChromosomeError("Every gene must be 0 or 1")
        frozen = bits.astype(np.uint8)
        frozen.flags.writeable = False
        object.__setattr__(self, "bits", frozen)

    @classmethod
    def from_string(cls, text: str) -> "Chromosome":
        try:
            return cls(np.fromiter((int(ch) for ch in text.strip()), dtype=np.int64))
        except ValueError as exc:
            raise InvalidChromosomeError(f"Not a bitstring: {text!r}") from exc

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self) -> str:
        text = str(self)
        if len(text) > 40:
            text = text[:37] + "..."
        return f"Chromosome({text!r}, length={self.length})"


@dataclass(frozen=True)
class SearchDomain:
    """Axis-aligned box of the objective's input."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if not lower or len(lower) != len(upper):
            raise InvalidArgumentError("lower and upper must be non-empty and equally long")
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not lo < hi:
                raise InvalidArgumentError(f"Domain variable {i}: lower {lo} must be < upper {hi}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def square(cls, n_vars: int, lower: float, upper: float) -> "SearchDomain":
        return cls((lower,) * n_vars, (upper,) * n_vars)

    @property
    def n_vars(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def width(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    def resolution(self, bits_per_var: int) -> np.ndarray:
        """Distance between adjacent grid values per variable."""
        return self.width / float(2**bits_per_var)

    def contains(self, point: Sequence[float] | np.ndarray) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lower_array) and np.all(p <= self.upper_array))

    def clip(self, points: np.ndarray) -> np.ndarray:
        return np.clip(points, self.lower_array, self.upper_array)


def bits_per_variable(length: int, domain: SearchDomain) -> int:
    if length % domain.n_vars != 0:
        raise InvalidChromosomeError(
            f"Chromosome length {length} is not divisible by {domain.n_vars} variables"
        )
    return length // domain.n_vars


def _place_values(bits_per_var: int) -> np.ndarray:
    return 2.0 ** np.arange(bits_per_var - 1, -1, -1, dtype=float)


def decode_batch(bits: np.ndarray, domain: SearchDomain) -> np.ndarray:
    """Decode every row of a 2-D gene matrix into an ``(n, n_vars)`` array."""
    matrix = np.atleast_2d(np.asarray(bits))
    per_var = bits_per_variable(matrix.shape[1], domain)
    slices = matrix.reshape(matrix.shape[0], domain.n_vars, per_var).astype(float)
    ints = slices @ _place_values(per_var)
    return domain.lower_array + ints * domain.resolution(per_var)


def decode(chromosome: Chromosome, domain: SearchDomain) -> np.ndarray:
    return decode_batch(chromosome.bits[np.newaxis, :], domain)[0]


def encode(point: Sequence[float], domain: SearchDomain, bits_per_var: int) -> Chromosome:
    """Grid cell of ``point`` (rounded down), the inverse of :func:`decode` on grid values."""
    p = np.asarray(point, dtype=float)
    if p.shape != (domain.n_vars,):
        raise InvalidArgumentError(f"Expected {domain.n_vars} coordinates, got {p.shape}")
    if np.any(p < domain.lower_array) or np.any(p >= domain.upper_array):
        raise InvalidArgumentError(f"Point {p.tolist()} lies outside [lower, upper)")
    ints = np.floor((p - domain.lower_array) / domain.resolution(bits_per_var)).astype(np.int64)
    ints = np.minimum(ints, 2**bits_per_var - 1)
    genes: list[int] = []
    for value in ints:
        genes.extend(int(b) for b in format(int(value), f"0{bits_per_var}b"))
    return Chromosome(np.asarray(genes))


def random_chromosome(length: int, rng: np.random.Generator) -> Chromosome:
    if length < 1:
        raise InvalidArgumentError("Chromosome length must be >= 1")
    return Chromosome(rng.integers(0, 2, size=length))


def splice(father: Chromosome, mother: Chromosome, split: int) -> Chromosome:
    """``father[0:split] ++ mother[split:]``."""
    if father.length != mother.length:
        raise InvalidPairError(f"Parent lengths differ: {father.length} != {mother.length}")
    if not 0 <= split <= father.length:
        raise InvalidArgumentError(f"Split {split} outside [0, {father.length}]")
    return Chromosome(np.concatenate((father.bits[:split], mother.bits[split:])))
