"""
Evaluation statistics for repeated optimizer runs.

Summary statistics use the unbiased (n - 1) variance. The t-test is the
pooled-variance two-sample test with ``n1 + n2 - 2`` degrees of freedom and a
two-tailed p-value taken from the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc

from swarmlab.errors import InvalidArgumentError

DEFAULT_PRECISION = 0.15
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class SummaryStats:
    n: int
    min: float
    max: float
    mean: float
    median: float
    std: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DensityReport:
    pooled_density: float
    best_density: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int


def _sample(values: Iterable[float], name: str = "sample") -> np.ndarray:
    arr = np.asarray(list(values), dtype=float).reshape(-1)
    if arr.size == 0:
        raise InvalidArgumentError(f"{name} must not be empty")
    return arr


def summarize(finals: Sequence[float]) -> SummaryStats:
    arr = _sample(finals, "finals")
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return SummaryStats(
        n=int(arr.size),
        min=float(arr.min()),
        max=float(arr.max()),
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        std=std,
    )


def success_rate(finals: Sequence[float], global_min: float, precision: float = DEFAULT_PRECISION) -> float:
    """Percentage of runs whose final value is within ``precision`` of the optimum."""
    if precision <= 0:
        raise InvalidArgumentError("precision must be positive")
    arr = _sample(finals, "finals")
    hits = np.count_nonzero(arr - global_min <= precision)
    return 100.0 * hits / arr.size


def t_test_cdf_p(t: float, df: int) -> float:
    """Two-tailed p-value of a t statistic with ``df`` degrees of freedom."""
    if df < 1:
        raise InvalidArgumentError("df must be >= 1")
    if math.isinf(t):
        return 0.0
    if t == 0:
        return 1.0
    x = df / (df + t * t)
    return float(min(1.0, max(0.0, betainc(df / 2.0, 0.5, x))))


def t_test(sample1: Sequence[float], sample2: Sequence[float]) -> TTestResult:
    a = _sample(sample1, "sample1")
    b = _sample(sample2, "sample2")
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise InvalidArgumentError("t_test needs at least two observations per sample")
    df = n1 + n2 - 2
    diff = float(a.mean() - b.mean())
    pooled = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / df
    scale = math.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    if scale == 0.0:
        if diff == 0.0:
            return TTestResult(t=0.0, p=1.0, df=df)
        return TTestResult(t=math.copysign(math.inf, diff), p=0.0, df=df)
    t = diff / scale
    return TTestResult(t=t, p=t_test_cdf_p(t, df), df=df)


def significance_mark(
    sample: Sequence[float], baseline: Sequence[float], alpha: float = DEFAULT_ALPHA
) -> str:
    """``+`` significantly better than baseline, ``-`` significantly worse, ``=`` otherwise."""
    result = t_test(sample, baseline)
    if result.p >= alpha:
        return "="
    return "+" if np.mean(sample) < np.mean(baseline) else "-"


def density(points: Sequence[Sequence[float]] | np.ndarray, optimum: Sequence[float]) -> float:
    """Mean Euclidean distance from the points to the optimum."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    opt = np.asarray(optimum, dtype=float).reshape(-1)
    if pts.size == 0:
        raise InvalidArgumentError("density needs at least one point")
    if pts.shape[1] != opt.size:
        raise InvalidArgumentError(
            f"Point dimension {pts.shape[1]} does not match optimum dimension {opt.size}"
        )
    return float(np.linalg.norm(pts - opt, axis=1).mean())


def density_report(
    final_populations: Sequence[np.ndarray],
    best_positions: Sequence[Sequence[float]],
    optimum: Sequence[float],
) -> DensityReport:
    pooled = np.vstack([np.atleast_2d(p) for p in final_populations])
    return DensityReport(
        pooled_density=density(pooled, optimum),
        best_density=density(np.asarray(best_positions, dtype=float), optimum),
    )


def mean_curve(curves: Sequence[Sequence[float]]) -> list[float]:
    matrix = np.asarray(curves, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise InvalidArgumentError("mean_curve needs a non-empty list of equal-length curves")
    return matrix.mean(axis=0).tolist()
