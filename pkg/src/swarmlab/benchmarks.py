"""Two-variable test functions with their known optima and search domains."""

from __future__ import annotations

import enum
import math

import numpy as np

from swarmlab.encoding import SearchDomain
from swarmlab.errors import InvalidArgumentError
from swarmlab.optimizers import Problem


class TestFunctionId(str, enum.Enum):
    SPHERE = "sphere"
    ACKLEY = "ackley"
    BEALE = "beale"
    EGGHOLDER = "eggholder"

    __test__ = False

    @classmethod
    def parse(cls, name: str) -> "TestFunctionId":
        key = name.strip().lower()
        aliases = {"f1": cls.SPHERE, "f2": cls.ACKLEY, "f3": cls.BEALE, "f4": cls.EGGHOLDER}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError as exc:
            known = ", ".join(member.value for member in cls)
            raise InvalidArgumentError(f"Unknown test function '{name}' (known: {known})") from exc


def sphere(x, y):
    return x**2 + y**2


def ackley(x, y):
    # exp(0.5 * (cos 2πx + cos 2πy)); the optimum f(0, 0) = 0 only holds in this form.
    return (
        -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (x**2 + y**2)))
        - np.exp(0.5 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y)))
        + math.e
        + 20.0
    )


def beale(x, y):
    return (1.5 - x + x * y) ** 2 + (2.25 - x + x * y**2) ** 2 + (2.625 - x + x * y**3) ** 2


def eggholder(x, y):
    return -(y + 47.0) * np.sin(np.sqrt(np.abs(x / 2.0 + (y + 47.0)))) - x * np.sin(
        np.sqrt(np.abs(x - (y + 47.0)))
    )


FUNCTIONS = {
    TestFunctionId.SPHERE: sphere,
    TestFunctionId.ACKLEY: ackley,
    TestFunctionId.BEALE: beale,
    TestFunctionId.EGGHOLDER: eggholder,
}

# (bound, minimizer, minimum value)
TABLE = {
    TestFunctionId.SPHERE: (5.0, (0.0, 0.0), 0.0),
    TestFunctionId.ACKLEY: (5.0, (0.0, 0.0), 0.0),
    TestFunctionId.BEALE: (4.5, (3.0, 0.5), 0.0),
    TestFunctionId.EGGHOLDER: (512.0, (512.0, 404.2319), -959.6407),
}


def eval_test_function(function_id: TestFunctionId, x, y):
    """Evaluate a test function; accepts scalars or broadcastable arrays."""
    value = FUNCTIONS[TestFunctionId(function_id)](x, y)
    if np.ndim(value) == 0:
        return float(value)
    return value


def _vectorized(function_id: TestFunctionId):
    fn = FUNCTIONS[function_id]

    def objective(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(fn(pts[:, 0], pts[:, 1]), dtype=float)

    objective.__name__ = function_id.value
    return objective


def make_problem(function_id: TestFunctionId | str) -> Problem:
    fid = TestFunctionId.parse(function_id) if isinstance(function_id, str) else function_id
    bound, minimizer, minimum = TABLE[fid]
    return Problem(
        name=fid.value,
        objective=_vectorized(fid),
        domain=SearchDomain.square(2, -bound, bound),
        global_minimum_value=minimum,
        global_minimizer=minimizer,
    )


def all_problems() -> list[Problem]:
    return [make_problem(fid) for fid in TestFunctionId]
