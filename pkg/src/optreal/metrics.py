"""Finite metric spaces over exact rationals.

Points are named by string labels and all distances are `fractions.Fraction`
values, kept exact end to end: every comparison in this package is an exact
equality or inequality, never a tolerance check.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence


class MetricError(ValueError):
    """The input matrix is not a metric."""


class NotSymmetric(MetricError):
    """d(i, j) != d(j, i); indices are 1-based."""

    def __init__(self, i: int, j: int):
        super().__init__(f"matrix not symmetric at entries ({i},{j}) and ({j},{i})")
        self.witness = (i, j)


class NegativeEntry(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"negative distance at entry ({i},{j})")
        self.witness = (i, j)


class ZeroOffDiagonal(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"zero distance between distinct points {i} and {j}")
        self.witness = (i, j)


class NonZeroDiagonal(MetricError):
    def __init__(self, i: int):
        super().__init__(f"nonzero diagonal entry at ({i},{i})")
        self.witness = (i,)


class TriangleViolation(MetricError):
    """d(i, j) > d(i, k) + d(k, j); indices are 1-based."""

    def __init__(self, i: int, j: int, k: int):
        super().__init__(f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})")
        self.witness = (i, j, k)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class FiniteMetric:
    """Immutable distance matrix with named points.

    Construct through validate_metric so the metric axioms are enforced;
    the bare constructor trusts its input.
    """

    __slots__ = ("labels", "rows", "_index")

    def __init__(self, labels: Sequence[str], rows: Sequence[Sequence[Fraction]]):
        self.labels: tuple[str, ...] = tuple(labels)
        self.rows: tuple[tuple[Fraction, ...], ...] = tuple(tuple(r) for r in rows)
        self._index = {x: i for i, x in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def d(self, x: str, y: str) -> Fraction:
        return self.rows[self._index[x]][self._index[y]]

    def index(self, x: str) -> int:
        return self._index[x]

    def pairs(self) -> Iterable[tuple[str, str]]:
        return combinations(self.labels, 2)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteMetric)
            and self.labels == other.labels
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.rows))

    def __repr__(self) -> str:
        return f"FiniteMetric(labels={self.labels!r})"


def validate_metric(matrix: Sequence[Sequence], labels: Sequence[str] | None = None) -> FiniteMetric:
    """Check the metric axioms and return the validated FiniteMetric.

    Raises the most specific MetricError with 1-based witness indices:
    symmetry, zero diagonal, nonnegativity, positivity off the diagonal,
    and the triangle inequality, in that order.
    """
    n = len(matrix)
    if n < 2:
        raise MetricError("a metric needs at least two points")
    if labels is None:
        labels = [f"p{i + 1}" for i in range(n)]
    labels = [str(x) for x in labels]
    if len(labels) != n:
        raise MetricError(f"{n} rows but {len(labels)} labels")
    if len(set(labels)) != n:
        raise MetricError("labels are not distinct")
    rows: list[list[Fraction]] = []
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise MetricError(f"row {i + 1} has {len(row)} entries, expected {n}")
        rows.append([as_fraction(v) for v in row])
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise NotSymmetric(i + 1, j + 1)
    for i in range(n):
        if rows[i][i] != 0:
            raise NonZeroDiagonal(i + 1)
    for i in range(n):
        for j in range(n):
            if rows[i][j] < 0:
                raise NegativeEntry(i + 1, j + 1)
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] == 0:
                raise ZeroOffDiagonal(i + 1, j + 1)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                if rows[i][j] > rows[i][k] + rows[k][j]:
                    raise TriangleViolation(i + 1, j + 1, k + 1)
    return FiniteMetric(labels, rows)


def metric_from_function(labels: Sequence[str], dist) -> FiniteMetric:
    """Build and validate a metric from a symmetric distance function."""
    rows = [[as_fraction(dist(x, y)) if x != y else Fraction(0) for y in labels] for x in labels]
    return validate_metric(rows, labels)


def submetric(m: FiniteMetric, subset: Iterable[str]) -> FiniteMetric:
    keep = [x for x in m.labels if x in set(subset)]
    rows = [[m.d(x, y) for y in keep] for x in keep]
    return FiniteMetric(keep, rows)
