"""Weighted split systems and the exact split decomposition of a metric.

A split is an unordered bipartition {A, B} of the ground set into two
nonempty blocks. A weighted split system induces the metric that sums,
for each pair of points, the weights of the splits separating them.
The decomposition direction recovers, for a totally decomposable metric,
the unique weighted split system with positive isolation indices whose
split metric is the input; the round trip is verified exactly.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations
from typing import Iterable, Mapping, Sequence

from .metrics import FiniteMetric, MetricError, as_fraction, validate_metric


class SplitError(ValueError):
    pass


class NotSeparated(SplitError):
    def __init__(self, x: str, y: str):
        super().__init__(f"no split separates {x} and {y}; split metric undefined")
        self.witness = (x, y)


class NotTotallyDecomposable(SplitError):
    def __init__(self, witness: tuple[str, str, str, str, str]):
        t, x, y, u, v = witness
        super().__init__(
            "metric is not totally decomposable; "
            f"witness quintuple (t,x,y,u,v) = ({t},{x},{y},{u},{v})"
        )
        self.witness = witness


class ResidueNonZero(SplitError):
    def __init__(self, x: str, y: str):
        super().__init__(f"decomposition residue is nonzero at pair ({x},{y})")
        self.witness = (x, y)


class GroundSetTooLarge(SplitError):
    def __init__(self, n: int, bound: int):
        super().__init__(f"ground set has {n} points, bound is {bound}")


class Split:
    """Unordered bipartition of a ground set into two nonempty sides.

    side_a is the side containing the smallest label, so equal splits
    compare and hash equal regardless of construction order.
    """

    __slots__ = ("side_a", "side_b")

    def __init__(self, one_side: Iterable[str], other_side: Iterable[str]):
        a = frozenset(one_side)
        b = frozenset(other_side)
        if not a or not b:
            raise SplitError("both sides of a split must be nonempty")
        if a & b:
            raise SplitError(f"split sides overlap: {sorted(a & b)}")
        if min(a) > min(b):
            a, b = b, a
        self.side_a = a
        self.side_b = b

    @classmethod
    def of(cls, ground: Iterable[str], side: Iterable[str]) -> "Split":
        g = frozenset(ground)
        s = frozenset(side)
        if not s <= g:
            raise SplitError("side is not a subset of the ground set")
        return cls(s, g - s)

    @property
    def ground(self) -> frozenset:
        return self.side_a | self.side_b

    def sides(self) -> tuple[frozenset, frozenset]:
        return (self.side_a, self.side_b)

    def side_of(self, x: str) -> frozenset:
        if x in self.side_a:
            return self.side_a
        if x in self.side_b:
            return self.side_b
        raise KeyError(x)

    def separates(self, x: str, y: str) -> bool:
        return (x in self.side_a) != (y in self.side_a)

    def sort_key(self):
        return (tuple(sorted(self.side_a)), tuple(sorted(self.side_b)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Split)
            and self.side_a == other.side_a
            and self.side_b == other.side_b
        )

    def __hash__(self) -> int:
        return hash((self.side_a, self.side_b))

    def __repr__(self) -> str:
        a = ",".join(sorted(self.side_a))
        b = ",".join(sorted(self.side_b))
        return f"Split({{{a}}}|{{{b}}})"


class WeightedSplitSystem:
    """Split system with strictly positive rational weights."""

    __slots__ = ("ground", "weights")

    def __init__(self, ground: Sequence[str], weights: Mapping[Split, object]):
        self.ground: tuple[str, ...] = tuple(ground)
        gset = frozenset(self.ground)
        if len(gset) != len(self.ground):
            raise SplitError("ground labels are not distinct")
        wd: dict[Split, Fraction] = {}
        for s, w in weights.items():
            if s.ground != gset:
                raise SplitError(f"{s!r} does not partition the ground set")
            w = as_fraction(w)
            if w <= 0:
                raise SplitError(f"non-positive weight on {s!r}")
            wd[s] = w
        self.weights = wd

    @property
    def splits(self) -> list[Split]:
        return sorted(self.weights, key=Split.sort_key)

    def support(self) -> list[frozenset]:
        """All split sides; distinct because a side determines its split."""
        sides = []
        for s in self.splits:
            sides.extend(s.sides())
        return sides

    def weight_of_side(self, side: frozenset) -> Fraction:
        return self.weights[Split(side, frozenset(self.ground) - side)]

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"WeightedSplitSystem({len(self.ground)} points, {len(self.weights)} splits)"


def split_metric(s: WeightedSplitSystem) -> FiniteMetric:
    """The metric summing weights of separating splits; every pair must be separated."""
    splits = s.splits
    labels = s.ground
    for x, y in combinations(labels, 2):
        if not any(sp.separates(x, y) for sp in splits):
            raise NotSeparated(x, y)

    def dist(x: str, y: str) -> Fraction:
        return sum((s.weights[sp] for sp in splits if sp.separates(x, y)), Fraction(0))

    rows = [[dist(x, y) if x != y else Fraction(0) for y in labels] for x in labels]
    return validate_metric(rows, labels)


def beta(m: FiniteMetric, x: str, y: str, u: str, v: str) -> Fraction:
    """max{d(x,u)+d(y,v), d(x,v)+d(y,u)} - d(x,y) - d(u,v)."""
    return max(m.d(x, u) + m.d(y, v), m.d(x, v) + m.d(y, u)) - m.d(x, y) - m.d(u, v)


def alpha(m: FiniteMetric, x: str, y: str, u: str, v: str) -> Fraction:
    return max(beta(m, x, y, u, v), Fraction(0))


def is_totally_decomposable(m: FiniteMetric) -> tuple[bool, tuple | None]:
    """Exhaustive quintuple check, repetitions allowed; witness on failure."""
    L = m.labels
    for x in L:
        for y in L:
            for u in L:
                for v in L:
                    b = beta(m, x, y, u, v)
                    for t in L:
                        if b > alpha(m, x, t, u, v) + alpha(m, x, y, u, t):
                            return False, (t, x, y, u, v)
    return True, None


def incompatible(s1: Split, s2: Split) -> bool:
    """All four side intersections nonempty."""
    return all(
        bool(a & b)
        for a in s1.sides()
        for b in s2.sides()
    )


def is_two_compatible(s: WeightedSplitSystem) -> tuple[bool, tuple | None]:
    """No three pairwise incompatible splits; witness triple on failure."""
    splits = s.splits
    for t in combinations(splits, 3):
        if incompatible(t[0], t[1]) and incompatible(t[0], t[2]) and incompatible(t[1], t[2]):
            return False, t
    return True, None


def is_weakly_compatible(s: WeightedSplitSystem) -> tuple[bool, tuple | None]:
    """Every split triple admits side choices with empty triple intersection.

    All eight side combinations are tried per triple; the witness is a
    triple for which every combination has a nonempty intersection.
    """
    splits = s.splits
    for t in combinations(splits, 3):
        if not any(
            not (a & b & c)
            for a in t[0].sides()
            for b in t[1].sides()
            for c in t[2].sides()
        ):
            return False, t
    return True, None


def is_octahedral_free(
    s: WeightedSplitSystem, max_ground: int = 64
) -> tuple[bool, tuple | None]:
    """No six-block partition whose four induced alternating splits all lie in S.

    For an ordered, oriented triple of candidate splits the six blocks are
    the membership-pattern cells (1,0,0), (1,1,0), (1,1,1), (0,1,1),
    (0,0,1), (0,0,0) of (A1, A2, A3); the configuration exists iff those
    six cells are nonempty, the cells (1,0,1) and (0,1,0) are empty, and
    the alternating split {X1|X3|X5 vs rest} also belongs to S. Witness is
    the six-block partition.
    """
    ground = frozenset(s.ground)
    if len(ground) > max_ground:
        raise GroundSetTooLarge(len(ground), max_ground)
    splits = set(s.splits)
    for s1, s2, s3 in permutations(sorted(splits, key=Split.sort_key), 3):
        for a1 in s1.sides():
            for a2 in s2.sides():
                for a3 in s3.sides():
                    b1, b2, b3 = ground - a1, ground - a2, ground - a3
                    if (a1 & b2 & a3) or (b1 & a2 & b3):
                        continue
                    x1 = a1 & b2 & b3
                    x2 = a1 & a2 & b3
                    x3 = a1 & a2 & a3
                    x4 = b1 & a2 & a3
                    x5 = b1 & b2 & a3
                    x6 = b1 & b2 & b3
                    blocks = (x1, x2, x3, x4, x5, x6)
                    if not all(blocks):
                        continue
                    s4 = Split(x1 | x3 | x5, x2 | x4 | x6)
                    if s4 in splits:
                        return False, blocks
    return True, None


def isolation_index(m: FiniteMetric, side: frozenset) -> Fraction:
    """Bandelt-Dress isolation index of the split given by `side`."""
    a_side = sorted(side)
    b_side = sorted(set(m.labels) - side)
    best: Fraction | None = None
    for a, a2 in combinations_with_replacement(a_side, 2):
        daa = m.d(a, a2)
        for b, b2 in combinations_with_replacement(b_side, 2):
            dbb = m.d(b, b2)
            val = (
                max(m.d(a, b) + m.d(a2, b2), m.d(a, b2) + m.d(a2, b), daa + dbb)
                - daa
                - dbb
            )
            if best is None or val < best:
                best = val
                if best == 0:
                    return Fraction(0)
    return best / 2


def decompose(m: FiniteMetric, max_points: int = 16) -> WeightedSplitSystem:
    """Split decomposition: all splits with positive isolation index.

    Requires total decomposability, enumerates every bipartition of the
    ground set, and verifies the exact round trip (zero residue).
    """
    n = m.size
    if n > max_points:
        raise GroundSetTooLarge(n, max_points)
    ok, witness = is_totally_decomposable(m)
    if not ok:
        raise NotTotallyDecomposable(witness)
    first, rest = m.labels[0], m.labels[1:]
    weights: dict[Split, Fraction] = {}
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            side = frozenset((first, *extra))
            if len(side) == n:
                continue
            idx = isolation_index(m, side)
            if idx > 0:
                weights[Split.of(m.labels, side)] = idx
    system = WeightedSplitSystem(m.labels, weights)
    try:
        recovered = split_metric(system)
    except NotSeparated as exc:
        raise ResidueNonZero(*exc.witness) from exc
    for x, y in m.pairs():
        if recovered.d(x, y) != m.d(x, y):
            raise ResidueNonZero(x, y)
    return system
