"""The Buneman complex of a weighted split system.

Points of the complex assign a nonnegative coordinate to every split
side so that the two sides of each split sum to its weight; a point
belongs to the complex when any two sides that cover the ground set
while intersecting give zero to at least one of them. The complex is a
union of closed faces of the weight hypercube, so vertices, edges and
quadrangles can be recognised by membership tests at vertices, edge
midpoints and face barycenters.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .splits import Split, WeightedSplitSystem, incompatible


class BunemanError(ValueError):
    pass


class MissingCoordinate(BunemanError):
    def __init__(self, side: frozenset):
        super().__init__(f"no coordinate for side {sorted(side)}")
        self.side = side


class TooManySplits(BunemanError):
    def __init__(self, count: int, bound: int):
        super().__init__(f"system has {count} splits, enumeration bound is {bound}")


class BunemanPoint:
    """Immutable coordinate map on the sides of a split system."""

    __slots__ = ("_coords", "_key")

    def __init__(self, coords: Mapping[frozenset, object]):
        cd = {frozenset(side): Fraction(v) for side, v in coords.items()}
        self._coords = cd
        self._key = tuple(sorted((tuple(sorted(side)), v) for side, v in cd.items()))

    def __getitem__(self, side: frozenset) -> Fraction:
        try:
            return self._coords[frozenset(side)]
        except KeyError:
            raise MissingCoordinate(frozenset(side)) from None

    def get(self, side: frozenset, default=None):
        return self._coords.get(frozenset(side), default)

    def sides(self) -> Iterable[frozenset]:
        return self._coords.keys()

    def as_dict(self) -> dict[frozenset, Fraction]:
        return dict(self._coords)

    def sort_key(self):
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, BunemanPoint) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        parts = ",".join(f"{{{','.join(s)}}}:{v}" for s, v in self._key)
        return f"BunemanPoint({parts})"


def _covering_pairs(s: WeightedSplitSystem) -> list[tuple[frozenset, frozenset]]:
    """Side pairs with union X and nonempty intersection; these force a zero."""
    ground = frozenset(s.ground)
    sides = s.support()
    out = []
    for a, b in combinations(sides, 2):
        if (a | b) == ground and (a & b):
            out.append((a, b))
    return out


def _check_coords(s: WeightedSplitSystem, mu: BunemanPoint) -> None:
    for sp in s.splits:
        for side in sp.sides():
            if mu[side] < 0:
                raise BunemanError(f"negative coordinate on side {sorted(side)}")


def in_buneman(s: WeightedSplitSystem, mu: BunemanPoint) -> bool:
    """Hypercube membership plus the zero condition on covering side pairs."""
    _check_coords(s, mu)
    for sp in s.splits:
        if mu[sp.side_a] + mu[sp.side_b] != s.weights[sp]:
            return False
    for a, b in _covering_pairs(s):
        if mu[a] != 0 and mu[b] != 0:
            return False
    return True


def buneman_vertices(s: WeightedSplitSystem, max_splits: int = 20) -> list[BunemanPoint]:
    """All hypercube vertices lying in the complex, canonically sorted.

    A hypercube vertex gives each split's full weight to one side; the
    2^|S| side choices are enumerated and filtered by the zero condition.
    """
    splits = s.splits
    if len(splits) > max_splits:
        raise TooManySplits(len(splits), max_splits)
    pairs = _covering_pairs(s)
    out: list[BunemanPoint] = []
    n = len(splits)
    for mask in range(1 << n):
        coords: dict[frozenset, Fraction] = {}
        for i, sp in enumerate(splits):
            full, empty = (
                (sp.side_a, sp.side_b) if mask & (1 << i) else (sp.side_b, sp.side_a)
            )
            coords[full] = s.weights[sp]
            coords[empty] = Fraction(0)
        if all(coords[a] == 0 or coords[b] == 0 for a, b in pairs):
            out.append(BunemanPoint(coords))
    out.sort(key=BunemanPoint.sort_key)
    return out


def _midpoint(mu: BunemanPoint, nu: BunemanPoint) -> BunemanPoint:
    return BunemanPoint(
        {side: (mu[side] + nu[side]) / 2 for side in mu.sides()}
    )


def differing_splits(s: WeightedSplitSystem, mu: BunemanPoint, nu: BunemanPoint) -> list[Split]:
    return [sp for sp in s.splits if mu[sp.side_a] != nu[sp.side_a]]


def buneman_edges(
    s: WeightedSplitSystem, vertices: list[BunemanPoint] | None = None
) -> list[tuple[BunemanPoint, BunemanPoint, Split]]:
    """Vertex pairs differing on exactly one split whose midpoint stays inside."""
    if vertices is None:
        vertices = buneman_vertices(s)
    out = []
    for mu, nu in combinations(vertices, 2):
        diff = differing_splits(s, mu, nu)
        if len(diff) == 1 and in_buneman(s, _midpoint(mu, nu)):
            out.append((mu, nu, diff[0]))
    return out


def buneman_quads(
    s: WeightedSplitSystem, vertices: list[BunemanPoint] | None = None
) -> list[tuple[tuple[BunemanPoint, ...], tuple[Split, Split]]]:
    """Two-dimensional cells: four vertices spanning two incompatible splits.

    The four vertices agree off the pair, take all four side combinations
    on it, and the barycenter passes the membership test.
    """
    if vertices is None:
        vertices = buneman_vertices(s)
    splits = s.splits
    out = []
    for s1, s2 in combinations(splits, 2):
        if not incompatible(s1, s2):
            continue
        groups: dict[tuple, list[BunemanPoint]] = {}
        for v in vertices:
            rest = tuple(
                v[sp.side_a] for sp in splits if sp != s1 and sp != s2
            )
            groups.setdefault(rest, []).append(v)
        for members in groups.values():
            if len(members) != 4:
                continue
            patterns = {(v[s1.side_a] > 0, v[s2.side_a] > 0) for v in members}
            if len(patterns) != 4:
                continue
            bary = BunemanPoint(
                {
                    side: sum((v[side] for v in members), Fraction(0)) / 4
                    for side in members[0].sides()
                }
            )
            if in_buneman(s, bary):
                quad = tuple(sorted(members, key=BunemanPoint.sort_key))
                out.append((quad, (s1, s2)))
    return out


def d1(mu: BunemanPoint, nu: BunemanPoint) -> Fraction:
    """Half the coordinatewise l1 distance (both sides of each split count)."""
    return sum((abs(mu[s] - nu[s]) for s in mu.sides()), Fraction(0)) / 2


def phi(s: WeightedSplitSystem, x: str) -> BunemanPoint:
    """Canonical embedding of a ground point: full weight on the sides containing it."""
    coords: dict[frozenset, Fraction] = {}
    for sp in s.splits:
        if x in sp.side_a:
            coords[sp.side_a] = s.weights[sp]
            coords[sp.side_b] = Fraction(0)
        else:
            coords[sp.side_b] = s.weights[sp]
            coords[sp.side_a] = Fraction(0)
    return BunemanPoint(coords)


def lambda_image(s: WeightedSplitSystem, mu: BunemanPoint) -> dict[str, Fraction]:
    """Map a complex point to the function x -> sum of mu over sides avoiding x.

    This is the coordinate convention under which the composition with
    phi recovers the distance rows of the split metric exactly.
    """
    out: dict[str, Fraction] = {}
    for x in s.ground:
        total = Fraction(0)
        for sp in s.splits:
            for side in sp.sides():
                if x not in side:
                    total += mu[side]
        out[x] = total
    return out


def normalized_coordinate(s: WeightedSplitSystem, mu: BunemanPoint, side: frozenset) -> Fraction:
    """mu's share of its split's weight on the given side, in [0, 1]."""
    side = frozenset(side)
    sp = Split(side, frozenset(s.ground) - side)
    if sp not in s.weights:
        raise MissingCoordinate(side)
    return mu[side] / s.weights[sp]
