"""Weighted graphs with named terminal vertices.

Shortest paths, degree-two suppression, weighted isomorphism,
homeomorphism, and the realisation checks built on top of them.
Graphs are simple (no loops or parallel edges), connected, and carry
strictly positive Fraction weights.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .metrics import FiniteMetric, as_fraction


class GraphError(ValueError):
    pass


class Disconnected(GraphError):
    def __init__(self, component: frozenset[str]):
        super().__init__(f"graph is disconnected; one component is {sorted(component)}")
        self.component = component


Edge = frozenset  # frozenset of two vertex names
VertexPath = tuple  # tuple of vertex names, endpoints included


class WeightedGraph:
    """Simple connected graph with positive rational edge weights.

    Terminal vertices are the named points of the underlying metric;
    every other vertex is auxiliary. Instances are treated as immutable.
    """

    __slots__ = ("vertices", "terminals", "weights", "adj")

    def __init__(
        self,
        edges: Mapping[frozenset, object] | Iterable[tuple[str, str, object]],
        terminals: Iterable[str],
    ):
        weights: dict[frozenset, Fraction] = {}
        if isinstance(edges, Mapping):
            items = [(tuple(sorted(e)), w) for e, w in edges.items()]
        else:
            items = [((u, v), w) for u, v, w in edges]
        for (u, v), w in items:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            key = frozenset((u, v))
            if key in weights:
                raise GraphError(f"parallel edge {sorted(key)}")
            w = as_fraction(w)
            if w <= 0:
                raise GraphError(f"non-positive weight on edge {sorted(key)}")
            weights[key] = w
        self.terminals: frozenset[str] = frozenset(str(t) for t in terminals)
        names = set(self.terminals)
        for e in weights:
            names.update(e)
        self.vertices: tuple[str, ...] = tuple(sorted(names))
        self.weights: dict[frozenset, Fraction] = weights
        adj: dict[str, dict[str, Fraction]] = {v: {} for v in self.vertices}
        for e, w in weights.items():
            u, v = sorted(e)
            adj[u][v] = w
            adj[v][u] = w
        self.adj = adj
        if len(self.vertices) > 1:
            seen = {self.vertices[0]}
            stack = [self.vertices[0]]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            if len(seen) != len(self.vertices):
                raise Disconnected(frozenset(seen))

    @property
    def aux_vertices(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if v not in self.terminals)

    def degree(self, v: str) -> int:
        return len(self.adj[v])

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(sorted(self.adj[v]))

    def weight(self, u: str, v: str) -> Fraction:
        return self.adj[u][v]

    def edges(self) -> list[tuple[str, str, Fraction]]:
        out = []
        for e, w in self.weights.items():
            u, v = sorted(e)
            out.append((u, v, w))
        out.sort()
        return out

    @property
    def total_length(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def canonical_encoding(self) -> str:
        parts = [f"{u}~{v}:{w}" for u, v, w in self.edges()]
        parts.append("T:" + ",".join(sorted(self.terminals)))
        return ";".join(parts)

    def __repr__(self) -> str:
        return (
            f"WeightedGraph({len(self.vertices)} vertices, {len(self.weights)} edges, "
            f"terminals={sorted(self.terminals)})"
        )


def dijkstra(g: WeightedGraph, source: str) -> dict[str, Fraction]:
    dist: dict[str, Fraction] = {source: Fraction(0)}
    heap: list[tuple[Fraction, str]] = [(Fraction(0), source)]
    done: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in g.adj[u].items():
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def all_pairs_distance(g: WeightedGraph) -> dict[tuple[str, str], Fraction]:
    """Exact shortest-path distances between all vertex pairs, both orders."""
    out: dict[tuple[str, str], Fraction] = {}
    for u in g.vertices:
        du = dijkstra(g, u)
        for v, d in du.items():
            out[(u, v)] = d
    return out


def path_length(g: WeightedGraph, path: VertexPath) -> Fraction:
    return sum((g.adj[path[i]][path[i + 1]] for i in range(len(path) - 1)), Fraction(0))


def shortest_paths_between(g: WeightedGraph, a: str, b: str) -> list[VertexPath]:
    """All shortest a-b paths, oriented a -> b, lexicographically sorted."""
    dist_b = dijkstra(g, b)

    def expand(u: str) -> list[VertexPath]:
        if u == b:
            return [(b,)]
        out = []
        for v in sorted(g.adj[u]):
            if g.adj[u][v] + dist_b[v] == dist_b[u]:
                out.extend((u,) + tail for tail in expand(v))
        return out

    return expand(a)


def enumerate_shortest_paths(g: WeightedGraph, points: Iterable[str]) -> set[VertexPath]:
    """Every shortest path between two distinct points of the given set.

    Paths are stored once, oriented from the lexicographically smaller
    endpoint; positive weights make every shortest path simple.
    """
    pts = sorted(set(points))
    paths: set[VertexPath] = set()
    for a, b in combinations(pts, 2):
        paths.update(shortest_paths_between(g, a, b))
    return paths


def path_edges(path: VertexPath) -> set[frozenset]:
    return {frozenset((path[i], path[i + 1])) for i in range(len(path) - 1)}


def suppress_degree_two(g: WeightedGraph, keep: Iterable[str] = ()) -> WeightedGraph:
    """Remove degree-2 vertices not in `keep`, merging their two edges.

    Vertices are scanned in canonical order and the scan restarts after
    each removal, so the result is deterministic. A vertex whose removal
    would create a parallel edge is retained (graphs stay simple).
    """
    keep_set = set(keep)
    weights = dict(g.weights)
    adj = {v: dict(g.adj[v]) for v in g.vertices}
    terminals = set(g.terminals)
    changed = True
    while changed:
        changed = False
        for v in sorted(adj):
            if v in keep_set or len(adj[v]) != 2:
                continue
            (u, wu), (x, wx) = sorted(adj[v].items())
            if frozenset((u, x)) in weights:
                continue
            del weights[frozenset((v, u))]
            del weights[frozenset((v, x))]
            del adj[u][v]
            del adj[x][v]
            del adj[v]
            weights[frozenset((u, x))] = wu + wx
            adj[u][x] = wu + wx
            adj[x][u] = wu + wx
            terminals.discard(v)
            changed = True
            break
    return WeightedGraph(weights, terminals)


def _aux_signature(g: WeightedGraph, v: str):
    incident = sorted(g.adj[v].values())
    term_w = sorted(w for u, w in g.adj[v].items() if u in g.terminals)
    return (len(incident), tuple(incident), tuple(term_w))


def weighted_isomorphic(g1: WeightedGraph, g2: WeightedGraph) -> dict[str, str] | None:
    """Isomorphism preserving weights and terminal labels pointwise.

    Terminal x must map to terminal x; auxiliary vertices may permute.
    Returns a witness bijection or None. Backtracking with degree and
    incident-weight-multiset pruning.
    """
    if g1.terminals != g2.terminals:
        return None
    if len(g1.vertices) != len(g2.vertices) or len(g1.weights) != len(g2.weights):
        return None
    if sorted(g1.weights.values()) != sorted(g2.weights.values()):
        return None
    mapping: dict[str, str] = {}
    for t in g1.terminals:
        if _aux_signature(g1, t) != _aux_signature(g2, t):
            return None
        mapping[t] = t

    aux1 = list(g1.aux_vertices)
    aux2 = list(g2.aux_vertices)
    if len(aux1) != len(aux2):
        return None
    sig2: dict = {}
    for v in aux2:
        sig2.setdefault(_aux_signature(g2, v), []).append(v)
    candidates: dict[str, list[str]] = {}
    for v in aux1:
        candidates[v] = sig2.get(_aux_signature(g1, v), [])
        if not candidates[v]:
            return None
    order = sorted(aux1, key=lambda v: (len(candidates[v]), v))

    used: set[str] = set()

    def consistent(v: str, w: str) -> bool:
        for u, wt in g1.adj[v].items():
            if u in mapping:
                img = mapping[u]
                if g2.adj[w].get(img) != wt:
                    return False
        for u2, wt2 in g2.adj[w].items():
            if u2 in used or u2 in g2.terminals:
                # preimage (terminal or already-assigned aux) must carry the edge
                pre = u2 if u2 in g2.terminals else None
                if pre is None:
                    pre = next(a for a, b in mapping.items() if b == u2)
                if g1.adj[v].get(pre) != wt2:
                    return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in candidates[v]:
            if w in used:
                continue
            if consistent(v, w):
                mapping[v] = w
                used.add(w)
                if backtrack(i + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    # terminal-only graphs: verify adjacency directly
    for t in g1.terminals:
        for u, wt in g1.adj[t].items():
            if u in g1.terminals and g2.adj[t].get(u) != wt:
                return None
    if backtrack(0):
        return dict(mapping)
    return None


def homeomorphic(g1: WeightedGraph, g2: WeightedGraph) -> bool:
    """Equal up to suppressing non-terminal degree-2 vertices."""
    s1 = suppress_degree_two(g1, keep=g1.terminals)
    s2 = suppress_degree_two(g2, keep=g2.terminals)
    return weighted_isomorphic(s1, s2) is not None


def is_realisation(g: WeightedGraph, m: FiniteMetric) -> bool:
    """Does the graph metric restricted to the labels equal m exactly?"""
    if not set(m.labels) <= g.terminals:
        return False
    for x in m.labels:
        dx = dijkstra(g, x)
        for y in m.labels:
            if dx.get(y) != m.d(x, y):
                return False
    return True


@dataclass(frozen=True)
class OptimalityReport:
    """Outcome of the necessary conditions for optimality.

    edge_covered: every edge lies on all shortest paths of some terminal
    pair. adjacent_covered: every two adjacent edges lie on a common
    shortest terminal path. triangle_free: no three mutually adjacent
    vertices. Witnesses name the first failure found.
    """

    edge_covered: bool
    edge_witness: tuple[str, str] | None
    adjacent_covered: bool
    adjacent_witness: tuple[tuple[str, str], tuple[str, str]] | None
    triangle_free: bool
    triangle_witness: tuple[str, str, str] | None

    @property
    def ok(self) -> bool:
        return self.edge_covered and self.adjacent_covered and self.triangle_free


def check_optimality_necessary(g: WeightedGraph, m: FiniteMetric) -> OptimalityReport:
    labels = sorted(m.labels)
    pair_paths: dict[tuple[str, str], list[set[frozenset]]] = {}
    for a, b in combinations(labels, 2):
        pair_paths[(a, b)] = [path_edges(p) for p in shortest_paths_between(g, a, b)]

    edge_covered = True
    edge_witness = None
    for e in sorted(g.weights, key=sorted):
        if not any(all(e in pe for pe in plist) for plist in pair_paths.values() if plist):
            edge_covered = False
            u, v = sorted(e)
            edge_witness = (u, v)
            break

    all_edge_sets = [pe for plist in pair_paths.values() for pe in plist]
    adjacent_covered = True
    adjacent_witness = None
    done = False
    for v in g.vertices:
        nbrs = sorted(g.adj[v])
        for a, b in combinations(nbrs, 2):
            e1, e2 = frozenset((v, a)), frozenset((v, b))
            if not any(e1 in pe and e2 in pe for pe in all_edge_sets):
                adjacent_covered = False
                adjacent_witness = (tuple(sorted(e1)), tuple(sorted(e2)))
                done = True
                break
        if done:
            break

    triangle_free = True
    triangle_witness = None
    for u in g.vertices:
        for v, w in combinations(sorted(g.adj[u]), 2):
            if w in g.adj[v]:
                triangle_free = False
                triangle_witness = tuple(sorted((u, v, w)))
                break
        if not triangle_free:
            break

    return OptimalityReport(
        edge_covered,
        edge_witness,
        adjacent_covered,
        adjacent_witness,
        triangle_free,
        triangle_witness,
    )
