"""Exhaustive search for optimal realisations of small metrics.

A realisation is a positively weighted connected graph containing the
metric's points among its vertices whose shortest-path distances restrict
to the metric. The search enumerates graph topologies over the points
plus a bounded number of auxiliary vertices, then minimizes total weight
per topology with an exact rational LP, branching over which path is
held tight for each point pair. Pruning is restricted to conditions that
provably hold for every optimal realisation: no triangles, no auxiliary
vertices of degree below three, point-point edges carry exactly their
distance, and adjacent edges must chain into shortest paths.

The module also provides the split-flow digraph of a realisation, its
strongly connected components, split potentials, and the perturbation
move that shortens or shrinks a realisation exhibiting an auxiliary-only
component certificate of non-minimality.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heappop, heappush
from itertools import combinations, permutations, product
from typing import Iterable, Mapping, Sequence

from .graphs import (
    WeightedGraph,
    enumerate_shortest_paths,
    is_realisation,
    path_edges,
    weighted_isomorphic,
)
from .linprog import enumerate_optima, minimize
from .metrics import FiniteMetric

Edge = frozenset


class RealizeError(ValueError):
    pass


class NotARealisation(RealizeError):
    def __init__(self, detail: str):
        super().__init__(f"input graph does not realise the metric: {detail}")


class EmptyCandidates(RealizeError):
    def __init__(self):
        super().__init__("no realisation candidates to select from")


class TerminalValueNotBinary(RealizeError):
    def __init__(self, x: str, value):
        self.witness = x
        super().__init__(f"potential value at terminal {x!r} is {value}, not 0 or 1")


class BudgetExceeded(RuntimeError):
    """Search ran out of budget; `partial` holds the non-exhaustive findings."""

    def __init__(self, reason: str, partial=None):
        self.reason = reason
        self.partial = partial if partial is not None else []
        super().__init__(f"search budget exceeded: {reason}")


@dataclass(frozen=True)
class SearchConfig:
    max_aux: int = 4
    max_degree: int | None = None
    time_budget: float | None = None
    parallelism: int = 1
    alternates_cap: int = 4096
    path_cap: int = 20000

    def __post_init__(self):
        if self.max_aux < 0:
            raise RealizeError("max_aux must be nonnegative")
        if self.parallelism < 1:
            raise RealizeError("parallelism must be at least 1")


@dataclass(frozen=True)
class Realisation:
    graph: WeightedGraph
    length: Fraction
    gamma_count: int


def gamma_paths(g: WeightedGraph) -> list:
    """All shortest paths between terminal pairs, each counted once."""
    return sorted(enumerate_shortest_paths(g, g.terminals))


def realisation_of(graph: WeightedGraph, m: FiniteMetric) -> Realisation:
    if not is_realisation(graph, m):
        raise NotARealisation("restricted shortest-path distances differ from the metric")
    for a in graph.aux_vertices:
        if graph.degree(a) <= 2:
            raise RealizeError(f"auxiliary vertex {a!r} has degree {graph.degree(a)}")
    return Realisation(
        graph, graph.total_length, len(enumerate_shortest_paths(graph, graph.terminals))
    )


# ---------------------------------------------------------------------------
# Dijkstra over a raw weight map that may contain zeros (candidate solutions
# before positivity filtering); parents follow one shortest-path tree.


def _adjacency(vertices, weights: Mapping[Edge, Fraction]) -> dict[str, list[tuple[str, Fraction]]]:
    adj: dict[str, list[tuple[str, Fraction]]] = {v: [] for v in vertices}
    for e, w in weights.items():
        u, v = sorted(e)
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def _wdist(adj: Mapping[str, Sequence[tuple[str, Fraction]]], source: str):
    dist = {source: Fraction(0)}
    parent: dict[str, str] = {}
    heap = [(Fraction(0), source)]
    done = set()
    while heap:
        du, u = heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in sorted(adj[u]):
            nd = du + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heappush(heap, (nd, v))
    return dist, parent


def _simple_paths(adj: Mapping[str, Iterable[str]], a: str, b: str, cap: int) -> list[tuple[str, ...]]:
    """Every simple path from a to b in an unweighted adjacency map."""
    out: list[tuple[str, ...]] = []
    stack: list[tuple[str, tuple[str, ...]]] = [(a, (a,))]
    while stack:
        u, path = stack.pop()
        if u == b:
            out.append(path)
            if len(out) > cap:
                raise BudgetExceeded(f"more than {cap} simple paths between {a!r} and {b!r}")
            continue
        for v in sorted(adj[u]):
            if v not in path:
                stack.append((v, path + (v,)))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# topology enumeration


def _gromov_pin(m: FiniteMetric, terminals: Sequence[str]) -> dict[str, Fraction] | None:
    """Star weights forced on an auxiliary vertex adjacent to >= 3 points.

    Every pair x, y of its point neighbours must satisfy
    w(x) + w(y) = d(x, y); returns the unique positive solution or None.
    """
    x, y, z = terminals[0], terminals[1], terminals[2]
    w: dict[str, Fraction] = {x: (m.d(x, y) + m.d(x, z) - m.d(y, z)) / 2}
    for t in terminals[1:]:
        w[t] = m.d(x, t) - w[x]
    for a, b in combinations(terminals, 2):
        if w[a] + w[b] != m.d(a, b):
            return None
    if any(v <= 0 for v in w.values()):
        return None
    return w


def _irreducible_pairs(m: FiniteMetric) -> set[tuple[str, str]]:
    """Pairs with no third point lying metrically between them."""
    return {
        (x, y)
        for x, y in m.pairs()
        if all(
            m.d(x, z) + m.d(z, y) > m.d(x, y)
            for z in m.labels
            if z != x and z != y
        )
    }


def _terminal_edge_sets(m: FiniteMetric) -> list[frozenset]:
    """Point-point edge sets compatible with optimality.

    Only irreducible pairs qualify: when d(x, y) = d(x, z) + d(z, y) an
    edge xy can be replaced by shortest paths x..z..y, which never use
    that edge, so deleting it keeps every distance and shortens the
    graph. No triangle, and two edges sharing an endpoint y must chain:
    d(x, z) = d(x, y) + d(y, z), since both lie on one shortest path.
    """
    irreducible = _irreducible_pairs(m)
    pairs = [frozenset(p) for p in irreducible]
    pairs.sort(key=sorted)
    out: list[frozenset] = []

    def admits(chosen: list[Edge], e: Edge) -> bool:
        for f in chosen:
            if e & f:
                (shared,) = e & f
                (a,) = e - f
                (b,) = f - e
                if frozenset((a, b)) in chosen:
                    return False
                if m.d(a, b) != m.d(a, shared) + m.d(shared, b):
                    return False
        return True

    def rec(i: int, chosen: list[Edge]):
        if i == len(pairs):
            out.append(frozenset(chosen))
            return
        rec(i + 1, chosen)
        if admits(chosen, pairs[i]):
            chosen.append(pairs[i])
            rec(i + 1, chosen)
            chosen.pop()

    rec(0, [])
    return out


def _aux_names(labels: Sequence[str], count: int) -> list[str]:
    prefix = "q"
    while any(x.startswith(prefix) for x in labels):
        prefix += "q"
    return [f"{prefix}{i}" for i in range(1, count + 1)]


@dataclass
class _Topology:
    vertices: tuple[str, ...]
    edges: frozenset
    pinned: dict[Edge, Fraction]
    pair_equalities: list[tuple[Edge, Edge, Fraction]]  # w(e1) + w(e2) = rhs


def _connected(vertices: Sequence[str], edges: Iterable[Edge]) -> bool:
    adj: dict[str, set[str]] = {v: set() for v in vertices}
    for e in edges:
        u, v = sorted(e)
        adj[u].add(v)
        adj[v].add(u)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(vertices)


def _lex_min_under_aux_permutation(
    edges: frozenset, blocks: Sequence[Sequence[str]]
) -> bool:
    """Is this labelling canonical among permutations of interchangeable
    auxiliaries? Only auxiliaries in the same block (same point
    neighbourhood) may trade names."""
    def encode(mapping: dict[str, str]) -> tuple:
        return tuple(sorted(tuple(sorted(mapping.get(v, v) for v in e)) for e in edges))

    ident = encode({})
    swappable = [b for b in blocks if len(b) > 1]
    for perms in product(*(permutations(b) for b in swappable)):
        mapping = {}
        for block, perm in zip(swappable, perms):
            mapping.update(zip(block, perm))
        if encode(mapping) < ident:
            return False
    return True


def enumerate_topologies(
    m: FiniteMetric,
    cfg: SearchConfig,
    deadline: float | None = None,
    bound=None,
):
    """Yield candidate topologies with forced weights and edge equalities.

    Connected, simple, triangle-free, auxiliary degree at least three,
    one representative per relabelling of the auxiliaries. Iterates by
    auxiliary count so a caller-supplied live upper bound (a zero-arg
    callable returning the best total length so far) can prune: forced
    weight already above the bound cannot become optimal.
    """
    labels = m.labels
    n = len(labels)
    max_deg = cfg.max_degree if cfg.max_degree is not None else n + cfg.max_aux
    if bound is None:
        bound = lambda: None

    small_sets = [frozenset()] + [frozenset(c) for r in (1, 2) for c in combinations(labels, r)]
    pinned_sets: dict[frozenset, dict[str, Fraction]] = {}
    for r in range(3, n + 1):
        for c in combinations(labels, r):
            pin = _gromov_pin(m, c)
            if pin is not None:
                pinned_sets[frozenset(c)] = pin

    edge_sets = []
    for e0 in _terminal_edge_sets(m):
        term_deg = {x: sum(1 for e in e0 if x in e) for x in labels}
        if any(v > max_deg for v in term_deg.values()):
            continue
        pinned_sum = sum((m.d(*sorted(e)) for e in e0), Fraction(0))
        edge_sets.append((pinned_sum, e0, term_deg))
    edge_sets.sort(key=lambda t: (t[0], sorted(map(sorted, t[1]))))

    for k in range(cfg.max_aux + 1):
        for pinned_sum, e0, term_deg in edge_sets:
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded("time budget during topology enumeration")
            b = bound()
            if b is not None and pinned_sum > b:
                continue
            if k == 0:
                if _connected(labels, e0):
                    yield _Topology(tuple(labels), e0, {e: m.d(*sorted(e)) for e in e0}, [])
                continue

            def t_ok(ts: frozenset) -> bool:
                # adjacent to two already-adjacent points closes a triangle
                return not any(frozenset(p) in e0 for p in combinations(sorted(ts), 2))

            t_options = [ts for ts in small_sets if t_ok(ts)]
            t_options += sorted((ts for ts in pinned_sets if t_ok(ts)), key=sorted)
            # forced length contribution of an auxiliary's point edges
            t_cost = [
                sum(pinned_sets[ts].values(), Fraction(0))
                if len(ts) >= 3
                else (m.d(*sorted(ts)) if len(ts) == 2 else Fraction(0))
                for ts in t_options
            ]
            yield from _aux_structures(
                m, e0, pinned_sum, labels, _aux_names(labels, k),
                t_options, t_cost, pinned_sets, max_deg, term_deg, deadline, bound,
            )


def _aux_structures(
    m, e0, pinned_sum, labels, aux, t_options, t_cost, pinned_sets,
    max_deg, term_deg, deadline, bound,
):
    k = len(aux)
    chosen_t: list[int] = []  # indexes into t_options, kept nondecreasing
    chosen_a: list[frozenset] = []
    in_e0 = {x for e in e0 for x in e}
    # how many uncovered points the sets from an index onward can adopt
    suffix_max = [0] * (len(t_options) + 1)
    for i in range(len(t_options) - 1, -1, -1):
        suffix_max[i] = max(suffix_max[i + 1], len(t_options[i]))

    def aux_degree(i: int) -> int:
        return (
            len(t_options[chosen_t[i]])
            + len(chosen_a[i])
            + sum(1 for j in range(len(chosen_a)) if i in chosen_a[j])
        )

    def finish():
        if any(not (3 <= aux_degree(i) <= max_deg) for i in range(k)):
            return
        for x in labels:
            if term_deg[x] + sum(1 for ti in chosen_t if x in t_options[ti]) > max_deg:
                return
        edges = set(e0)
        for i in range(k):
            edges.update(frozenset((aux[i], x)) for x in t_options[chosen_t[i]])
            edges.update(frozenset((aux[i], aux[j])) for j in chosen_a[i])
        edges = frozenset(edges)
        vertices = tuple(labels) + tuple(aux)
        if not _connected(vertices, edges):
            return
        blocks = []
        for i in range(k):
            if i and chosen_t[i] == chosen_t[i - 1]:
                blocks[-1].append(aux[i])
            else:
                blocks.append([aux[i]])
        if not _lex_min_under_aux_permutation(edges, blocks):
            return
        pinned = {e: m.d(*sorted(e)) for e in e0}
        equalities: list[tuple[Edge, Edge, Fraction]] = []
        for i in range(k):
            ts = t_options[chosen_t[i]]
            if len(ts) >= 3:
                pin = pinned_sets[ts]
                for x in ts:
                    pinned[frozenset((aux[i], x))] = pin[x]
            elif len(ts) == 2:
                x, y = sorted(ts)
                equalities.append((frozenset((aux[i], x)), frozenset((aux[i], y)), m.d(x, y)))
        yield _Topology(vertices, edges, pinned, equalities)

    def rec(j: int, forced: Fraction):
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("time budget during topology enumeration")
        if j == k:
            yield from finish()
            return
        remaining = k - j - 1
        start = chosen_t[-1] if chosen_t else 0
        covered = in_e0.union(*(t_options[ti] for ti in chosen_t)) if chosen_t else in_e0
        uncovered = len(labels) - len(covered)
        for ti in range(start, len(t_options)):
            b = bound()
            if b is not None and forced + t_cost[ti] > b:
                continue
            ts = t_options[ti]
            # every point needs positive degree, and the remaining
            # auxiliaries pick their sets at indexes >= ti
            if uncovered - len(ts - covered) > remaining * suffix_max[ti]:
                continue
            for bits in range(1 << j):
                a_prev = frozenset(i for i in range(j) if bits >> i & 1)
                if len(ts) + len(a_prev) + remaining < 3:
                    continue
                if any(t_options[chosen_t[i]] & ts for i in a_prev):
                    continue  # adjacent auxiliaries sharing a point close a triangle
                if any(
                    i2 in chosen_a[i1] or i1 in chosen_a[i2]
                    for i1, i2 in combinations(sorted(a_prev), 2)
                ):
                    continue  # auxiliary triangle
                chosen_t.append(ti)
                chosen_a.append(a_prev)
                ok = True
                for i in range(j):
                    deg = aux_degree(i)
                    if deg + remaining < 3 or deg > max_deg:
                        ok = False
                        break
                if ok:
                    yield from rec(j + 1, forced + t_cost[ti])
                chosen_t.pop()
                chosen_a.pop()

    yield from rec(0, pinned_sum)


# ---------------------------------------------------------------------------
# per-topology exact weight minimisation


class _TopologySolver:
    """Lazy cutting-plane / tight-path branching over one topology."""

    def __init__(self, m: FiniteMetric, topo: _Topology, cfg: SearchConfig, deadline, box=None):
        self.m = m
        self.topo = topo
        self.cfg = cfg
        self.deadline = deadline
        self.box = box if box is not None else [None]
        # reducible pairs are realised as soon as their parts are, and
        # tight paths of irreducible pairs never cross another point
        self.irreducible = _irreducible_pairs(m)
        self.free = sorted((e for e in topo.edges if e not in topo.pinned), key=sorted)
        self.index = {e: i for i, e in enumerate(self.free)}
        self.pinned_total = sum(topo.pinned.values(), Fraction(0))
        self.terminal_set = set(m.labels)
        self.adj_plain: dict[str, list[str]] = {v: [] for v in topo.vertices}
        for e in topo.edges:
            u, v = sorted(e)
            self.adj_plain[u].append(v)
            self.adj_plain[v].append(u)
        self.base_eq: list[tuple[list[Fraction], Fraction]] = []
        for e1, e2, rhs in topo.pair_equalities:
            row = [Fraction(0)] * len(self.free)
            for e in (e1, e2):
                row[self.index[e]] += 1
            self.base_eq.append((row, rhs))
        self.cuts: list[tuple[tuple[Fraction, ...], Fraction]] = []
        self.cut_keys: set = set()
        self.visited: set[frozenset] = set()
        self.solutions: list[tuple[Fraction, dict[Edge, Fraction]]] = []

    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget during weight minimisation")

    def _path_row(self, path: tuple[str, ...]) -> tuple[tuple[Fraction, ...], Fraction]:
        row = [Fraction(0)] * len(self.free)
        const = Fraction(0)
        for e in path_edges(path):
            if e in self.index:
                row[self.index[e]] += 1
            else:
                const += self.topo.pinned[e]
        return tuple(row), const

    def _add_cut(self, path: tuple[str, ...], target: Fraction) -> bool:
        row, const = self._path_row(path)
        key = (row, target - const)
        if key in self.cut_keys:
            return False
        self.cut_keys.add(key)
        self.cuts.append((row, target - const))
        return True

    def _weights_from(self, x: Sequence[Fraction]) -> dict[Edge, Fraction]:
        w = dict(self.topo.pinned)
        for e, i in self.index.items():
            w[e] = x[i]
        return w

    def _distances(self, w: Mapping[Edge, Fraction]):
        adj = _adjacency(self.topo.vertices, w)
        dist = {}
        parent = {}
        for x in self.m.labels:
            dist[x], parent[x] = _wdist(adj, x)
        return dist, parent

    @staticmethod
    def _extract_path(parent: Mapping[str, str], source: str, target: str) -> tuple[str, ...]:
        path = [target]
        while path[-1] != source:
            path.append(parent[path[-1]])
        path.reverse()
        return tuple(path)

    def _bound(self) -> Fraction | None:
        return self.box[0]

    def solve(self, equalities: list) -> None:
        """Explore one branch node; values strictly above the bound are cut."""
        self._check_time()
        key = frozenset((tuple(row), rhs) for row, rhs in equalities)
        if key in self.visited:
            return
        self.visited.add(key)
        while True:
            a_eq = [list(row) for row, _ in self.base_eq] + [list(row) for row, _ in equalities]
            b_eq = [rhs for _, rhs in self.base_eq] + [rhs for _, rhs in equalities]
            a_ge = [list(row) for row, _ in self.cuts]
            b_ge = [rhs for _, rhs in self.cuts]
            res = minimize([Fraction(1)] * len(self.free), a_eq, b_eq, a_ge, b_ge)
            if res.status == "infeasible":
                return
            if res.status != "optimal":
                raise RealizeError("weight minimisation degenerated to an unbounded program")
            bound = self._bound()
            if bound is not None and res.objective + self.pinned_total > bound:
                return
            w = self._weights_from(res.x)
            dist, parent = self._distances(w)
            added = False
            for x, y in self.m.pairs():
                if dist[x][y] < self.m.d(x, y):
                    added |= self._add_cut(self._extract_path(parent[x], x, y), self.m.d(x, y))
            if added:
                self._check_time()
                continue
            unreal = [
                (x, y)
                for x, y in self.m.pairs()
                if dist[x][y] > self.m.d(x, y) and (x, y) in self.irreducible
            ]
            if unreal:
                self._branch(equalities, unreal)
                return
            if any(dist[x][y] != self.m.d(x, y) for x, y in self.m.pairs()):
                # every long pair reduces through realised points, so an
                # irreducible long pair would have existed above
                raise RealizeError("pair reduction loop failed to converge")
            self._collect(a_eq, b_eq)
            return

    def _tight_path_options(self, x: str, y: str) -> list:
        """Candidate tight paths: interior visits no point, forced part
        within distance."""
        usable = {}
        for p in _simple_paths(self.adj_plain, x, y, self.cfg.path_cap):
            if any(v in self.terminal_set for v in p[1:-1]):
                continue
            row, const = self._path_row(p)
            if const <= self.m.d(x, y):
                usable[(row, self.m.d(x, y) - const)] = True
        return sorted(usable)

    def _branch(self, equalities, unreal) -> None:
        options = [self._tight_path_options(x, y) for x, y in unreal]
        options.sort(key=len)
        for row, rhs in options[0]:
            self.solve(equalities + [(list(row), rhs)])
            self._check_time()

    def _collect(self, a_eq, b_eq) -> None:
        """Leaf: enumerate the optimal face's vertices, validating each."""
        while True:
            a_ge = [list(row) for row, _ in self.cuts]
            b_ge = [rhs for _, rhs in self.cuts]
            enum = enumerate_optima(
                [Fraction(1)] * len(self.free), a_eq, b_eq, a_ge, b_ge,
                cap=self.cfg.alternates_cap,
            )
            if enum.result.status != "optimal":
                return
            if not enum.complete:
                raise BudgetExceeded("alternate-optimum enumeration cap")
            refined = False
            found: list[dict[Edge, Fraction]] = []
            for x in enum.vertices:
                w = self._weights_from(x)
                dist, parent = self._distances(w)
                short = [(a, b) for a, b in self.m.pairs() if dist[a][b] < self.m.d(a, b)]
                if short:
                    for a, b in short:
                        refined |= self._add_cut(self._extract_path(parent[a], a, b), self.m.d(a, b))
                    continue
                if any(dist[a][b] > self.m.d(a, b) for a, b in self.m.pairs()):
                    continue  # optimal for the relaxation but not a realisation
                found.append(w)
            if refined:
                self._check_time()
                continue
            value = enum.result.objective + self.pinned_total
            if found and (self.box[0] is None or value < self.box[0]):
                self.box[0] = value
            self.solutions.extend((value, w) for w in found)
            return


def optimal_realisations(m: FiniteMetric, cfg: SearchConfig | None = None) -> list[Realisation]:
    """All optimal realisations with at most cfg.max_aux auxiliary
    vertices, up to weighted isomorphism, each one a vertex of the
    weight polytope of its topology. Exact arithmetic throughout."""
    cfg = cfg or SearchConfig()
    deadline = time.monotonic() + cfg.time_budget if cfg.time_budget else None
    labels = m.labels
    box = [sum((m.d(x, y) for x, y in m.pairs()), Fraction(0))]  # complete graph bound
    pool: list[tuple[Fraction, dict[Edge, Fraction]]] = []

    try:
        for topo in enumerate_topologies(m, cfg, deadline, bound=lambda: box[0]):
            if sum(topo.pinned.values(), Fraction(0)) > box[0]:
                continue
            optimistic = {e: topo.pinned.get(e, Fraction(0)) for e in topo.edges}
            adj = _adjacency(topo.vertices, optimistic)
            feasible = True
            for x in labels:
                dist, _ = _wdist(adj, x)
                if any(dist[y] > m.d(x, y) for y in labels):
                    feasible = False  # even with free edges at zero, too far apart
                    break
            if not feasible:
                continue
            solver = _TopologySolver(m, topo, cfg, deadline, box)
            solver.solve([])
            pool.extend(solver.solutions)
    except BudgetExceeded as exc:
        raise BudgetExceeded(exc.reason, _assemble(m, box[0], pool)) from None
    out = _assemble(m, box[0], pool)
    if not out:
        raise RealizeError("no realisation found; the metric axioms guarantee one exists")
    return out


def _assemble(m: FiniteMetric, best: Fraction, pool) -> list[Realisation]:
    graphs: list[WeightedGraph] = []
    for value, w in pool:
        if value != best or any(v == 0 for v in w.values()):
            continue
        g = WeightedGraph(w, terminals=m.labels)
        if any(weighted_isomorphic(g, h) is not None for h in graphs):
            continue
        graphs.append(g)
    out = [realisation_of(g, m) for g in graphs]
    out.sort(key=lambda r: (-r.gamma_count, len(r.graph.vertices), r.graph.canonical_encoding()))
    return out


def select_minimal_path_saturated(cands: Iterable[Realisation]) -> Realisation:
    """Most shortest point paths, then fewest vertices, then canonical
    encoding; certified only within the search bound that produced the
    candidate set."""
    cands = list(cands)
    if not cands:
        raise EmptyCandidates()
    return min(
        cands,
        key=lambda r: (-r.gamma_count, len(r.graph.vertices), r.graph.canonical_encoding()),
    )


# ---------------------------------------------------------------------------
# split-flow digraphs


@dataclass(frozen=True)
class SplitFlowDigraph:
    vertices: tuple[str, ...]
    arcs: frozenset
    sccs: tuple[frozenset, ...]

    @property
    def scc_count(self) -> int:
        return len(self.sccs)


def _tarjan(vertices: Sequence[str], succ: Mapping[str, Iterable[str]]) -> tuple[frozenset, ...]:
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[frozenset] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work: list[tuple[str, Iterable[str]]] = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = counter
                    counter += 1
                    stack.append(u)
                    on_stack.add(u)
                    work.append((u, iter(sorted(succ[u]))))
                    advanced = True
                    break
                if u in on_stack:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    u = stack.pop()
                    on_stack.discard(u)
                    comp.add(u)
                    if u == v:
                        break
                out.append(frozenset(comp))
    return tuple(sorted(out, key=sorted))


def split_flow_digraph(r: Realisation, a_side: Iterable[str]) -> SplitFlowDigraph:
    g = r.graph
    a = frozenset(a_side)
    terminals = set(g.terminals)
    if not a <= terminals:
        raise RealizeError(f"side {sorted(a)} is not a subset of the terminals")
    adj = {v: [(u, g.weight(v, u)) for u in g.neighbors(v)] for v in g.vertices}
    dist = {v: _wdist(adj, v)[0] for v in g.vertices}
    arcs: set[tuple[str, str]] = set()
    for u, v, w in g.edges():
        for x, y in combinations(sorted(terminals), 2):
            fwd = dist[x][u] + w + dist[v][y] == dist[x][y]
            rev = dist[x][v] + w + dist[u][y] == dist[x][y]
            if (x in a) == (y in a):
                if fwd or rev:
                    arcs.add((u, v))
                    arcs.add((v, u))
            else:
                xa_first = x in a
                if fwd:
                    arcs.add((u, v) if xa_first else (v, u))
                if rev:
                    arcs.add((v, u) if xa_first else (u, v))
    succ: dict[str, set[str]] = {v: set() for v in g.vertices}
    for s, t in arcs:
        succ[s].add(t)
    return SplitFlowDigraph(g.vertices, frozenset(arcs), _tarjan(g.vertices, succ))


@dataclass
class SCCCountReport:
    counts: dict[frozenset, int]
    violations: list[frozenset] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_scc_count(
    r: Realisation,
    claimed_minimal_path_saturated: bool,
    sides: Iterable[frozenset] | None = None,
) -> SCCCountReport:
    """SCC counts of the split-flow digraph over every side (default: all
    subsets of the terminals); counts outside {1, 2} are collected as
    violations when the input claims minimal path-saturation."""
    terminals = sorted(r.graph.terminals)
    if sides is None:
        sides = [
            frozenset(c)
            for k in range(len(terminals) + 1)
            for c in combinations(terminals, k)
        ]
    report = SCCCountReport({})
    for side in sides:
        count = split_flow_digraph(r, side).scc_count
        report.counts[frozenset(side)] = count
        if claimed_minimal_path_saturated and count not in (1, 2):
            report.violations.append(frozenset(side))
    return report


# ---------------------------------------------------------------------------
# split potentials


def check_split_potential(r: Realisation, values: Mapping[str, object]) -> bool:
    """Is the vertex map monotone along every shortest point path?

    Values must be 0 or 1 on the terminals. With affine interpolation on
    edges, monotonicity of the vertex sequence along each path is the
    same as monotonicity along the corresponding geodesic.
    """
    try:
        vals = {v: Fraction(values[v]) for v in r.graph.vertices}
    except KeyError as exc:
        raise RealizeError(f"potential is missing a value for vertex {exc.args[0]!r}") from None
    for x in r.graph.terminals:
        if vals[x] not in (Fraction(0), Fraction(1)):
            raise TerminalValueNotBinary(x, vals[x])
    for path in gamma_paths(r.graph):
        seq = [vals[v] for v in path]
        diffs = [b - a for a, b in zip(seq, seq[1:])]
        if any(dv > 0 for dv in diffs) and any(dv < 0 for dv in diffs):
            return False
    return True


def verify_potential_vertex_binarity(r: Realisation, values: Mapping[str, object]) -> bool:
    return all(Fraction(values[v]) in (Fraction(0), Fraction(1)) for v in r.graph.vertices)


# ---------------------------------------------------------------------------
# the perturbation move behind the two-component certificate


def scc_perturbation_improve(
    r: Realisation, m: FiniteMetric, a_side: Iterable[str], path_cap: int = 20000
) -> Realisation | None:
    """Try to shorten or shrink a realisation along an auxiliary-only
    strongly connected component of its split-flow digraph.

    Edge weights move by epsilon times +1 on edges whose arc enters the
    component and -1 on leaving edges, with the orientation flipped so
    the total drift is nonpositive. Shortest point paths cross the
    component in balanced fashion, so distances survive small epsilon;
    exact ray-shooting over all simple point paths gives the largest
    usable epsilon. A strict drift shortens the realisation; hitting the
    smallest leaving weight zeroes edges that are then contracted,
    shrinking it. Returns None when no component yields either.
    """
    g = r.graph
    if not is_realisation(g, m):
        raise NotARealisation("perturbation input")
    terminals = set(g.terminals)
    digraph = split_flow_digraph(r, a_side)
    plain_adj: dict[str, list[str]] = {v: list(g.neighbors(v)) for v in g.vertices}
    for scc in digraph.sccs:
        if scc & terminals:
            continue
        delta: dict[Edge, int] = {}
        for u, v, w in g.edges():
            e = frozenset((u, v))
            if (u in scc) == (v in scc):
                delta[e] = 0
            elif (u, v) in digraph.arcs:
                delta[e] = 1 if v in scc else -1
            elif (v, u) in digraph.arcs:
                delta[e] = 1 if u in scc else -1
            else:
                delta[e] = 0  # edge on no shortest path: leave it alone
        drift = sum(delta.values())
        if drift > 0:
            delta = {e: -dv for e, dv in delta.items()}
            drift = -drift
        leaving = [g.weight(*sorted(e)) for e, dv in delta.items() if dv == -1]
        if not leaving:
            continue
        t = min(leaving)
        epsilon = t
        # segments free of interior points suffice: any other path splits
        # at its interior points and the triangle inequality covers it
        for x, y in combinations(sorted(terminals), 2):
            for path in _simple_paths(plain_adj, x, y, path_cap):
                if any(v in terminals for v in path[1:-1]):
                    continue
                dq = sum(delta[e] for e in path_edges(path))
                if dq < 0:
                    slack = sum(g.weight(*sorted(e)) for e in path_edges(path)) - m.d(x, y)
                    epsilon = min(epsilon, slack / (-dq))
        if epsilon <= 0:
            continue
        new_w = {e: g.weight(*sorted(e)) + epsilon * dv for e, dv in delta.items()}
        if epsilon < t:
            if drift == 0:
                continue  # same length, same graph: nothing gained
            improved = WeightedGraph(new_w, terminals=g.terminals)
        else:
            improved = _contract_zero(new_w, g.terminals)
        result = realisation_of(improved, m)
        if result.length > r.length:
            raise RealizeError("perturbation increased total length")
        return result
    return None


def _contract_zero(weights: dict[Edge, Fraction], terminals: Sequence[str]) -> WeightedGraph:
    """Contract zero-weight edges, then clean up low-degree auxiliaries.

    Parallel edges produced by a merge keep the smaller weight, which
    preserves every distance; the same applies when suppressing a
    degree-two auxiliary whose neighbours are already adjacent.
    """
    merged = dict(weights)
    terminals = tuple(terminals)

    def merge_into(rm: str, keep: str):
        nonlocal merged
        out: dict[Edge, Fraction] = {}
        for e, w in merged.items():
            e2 = frozenset(keep if x == rm else x for x in e)
            if len(e2) == 1:
                continue
            out[e2] = min(out[e2], w) if e2 in out else w
        merged = out

    changed = True
    while changed:
        changed = False
        for e, w in sorted(merged.items(), key=lambda kv: sorted(kv[0])):
            if w == 0:
                u, v = sorted(e)
                rm, keep = (u, v) if u not in terminals else (v, u)
                merge_into(rm, keep)
                changed = True
                break
        if changed:
            continue
        incident: dict[str, list[Edge]] = {}
        for e in merged:
            for v in e:
                incident.setdefault(v, []).append(e)
        for v in sorted(incident):
            if v in terminals:
                continue
            edges = incident[v]
            if len(edges) == 1:
                del merged[edges[0]]
                changed = True
                break
            if len(edges) == 2:
                (a,) = edges[0] - {v}
                (b,) = edges[1] - {v}
                w = merged[edges[0]] + merged[edges[1]]
                del merged[edges[0]], merged[edges[1]]
                e2 = frozenset((a, b))
                merged[e2] = min(merged[e2], w) if e2 in merged else w
                changed = True
                break
    return WeightedGraph(merged, terminals=terminals)
