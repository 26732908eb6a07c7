"""The tight span of a finite metric and its graph of low-dimensional faces.

A tight point is a minimal element of the polyhedron of functions f with
f(x) + f(y) >= d(x, y). The graph collects the polyhedron's vertices and
the one-dimensional faces connecting them, weighted by the sup distance
between endpoints. Two independent construction routes are provided: via
the Buneman complex of the split decomposition (when it applies), and by
direct enumeration of tight constraint systems; they must agree wherever
both are defined.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .buneman import BunemanPoint, buneman_edges, buneman_vertices, lambda_image, phi
from .graphs import WeightedGraph, dijkstra
from .metrics import FiniteMetric
from .splits import (
    GroundSetTooLarge,
    SplitError,
    WeightedSplitSystem,
    decompose,
    is_octahedral_free,
    is_weakly_compatible,
)


class TightSpanError(ValueError):
    pass


class NotTwoDecomposable(TightSpanError):
    def __init__(self, reason: str):
        super().__init__(f"metric has no usable split decomposition: {reason}")


class TightPoint:
    """Function from the points of a metric to nonnegative rationals."""

    __slots__ = ("labels", "values")

    def __init__(self, labels: Sequence[str], values):
        self.labels: tuple[str, ...] = tuple(labels)
        if isinstance(values, Mapping):
            vals = tuple(Fraction(values[x]) for x in self.labels)
        else:
            vals = tuple(Fraction(v) for v in values)
        if len(vals) != len(self.labels):
            raise TightSpanError("value count does not match label count")
        self.values = vals

    def __getitem__(self, x: str) -> Fraction:
        return self.values[self.labels.index(x)]

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.labels, self.values))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TightPoint)
            and self.labels == other.labels
            and self.values == other.values
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.values))

    def __repr__(self) -> str:
        return f"TightPoint({', '.join(f'{x}:{v}' for x, v in zip(self.labels, self.values))})"


def kuratowski(m: FiniteMetric, x: str) -> TightPoint:
    """The distance row of x, always a vertex of the polyhedron."""
    return TightPoint(m.labels, [m.d(x, y) for y in m.labels])


def d_inf(f: TightPoint, g: TightPoint) -> Fraction:
    if f.labels != g.labels:
        raise TightSpanError("points live over different label sets")
    return max(abs(a - b) for a, b in zip(f.values, g.values))


def in_polyhedron(m: FiniteMetric, f: TightPoint) -> bool:
    n = m.size
    vals = f.values
    for i in range(n):
        if vals[i] < 0:
            return False
        for j in range(i + 1, n):
            if vals[i] + vals[j] < m.rows[i][j]:
                return False
    return True


def is_tight_point(m: FiniteMetric, f: TightPoint) -> bool:
    """Membership plus minimality: f(x) = max_y (d(x,y) - f(y)) for all x."""
    if f.labels != m.labels:
        return False
    if not in_polyhedron(m, f):
        return False
    n = m.size
    vals = f.values
    for i in range(n):
        if vals[i] != max(m.rows[i][j] - vals[j] for j in range(n)):
            return False
    return True


def _constraints(m: FiniteMetric) -> list[tuple[int, int, Fraction]]:
    """Equality candidates: pair rows f(i)+f(j) = d(i,j) and loop rows f(i) = 0."""
    n = m.size
    rows: list[tuple[int, int, Fraction]] = [(i, i, Fraction(0)) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows.append((i, j, m.rows[i][j]))
    return rows


def _solve_constraint_graph(n: int, chosen) -> tuple[Fraction, ...] | None:
    """Unique solution of the chosen tightness rows, or None.

    On each connected component values propagate as a + s*t with sign s
    alternating along pair rows; a loop row pins f(i) = 0 and an odd
    cycle pins t. Components that stay bipartite and loop-free, or
    untouched coordinates, leave a free parameter: not unique.
    """
    base: list[Fraction | None] = [None] * n
    sign: list[int] = [0] * n
    adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    loops: list[int] = []
    for i, j, c in chosen:
        if i == j:
            loops.append(i)
        else:
            adj[i].append((j, c))
            adj[j].append((i, c))
    visited = [False] * n
    values: list[Fraction | None] = [None] * n
    for root in range(n):
        if visited[root]:
            continue
        comp = [root]
        visited[root] = True
        base[root] = Fraction(0)
        sign[root] = 1
        stack = [root]
        t_value: Fraction | None = None
        while stack:
            u = stack.pop()
            for v, c in adj[u]:
                nb = c - base[u]
                ns = -sign[u]
                if not visited[v]:
                    visited[v] = True
                    base[v] = nb
                    sign[v] = ns
                    comp.append(v)
                    stack.append(v)
                else:
                    if sign[v] == ns:
                        if base[v] != nb:
                            return None  # inconsistent even cycle
                    else:
                        # f(v) both a+t and b-t: pins 2t = b - a
                        cand = (nb - base[v]) / (sign[v] - ns)
                        if t_value is None:
                            t_value = cand
                        elif t_value != cand:
                            return None
        for i in loops:
            if i in (comp if len(comp) < 8 else set(comp)):
                # f(i) = 0 pins base[i] + sign[i]*t = 0
                cand = -base[i] / sign[i]
                if t_value is None:
                    t_value = cand
                elif t_value != cand:
                    return None
        if t_value is None:
            return None  # free parameter: bipartite, loop-free component
        for v in comp:
            values[v] = base[v] + sign[v] * t_value
    return tuple(values)  # type: ignore[arg-type]


def tight_span_vertices(m: FiniteMetric, max_points: int = 10) -> list[TightPoint]:
    """Vertices of the polyhedron, i.e. the zero-dimensional faces.

    Every vertex is the unique solution of some n tight rows, so all
    n-subsets of the candidate rows are solved combinatorially, then
    filtered by feasibility and minimality and deduplicated.
    """
    n = m.size
    if n > max_points:
        raise GroundSetTooLarge(n, max_points)
    rows = _constraints(m)
    seen: set[tuple[Fraction, ...]] = set()
    out: list[TightPoint] = []
    for chosen in combinations(rows, n):
        sol = _solve_constraint_graph(n, chosen)
        if sol is None or sol in seen:
            continue
        seen.add(sol)
        f = TightPoint(m.labels, sol)
        if is_tight_point(m, f):
            out.append(f)
    out.sort(key=lambda f: f.values)
    return out


def _tight_rows_at(m: FiniteMetric, f: TightPoint) -> list[tuple[int, int, Fraction]]:
    n = m.size
    vals = f.values
    rows: list[tuple[int, int, Fraction]] = []
    for i in range(n):
        if vals[i] == 0:
            rows.append((i, i, Fraction(0)))
        for j in range(i + 1, n):
            if vals[i] + vals[j] == m.rows[i][j]:
                rows.append((i, j, m.rows[i][j]))
    return rows


def _face_dimension(n: int, rows) -> int:
    """Affine dimension of the solution space of the tightness rows.

    Rank counts, per connected component of the constraint graph,
    size - 1 plus one if the component pins its parameter (loop or odd
    cycle); untouched coordinates are their own free components.
    """
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = []
    looped: set[int] = set()
    touched: set[int] = set()
    for i, j, _ in rows:
        touched.add(i)
        touched.add(j)
        if i == j:
            looped.add(i)
        else:
            edges.append((i, j))
            ra, rb = find(i), find(j)
            if ra != rb:
                parent[ra] = rb
    comp_nodes: dict[int, list[int]] = {}
    for v in range(n):
        comp_nodes.setdefault(find(v), []).append(v)
    rank = 0
    for nodes in comp_nodes.values():
        nodes_set = set(nodes)
        comp_edges = [e for e in edges if e[0] in nodes_set]
        if len(nodes) == 1 and nodes[0] not in touched:
            continue  # free coordinate, contributes nothing to rank
        rank += len(nodes) - 1
        has_loop = any(v in looped for v in nodes)
        # odd cycle <=> component not bipartite
        color: dict[int, int] = {}
        odd = False
        for start in nodes:
            if start in color:
                continue
            color[start] = 0
            stack = [start]
            while stack:
                u = stack.pop()
                for a, b in comp_edges:
                    if a == u or b == u:
                        v = b if a == u else a
                        if v not in color:
                            color[v] = 1 - color[u]
                            stack.append(v)
                        elif color[v] == color[u]:
                            odd = True
        if has_loop or odd:
            rank += 1
    return n - rank


@dataclass
class TightSpanGraph:
    """Graph of 0- and 1-dimensional faces with sup-distance weights.

    Vertices are named: a point equal to some kuratowski row gets that
    label (and is a terminal of `graph`); the rest get t0, t1, ... in
    sorted coordinate order. `points` maps names back to coordinates.
    """

    metric: FiniteMetric
    graph: WeightedGraph
    points: dict[str, TightPoint]

    def point_name(self, f: TightPoint) -> str | None:
        for name, p in self.points.items():
            if p == f:
                return name
        return None


def _assemble(m: FiniteMetric, vertices: list[TightPoint], edge_pairs) -> TightSpanGraph:
    kappa = {kuratowski(m, x): x for x in m.labels}
    names: dict[TightPoint, str] = {}
    aux_counter = 0
    for f in sorted(vertices, key=lambda f: f.values):
        if f in kappa:
            names[f] = kappa[f]
        else:
            names[f] = f"t{aux_counter}"
            aux_counter += 1
    edges: dict[frozenset, Fraction] = {}
    for f, g in edge_pairs:
        edges[frozenset((names[f], names[g]))] = d_inf(f, g)
    graph = WeightedGraph(edges, terminals=m.labels)
    missing = set(names.values()) - set(graph.vertices)
    if missing:
        raise TightSpanError(f"isolated face vertices {sorted(missing)}")
    return TightSpanGraph(m, graph, {n: f for f, n in names.items()})


def tight_span_graph_buneman(
    m: FiniteMetric, system: WeightedSplitSystem | None = None
) -> TightSpanGraph:
    """Route via the split decomposition and the Buneman complex.

    Applies when the decomposition exists, is weakly compatible and has
    no octahedral configuration; then the complex maps cell-by-cell onto
    the tight span, so its vertices and edges transfer directly.
    """
    if system is None:
        try:
            system = decompose(m)
        except SplitError as exc:
            raise NotTwoDecomposable(str(exc)) from exc
    ok_wc, _ = is_weakly_compatible(system)
    if not ok_wc:
        raise NotTwoDecomposable("split system is not weakly compatible")
    ok_of, _ = is_octahedral_free(system)
    if not ok_of:
        raise NotTwoDecomposable("split system contains an octahedral configuration")
    bv = buneman_vertices(system)
    images: dict[BunemanPoint, TightPoint] = {
        v: TightPoint(m.labels, lambda_image(system, v)) for v in bv
    }
    if len(set(images.values())) != len(bv):
        raise TightSpanError("complex-to-span map is not injective on vertices")
    pairs = [
        (images[mu], images[nu]) for mu, nu, _ in buneman_edges(system, bv)
    ]
    return _assemble(m, list(images.values()), pairs)


def tight_span_graph_direct(m: FiniteMetric, max_points: int = 10) -> TightSpanGraph:
    """Route by direct enumeration: vertices, then one-dimensional faces.

    A vertex pair spans an edge iff the midpoint is a tight point whose
    tight-constraint system leaves exactly one degree of freedom; a
    redundant betweenness filter rejects pairs with a vertex strictly
    inside the segment.
    """
    vertices = tight_span_vertices(m, max_points=max_points)
    n = m.size
    pairs = []
    for f, g in combinations(vertices, 2):
        mid = TightPoint(m.labels, [(a + b) / 2 for a, b in zip(f.values, g.values)])
        if not is_tight_point(m, mid):
            continue
        if _face_dimension(n, _tight_rows_at(m, mid)) != 1:
            continue
        if any(_strictly_between(f, g, h) for h in vertices if h != f and h != g):
            continue
        pairs.append((f, g))
    return _assemble(m, vertices, pairs)


def _strictly_between(f: TightPoint, g: TightPoint, h: TightPoint) -> bool:
    """Is h on the open segment from f to g (componentwise affine)?"""
    t: Fraction | None = None
    for a, b, c in zip(f.values, g.values, h.values):
        if a == b:
            if c != a:
                return False
            continue
        cand = (c - a) / (b - a)
        if t is None:
            t = cand
        elif t != cand:
            return False
    return t is not None and 0 < t < 1


def tight_span_graph(
    m: FiniteMetric,
    route: str = "auto",
    system: WeightedSplitSystem | None = None,
    max_points: int = 10,
) -> TightSpanGraph:
    if route == "buneman":
        return tight_span_graph_buneman(m, system)
    if route == "direct":
        return tight_span_graph_direct(m, max_points=max_points)
    if route == "auto":
        try:
            return tight_span_graph_buneman(m, system)
        except (NotTwoDecomposable, SplitError):
            return tight_span_graph_direct(m, max_points=max_points)
    raise ValueError(f"unknown route {route!r}")


def routes_agree(m: FiniteMetric, system: WeightedSplitSystem | None = None) -> bool:
    """Weighted isomorphism between the two construction routes."""
    from .graphs import weighted_isomorphic

    a = tight_span_graph_buneman(m, system)
    b = tight_span_graph_direct(m)
    return weighted_isomorphic(a.graph, b.graph) is not None


def check_vertex_distance_property(
    m: FiniteMetric, system: WeightedSplitSystem | None = None
) -> tuple[bool, tuple[TightPoint, TightPoint] | None]:
    """Does sup distance equal graph distance for every vertex pair?

    Runs on any metric whose complex route applies; the property itself
    is guaranteed only when the decomposition is two-compatible, and the
    witness pair documents its failure beyond that class.
    """
    tsg = tight_span_graph_buneman(m, system)
    names = sorted(tsg.graph.vertices)
    for u in names:
        du = dijkstra(tsg.graph, u)
        for v in names:
            if v <= u:
                continue
            direct = d_inf(tsg.points[u], tsg.points[v])
            if du[v] != direct:
                return False, (tsg.points[u], tsg.points[v])
    return True, None
