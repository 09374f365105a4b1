"""Finite metric spaces, metric graphs, curves, and shortest-path primitives.

Everything downstream (fillings, uniformization, boundary probes) is built
on the types here.  All types are immutable after construction and all
operations are pure functions, so they are safe to call from concurrent
workers.

Determinism contract: whenever a minimizer is not unique, ties are broken
by vertex id (smallest id wins, see ``id_key``), so repeated runs produce
identical curves and reports.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import FormatError, ValidationError

METRIC_TOL = 1e-9


def id_key(v):
    """Total order on vertex/point ids of mixed JSON-scalar types.

    Numbers sort before strings, numbers by value, strings lexicographically.
    """
    if isinstance(v, bool):
        return (2, 0.0, repr(v))
    if isinstance(v, (int, float)):
        return (0, float(v), "")
    if isinstance(v, str):
        return (1, 0.0, v)
    return (2, 0.0, repr(v))


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite metric space given by coordinates or an explicit matrix.

    ``points`` is a tuple of ids; ``coords`` maps id -> coordinate tuple when
    the metric is Euclidean, otherwise ``matrix`` holds the n x n distances
    in the order of ``points``.
    """

    points: tuple
    coords: dict | None = None
    matrix: tuple | None = None

    def __post_init__(self):
        if not self.points:
            raise FormatError("space has no points")
        if len(set(map(str, self.points))) != len(self.points):
            raise FormatError("point ids must be unique (as strings)")
        if (self.coords is None) == (self.matrix is None):
            raise FormatError("exactly one of coords or matrix required")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            n = len(self.points)
            if m.shape != (n, n):
                raise FormatError(f"matrix shape {m.shape} != ({n}, {n})")
            if not np.all(np.isfinite(m)):
                raise FormatError("matrix has non-finite entries")
            if np.any(m < 0):
                raise FormatError("matrix has negative entries")

    def distance_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return np.asarray(self.matrix, dtype=float)
        pts = np.asarray([self.coords[p] for p in self.points], dtype=float)
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def diameter(self) -> float:
        return float(self.distance_matrix().max())

    def index_of(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}


@dataclass(frozen=True)
class MetricViolation:
    kind: str  # symmetry | diagonal | positivity | triangle
    where: tuple
    defect: float

    def to_dict(self):
        return {"kind": self.kind, "where": list(self.where), "defect": self.defect}


def validate_metric(space: FiniteMetricSpace, tol: float = METRIC_TOL) -> list:
    """Check the metric axioms, returning one violation record per failure.

    Structural problems (non-square matrix, negative entries) raise
    FormatError at construction; this reports axiom failures only.
    """
    d = space.distance_matrix()
    n = d.shape[0]
    out = []
    for i in range(n):
        if abs(d[i, i]) > tol:
            out.append(MetricViolation("diagonal", (space.points[i],), float(abs(d[i, i]))))
    asym = np.abs(d - d.T)
    for i, j in zip(*np.nonzero(np.triu(asym, 1) > tol)):
        out.append(
            MetricViolation("symmetry", (space.points[i], space.points[j]), float(asym[i, j]))
        )
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] <= tol:
                out.append(
                    MetricViolation("positivity", (space.points[i], space.points[j]), float(d[i, j]))
                )
    # triangle: d(i,j) <= d(i,k) + d(k,j), vectorized over (i,j) per k
    for k in range(n):
        slack = d - (d[:, k][:, None] + d[k, :][None, :])
        bad = np.argwhere(slack > tol)
        for i, j in bad:
            if i != k and j != k and i != j:
                out.append(
                    MetricViolation(
                        "triangle",
                        (space.points[i], space.points[j], space.points[k]),
                        float(slack[i, j]),
                    )
                )
    return out


@dataclass(frozen=True)
class MetricGraph:
    """Connected graph with positive edge lengths; path metric d.

    ``edges`` are (u, v, length) triples, at most one per unordered pair,
    no self-loops.  ``basepoint`` is the distinguished point p used by the
    uniformization; optional here.
    """

    vertices: tuple
    edges: tuple
    basepoint: object = None
    _adj: dict = field(init=False, repr=False, compare=False)
    _order: tuple = field(init=False, repr=False, compare=False)
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise FormatError("duplicate vertex ids")
        vset = set(verts)
        adj = {v: [] for v in verts}
        seen_pairs = set()
        for e in self.edges:
            u, v, length = e
            if u not in vset or v not in vset:
                raise FormatError(f"edge endpoint not a vertex: {e!r}")
            if u == v:
                raise FormatError(f"self-loop at {u!r}")
            if not (length > 0):
                raise FormatError(f"non-positive edge length: {e!r}")
            pair = (u, v) if id_key(u) <= id_key(v) else (v, u)
            if pair in seen_pairs:
                raise FormatError(f"duplicate edge {pair!r}")
            seen_pairs.add(pair)
            adj[u].append((v, float(length)))
            adj[v].append((u, float(length)))
        if self.basepoint is not None and self.basepoint not in vset:
            raise FormatError(f"basepoint {self.basepoint!r} not a vertex")
        order = tuple(sorted(verts, key=id_key))
        rank = {v: i for i, v in enumerate(order)}
        for v in adj:
            adj[v] = tuple(sorted(adj[v], key=lambda t: id_key(t[0])))
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_rank", rank)
        if verts and len(_reachable(adj, verts[0])) != len(verts):
            raise ValidationError("graph is not connected")

    # -- basic accessors ---------------------------------------------------
    def neighbors(self, v):
        return self._adj[v]

    def vertex_order(self) -> tuple:
        """Vertices sorted by id; the canonical ordering for matrices."""
        return self._order

    def edge_key(self, u, v) -> tuple:
        return (u, v) if id_key(u) <= id_key(v) else (v, u)

    def max_edge_length(self) -> float:
        return max(length for _, _, length in self.edges)

    def csr(self, weights: dict | None = None) -> csr_matrix:
        """Symmetric CSR adjacency in vertex_order; optional weight override."""
        order = self._order
        rank = self._rank
        rows, cols, data = [], [], []
        for u, v, length in self.edges:
            w = float(length) if weights is None else float(weights[self.edge_key(u, v)])
            rows += [rank[u], rank[v]]
            cols += [rank[v], rank[u]]
            data += [w, w]
        n = len(order)
        return csr_matrix((data, (rows, cols)), shape=(n, n))


def _reachable(adj, start):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _dijkstra(g: MetricGraph, source, weights: dict | None = None):
    """Single-source Dijkstra; deterministic pops via vertex rank.

    Distances accumulate as left folds dist[u] + w, which keeps them exactly
    reproducible across implementations (IEEE addition is monotone).
    """
    if source not in g._adj:
        raise FormatError(f"unknown vertex {source!r}")
    rank = g._rank
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, rank[source], source)]
    while heap:
        du, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, length in g._adj[u]:
            if v in done:
                continue
            w = length if weights is None else weights[g.edge_key(u, v)]
            nd = du + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, rank[v], v))
    return dist


def _predecessors(g: MetricGraph, dist: dict, weights: dict | None = None):
    """Deterministic shortest-path tree: pred[v] is the smallest-id neighbor
    u with dist[u] + w(u,v) == dist[v] exactly."""
    pred = {}
    for v, dv in dist.items():
        if dv == 0.0:
            continue
        best = None
        for u, length in g._adj[v]:
            w = length if weights is None else weights[g.edge_key(u, v)]
            if u in dist and dist[u] + w == dv:
                if best is None or id_key(u) < id_key(best):
                    best = u
        if best is None:
            # mathematically impossible; guard against NaNs in weights
            raise ValidationError(f"no predecessor found for {v!r}")
        pred[v] = best
    return pred


def graph_distance(g: MetricGraph, source) -> dict:
    """Exact single-source shortest-path lengths from ``source``."""
    return _dijkstra(g, source)


@dataclass(frozen=True)
class Curve:
    """A path in a metric graph, optionally trimmed at the two ends.

    ``start_offset`` s and ``end_offset`` e are positions inside the first
    and last edge (fractions in [0, 1] measured from the earlier vertex):
    the curve starts at s along the first edge and ends at e along the last
    edge.  Defaults (0, 1) give the full vertex path.  A single-vertex curve
    has length 0.
    """

    vertices: tuple
    start_offset: float = 0.0
    end_offset: float = 1.0

    def __post_init__(self):
        if not self.vertices:
            raise FormatError("empty curve")
        if not (0.0 <= self.start_offset <= 1.0 and 0.0 <= self.end_offset <= 1.0):
            raise FormatError("offsets must lie in [0, 1]")
        if len(self.vertices) == 2 and self.start_offset > self.end_offset:
            raise FormatError("single-edge curve has start_offset > end_offset")

    def endpoints(self):
        return self.vertices[0], self.vertices[-1]

    def reversed(self):
        return Curve(tuple(reversed(self.vertices)), 1.0 - self.end_offset, 1.0 - self.start_offset)


def _edge_lengths_along(g: MetricGraph, c: Curve):
    """Lengths of consecutive edges of the curve; validates adjacency."""
    out = []
    for a, b in zip(c.vertices, c.vertices[1:]):
        for v, length in g._adj[a]:
            if v == b:
                out.append(length)
                break
        else:
            raise ValidationError(f"curve step {a!r} -> {b!r} is not an edge")
    return out


def curve_length(g: MetricGraph, c: Curve) -> float:
    """d-length of a curve: sum of traversed (partial) edge lengths."""
    lens = _edge_lengths_along(g, c)
    if not lens:
        return 0.0
    total = 0.0
    for i, length in enumerate(lens):
        lo = c.start_offset if i == 0 else 0.0
        hi = c.end_offset if i == len(lens) - 1 else 1.0
        total += (hi - lo) * length
    return total


def shortest_path_curve(g: MetricGraph, x, y) -> Curve:
    """The deterministic d-geodesic from x to y (lexicographic tie-break)."""
    if y not in g._adj:
        raise FormatError(f"unknown vertex {y!r}")
    if x == y:
        return Curve((x,))
    dist = _dijkstra(g, x)
    pred = _predecessors(g, dist)
    path = [y]
    while path[-1] != x:
        path.append(pred[path[-1]])
    path.reverse()
    return Curve(tuple(path))


def scale_metric(g: MetricGraph, k: float) -> MetricGraph:
    """The graph (X, K d): every edge length multiplied by K > 0."""
    if not (k > 0):
        raise FormatError(f"scale factor must be positive, got {k}")
    edges = tuple((u, v, k * length) for u, v, length in g.edges)
    return MetricGraph(g.vertices, edges, g.basepoint)


def all_pairs_distances(g: MetricGraph, weights: dict | None = None,
                        sources: list | None = None) -> np.ndarray:
    """Shortest-path distances via scipy's Dijkstra (row order = vertex_order).

    Used for bulk scans (delta, sweeps); agrees exactly with graph_distance
    because both accumulate dist[u] + w with IEEE doubles.
    """
    m = g.csr(weights)
    if sources is None:
        return _csgraph_dijkstra(m, directed=False)
    idx = [g._rank[s] for s in sources]
    return _csgraph_dijkstra(m, directed=False, indices=idx)
