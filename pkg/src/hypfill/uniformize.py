"""Uniformized metric d_eps with density e^{-eps d(p, .)} and the
quasihyperbolic metric built on top of it.

On a metric graph the radial distance of the point at arclength t inside an
edge (u, v) of length L is exactly min(a + t, b + L - t) with a = d(p, u),
b = d(p, v), so the conformal edge weight has a piecewise closed form and no
quadrature is needed anywhere on the main path.

The boundary of the truncated space is approximated by the deepest frontier
plus the analytic tail e^{-eps N}/eps of an infinite radial continuation;
the tail is exact for genuine geodesic rays and the approximation error is
one-sided, shrinking like e^{-eps N} as the truncation deepens.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import FormatError, NumericGuardError, ValidationError
from .metric import Curve, MetricGraph, graph_distance, id_key

RADIAL_SLACK = 1e-9


@dataclass(frozen=True)
class UniformizationParams:
    epsilon: float
    basepoint: object

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise FormatError(f"epsilon must be positive, got {self.epsilon}")


def _expm1n(x: float) -> float:
    # 1 - e^{-x} without cancellation for small x
    return -math.expm1(-x)


def conformal_edge_length(a: float, b: float, length: float, eps: float,
                          t0: float = 0.0, t1: float | None = None) -> float:
    """Exact integral of e^{-eps m(t)} over [t0, t1] in [0, L] along an edge.

    m(t) = min(a + t, b + L - t) with breakpoint t* = (b + L - a)/2 clamped
    to [0, L].  a, b are the radial distances of the endpoints; |a - b| <= L
    is required (triangle inequality of the radial data).
    """
    if t1 is None:
        t1 = length
    if abs(a - b) > length + RADIAL_SLACK:
        raise NumericGuardError(
            f"radial distances inconsistent with edge: |{a} - {b}| > {length}"
        )
    if not (0.0 - 1e-12 <= t0 <= t1 <= length + 1e-12):
        raise FormatError("integration bounds outside the edge")
    tstar = min(max((b + length - a) / 2.0, 0.0), length)
    total = 0.0
    lo, hi = t0, min(t1, tstar)
    if hi > lo:
        # rising branch: m(t) = a + t
        total += math.exp(-eps * (a + lo)) * _expm1n(eps * (hi - lo)) / eps
    lo, hi = max(t0, tstar), t1
    if hi > lo:
        # falling branch: m(t) = b + L - t
        total += math.exp(-eps * (b + length - hi)) * _expm1n(eps * (hi - lo)) / eps
    return total


@dataclass(frozen=True)
class ConformalGraph:
    """A metric graph reweighted by rho_eps; carries d_eps machinery.

    ``radial`` maps vertices to d(p, .), ``edge_weights`` maps canonical edge
    keys to the exact conformal length, ``truncation_depth`` is the largest
    radial distance present.
    """

    graph: MetricGraph
    params: UniformizationParams
    radial: dict
    edge_weights: dict
    truncation_depth: float
    _cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def basepoint(self):
        return self.params.basepoint

    def _csr(self):
        if "csr" not in self._cache:
            self._cache["csr"] = self.graph.csr(self.edge_weights)
        return self._cache["csr"]

    def distances_from(self, x) -> dict:
        """Single-source d_eps distances (deterministic Dijkstra)."""
        from .metric import _dijkstra

        return _dijkstra(self.graph, x, self.edge_weights)

    def distance(self, x, y) -> float:
        return self.distances_from(x)[y]

    def distances_between(self, sources: list) -> np.ndarray:
        """d_eps matrix rows for ``sources`` against the same set (columns)."""
        rank = self.graph._rank
        idx = [rank[s] for s in sources]
        full = _csgraph_dijkstra(self._csr(), directed=False, indices=idx)
        return full[:, idx]

    def distance_rows(self, sources: list) -> np.ndarray:
        """d_eps rows for ``sources`` against all vertices in vertex_order."""
        rank = self.graph._rank
        idx = [rank[s] for s in sources]
        return _csgraph_dijkstra(self._csr(), directed=False, indices=idx)

    def step_lengths(self, c: Curve) -> list:
        """Conformal length of each (partial) edge step along the curve."""
        verts = c.vertices
        if len(verts) == 1:
            return []
        g = self.graph
        eps = self.epsilon
        out = []
        for i, (u, v) in enumerate(zip(verts, verts[1:])):
            length = None
            for w, el in g.neighbors(u):
                if w == v:
                    length = el
                    break
            if length is None:
                raise ValidationError(f"curve step {u!r} -> {v!r} is not an edge")
            lo = c.start_offset * length if i == 0 else 0.0
            hi = c.end_offset * length if i == len(verts) - 2 else length
            if lo == 0.0 and hi == length:
                out.append(self.edge_weights[g.edge_key(u, v)])
            else:
                out.append(conformal_edge_length(
                    self.radial[u], self.radial[v], length, eps, lo, hi
                ))
        return out

    def curve_length(self, c: Curve) -> float:
        """l_{d_eps}(c): left-to-right fold of (partial) conformal weights."""
        total = 0.0
        for w in self.step_lengths(c):
            total += w
        return total

    def frontier(self) -> list:
        """Deepest vertices: radial distance within tolerance of the max."""
        cut = self.truncation_depth - RADIAL_SLACK
        return [v for v in self.graph.vertex_order() if self.radial[v] >= cut]

    def tail_bound(self, v) -> float:
        """d_eps length of an infinite radial continuation beyond v."""
        return math.exp(-self.epsilon * self.radial[v]) / self.epsilon


def uniformize_graph(g: MetricGraph, epsilon: float, basepoint=None) -> ConformalGraph:
    """Build the conformal reweighting of g with density e^{-eps d(p, .)}."""
    p = basepoint if basepoint is not None else g.basepoint
    if p is None:
        raise FormatError("no basepoint given and the graph has none")
    params = UniformizationParams(epsilon, p)
    radial = graph_distance(g, p)
    weights = {}
    for u, v, length in g.edges:
        weights[g.edge_key(u, v)] = conformal_edge_length(
            radial[u], radial[v], length, epsilon
        )
    depth = max(radial.values())
    return ConformalGraph(g, params, radial, weights, depth)


def uniformized_distance(cg: ConformalGraph, x, y) -> float:
    """d_eps(x, y): shortest path under the conformal edge weights."""
    return cg.distance(x, y)


def uniformized_curve_length(cg: ConformalGraph, c: Curve) -> float:
    """l_{d_eps}(c) >= d_eps(endpoints)."""
    return cg.curve_length(c)


def harnack_check(cg: ConformalGraph, pair_count: int = 10_000,
                  seed: int = 0, pairs: list | None = None) -> float:
    """Worst multiplicative violation of the Harnack inequality
    e^{-eps d(x,y)} <= rho(x)/rho(y) <= e^{eps d(x,y)} over sampled pairs.

    The inequality holds identically by the triangle inequality, so the
    return value measures floating-point slack only.
    """
    g = cg.graph
    order = g.vertex_order()
    n = len(order)
    eps = cg.epsilon
    if pairs is None:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(pair_count, 2))
    else:
        rank = g._rank
        idx = np.array([[rank[a], rank[b]] for a, b in pairs])
    from .metric import all_pairs_distances

    sources = sorted(set(idx[:, 0].tolist()))
    pos = {s: i for i, s in enumerate(sources)}
    rows = all_pairs_distances(g, sources=[order[s] for s in sources])
    dxy = rows[[pos[s] for s in idx[:, 0]], idx[:, 1]]
    radial = np.array([cg.radial[v] for v in order])
    ratio = np.exp(-eps * (radial[idx[:, 0]] - radial[idx[:, 1]]))
    lo = np.exp(-eps * dxy)
    hi = np.exp(eps * dxy)
    viol = np.maximum(lo / ratio, ratio / hi) - 1.0
    return float(max(0.0, viol.max()))


def boundary_distances(cg: ConformalGraph, frontier: list | None = None) -> dict:
    """Approximate d_eps(x) = dist_{d_eps}(x, boundary) for every vertex.

    Multi-source Dijkstra from the frontier, each source f initialized at
    its analytic radial tail e^{-eps d(p,f)}/eps.  On an exact geodesic ray
    of the infinite space this telescopes to e^{-eps d(p,x)}/eps.
    """
    if frontier is None:
        frontier = cg.frontier()
    if not frontier:
        raise NumericGuardError("empty frontier")
    g = cg.graph
    rank = g._rank
    dist = {f: cg.tail_bound(f) for f in frontier}
    heap = [(dist[f], rank[f], f) for f in frontier]
    heapq.heapify(heap)
    done = set()
    while heap:
        du, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, _ in g.neighbors(u):
            w = cg.edge_weights[g.edge_key(u, v)]
            nd = du + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, rank[v], v))
    return dist


def _quasi_edge_weight(sigma: float, d_u: float, d_v: float) -> float:
    """Integral of 1/d along an edge of conformal length sigma with the
    boundary distance linearly interpolated between d_u and d_v.

    Closed form sigma * ln(d_v/d_u) / (d_v - d_u); boundary distance is
    1-Lipschitz in d_eps so the interpolation slope never exceeds 1.
    """
    if d_u <= 0 or d_v <= 0:
        raise NumericGuardError("non-positive boundary distance on an edge")
    diff = d_v - d_u
    if abs(diff) <= 1e-12 * max(d_u, d_v):
        return sigma * 2.0 / (d_u + d_v)
    return sigma * math.log(d_v / d_u) / diff


@dataclass(frozen=True)
class QuasiHyperbolicGraph:
    """Quasihyperbolization of a uniformized graph: density 1/d_eps(.)."""

    conformal: ConformalGraph
    frontier: tuple
    boundary: dict  # vertex -> approximate d_eps(x)
    quasi_weights: dict
    _cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def boundary_distance(self, x) -> float:
        return self.boundary[x]

    def distances_from(self, x) -> dict:
        from .metric import _dijkstra

        return _dijkstra(self.conformal.graph, x, self.quasi_weights)

    def distance(self, x, y) -> float:
        return self.distances_from(x)[y]

    def distances_between(self, sources: list) -> np.ndarray:
        g = self.conformal.graph
        rank = g._rank
        if "csr" not in self._cache:
            self._cache["csr"] = g.csr(self.quasi_weights)
        idx = [rank[s] for s in sources]
        full = _csgraph_dijkstra(self._cache["csr"], directed=False, indices=idx)
        return full[:, idx]


def quasihyperbolize(cg: ConformalGraph, frontier: list | None = None) -> QuasiHyperbolicGraph:
    """Build the quasihyperbolic weights k_eps on top of a conformal graph."""
    if frontier is None:
        frontier = cg.frontier()
    boundary = boundary_distances(cg, frontier)
    g = cg.graph
    weights = {}
    for u, v, _ in g.edges:
        key = g.edge_key(u, v)
        weights[key] = _quasi_edge_weight(cg.edge_weights[key], boundary[key[0]], boundary[key[1]])
    return QuasiHyperbolicGraph(cg, tuple(sorted(frontier, key=id_key)), boundary, weights)


def quasihyperbolic_distance(qg: QuasiHyperbolicGraph, x, y) -> float:
    """k_eps(x, y): shortest path under the quasihyperbolic edge weights."""
    return qg.distance(x, y)
