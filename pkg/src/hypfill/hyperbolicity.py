"""Gromov products, four-point delta estimation, rough starlikeness,
and Gromov-sequence diagnostics on metric graphs.

Delta is computed with all four points ranging over vertices only; interior
edge points can shift the true value by at most half the longest edge, and
that slack is recorded in every DeltaEstimate.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NumericGuardError, ValidationError
from .metric import (Curve, MetricGraph, all_pairs_distances, curve_length,
                     graph_distance, id_key)

DELTA_EXACT_CAP = 300


def gromov_product(g: MetricGraph, p, x, y) -> float:
    """(x|y)_p = (d(p,x) + d(p,y) - d(x,y)) / 2."""
    dp = graph_distance(g, p)
    dx = graph_distance(g, x)
    return 0.5 * (dp[x] + dp[y] - dx[y])


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    method: str  # "exact" | "sampled"
    quadruples_examined: int
    witness: tuple  # (x, y, z, p) attaining the max defect
    interior_slack: float  # half the max edge length (vertex-only scan)
    seed: int | None = None

    def to_dict(self):
        return {
            "delta": self.delta,
            "method": self.method,
            "quadruplesExamined": self.quadruples_examined,
            "witness": list(self.witness),
            "interiorSlack": self.interior_slack,
            "seed": self.seed,
        }


def _ordered_defect(d, i, j, k, l):
    """Defect of the ordered quadruple (x, y, z, p) = indices (i, j, k, l)."""
    gxy = 0.5 * (d[l, i] + d[l, j] - d[i, j])
    gyz = 0.5 * (d[l, j] + d[l, k] - d[j, k])
    gxz = 0.5 * (d[l, i] + d[l, k] - d[i, k])
    return min(gxy, gyz) - gxz


def _best_ordering(d, subset):
    """Max ordered-quadruple defect within a 4-subset, tie-broken lexicographically."""
    best = None
    best_perm = None
    for perm in itertools.permutations(subset):
        v = _ordered_defect(d, *perm)
        if best is None or v > best:
            best, best_perm = v, perm
    return best, best_perm


def delta_exact(g: MetricGraph, cap: int = DELTA_EXACT_CAP) -> DeltaEstimate:
    """Exact max four-point defect over all vertex quadruples.

    Refuses graphs above ``cap`` vertices (O(n^4) scan); use delta_sampled
    there.  Scanning unordered 4-subsets with the pair-sum characterization
    is equivalent to the ordered scan after clamping at zero.
    """
    n = len(g.vertices)
    if n > cap:
        raise NumericGuardError(
            f"{n} vertices exceeds the exact-scan cap {cap}; use delta_sampled"
        )
    order = g.vertex_order()
    slack = 0.5 * g.max_edge_length()
    examined = n * (n - 1) * (n - 2) * (n - 3) // 24
    if n < 4:
        v = order[0]
        return DeltaEstimate(0.0, "exact", examined, (v, v, v, v), slack)
    d = all_pairs_distances(g)
    from ._fourpoint import first_subset_attaining, max_subset_defect_per_row

    per_row = max_subset_defect_per_row(d)
    raw = float(np.max(per_row))
    if raw <= 0.0:
        v = order[0]
        return DeltaEstimate(0.0, "exact", examined, (v, v, v, v), slack)
    i, j, k, l = first_subset_attaining(d, raw)
    _, perm = _best_ordering(d, (i, j, k, l))
    witness = tuple(order[m] for m in perm)
    return DeltaEstimate(0.5 * raw, "exact", examined, witness, slack)


def delta_sampled(g: MetricGraph, samples: int, seed: int) -> DeltaEstimate:
    """Max defect over seeded uniform ordered quadruples; lower bound on exact."""
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    order = g.vertex_order()
    n = len(order)
    d = all_pairs_distances(g)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(samples, 4))
    x, y, z, p = idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]
    gxy = 0.5 * (d[p, x] + d[p, y] - d[x, y])
    gyz = 0.5 * (d[p, y] + d[p, z] - d[y, z])
    gxz = 0.5 * (d[p, x] + d[p, z] - d[x, z])
    defects = np.minimum(gxy, gyz) - gxz
    best = int(np.argmax(defects))
    delta = max(0.0, float(defects[best]))
    witness = tuple(order[m] for m in idx[best])
    return DeltaEstimate(delta, "sampled", samples, witness, 0.5 * g.max_edge_length(), seed)


@dataclass(frozen=True)
class StarlikenessReport:
    m: float
    basepoint: object
    rays: tuple  # the ray family (Curves)
    worst_vertex: object

    def to_dict(self):
        return {
            "M": self.m,
            "basepoint": self.basepoint,
            "rayCount": len(self.rays),
            "rayEndpoints": [r.vertices[-1] for r in self.rays],
            "worstVertex": self.worst_vertex,
        }


def estimate_starlikeness(g: MetricGraph, p, rays: list) -> StarlikenessReport:
    """M = max over vertices of the distance to the nearest ray point.

    Each ray must start at p and be a shortest path to its endpoint.
    min over rays of dist(v, ray) equals dist(v, union of ray vertices), so a
    single multi-source Dijkstra suffices.
    """
    dist_p = graph_distance(g, p)
    sources = set()
    for ray in rays:
        if ray.vertices[0] != p:
            raise ValidationError(f"ray does not start at basepoint {p!r}")
        if abs(curve_length(g, ray) - dist_p[ray.vertices[-1]]) > 1e-9:
            raise ValidationError("ray is not a shortest path")
        sources.update(ray.vertices)
    dist = {v: 0.0 for v in sources}
    rank = g._rank
    heap = [(0.0, rank[v], v) for v in sources]
    heapq.heapify(heap)
    done = set()
    while heap:
        du, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, length in g.neighbors(u):
            nd = du + length
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, rank[v], v))
    worst = max(g.vertex_order(), key=lambda v: (dist[v], id_key(v)))
    m = dist[worst]
    # tie-break: smallest id among vertices attaining the max
    candidates = [v for v in g.vertex_order() if dist[v] == m]
    worst = min(candidates, key=id_key)
    return StarlikenessReport(m, p, tuple(rays), worst)


def gromov_sequence_defect(g: MetricGraph, p, seq: list, tail_from: int) -> float:
    """min over pairs n, m >= tail_from of (x_n | x_m)_p.

    Growth of this value as tail_from increases certifies a Gromov sequence
    numerically.  Pairs include n = m, so a constant sequence at x gives
    d(p, x).
    """
    if not seq:
        raise ValidationError("empty sequence")
    if not (0 <= tail_from < len(seq)):
        raise ValidationError(f"tailFrom {tail_from} out of range")
    tail = seq[tail_from:]
    dp = graph_distance(g, p)
    best = None
    for a in range(len(tail)):
        da = graph_distance(g, tail[a])
        for b in range(a, len(tail)):
            prod = 0.5 * (dp[tail[a]] + dp[tail[b]] - da[tail[b]])
            if best is None or prod < best:
                best = prod
    return best


