"""Numerical comparison of the Gromov boundary with the metric boundary of
the uniformized space, via partitions of a sampled geodesic-ray family.

Finite-depth thresholds stand in for limits: rays are Gromov-related when
the Gromov product of their endpoints reaches the threshold, metric-related
when their endpoints are d_eps-close.  Finite-depth proximity is not
transitive, so both relations are closed transitively and the number of
pairs added by closure is reported as a fragility signal.  Agreement of the
two partitions is the finite proxy for the canonical boundary map being
bijective (surjectivity is automatic for ray-endpoint limits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .metric import MetricGraph, all_pairs_distances, graph_distance, id_key, shortest_path_curve
from .uniformize import ConformalGraph

# Default-threshold constants, calibrated on segment fillings at desk scale
# (see boundary probe reports for the sensitivity table).  The metric
# threshold is the radial-tail heuristic capped by an absolute resolution
# floor: past the critical exponent the collapse drives distances below any
# fixed scale, while on a finite sample genuinely distinct rays bottom out
# at the sample resolution.
METRIC_TAIL_FACTOR = 10.0
METRIC_ABSOLUTE_CAP = 0.05


@dataclass(frozen=True)
class RayFamily:
    rays: tuple  # Curves from the basepoint to distinct deepest vertices
    basepoint: object
    depth: float
    seed: int | None = None

    def endpoints(self) -> list:
        return [r.vertices[-1] for r in self.rays]

    def __len__(self):
        return len(self.rays)


def sample_rays(g: MetricGraph, p, max_rays: int, seed: int) -> RayFamily:
    """Shortest paths from p to a farthest-point sample of deepest vertices.

    The seed picks the first endpoint; the rest maximize the minimum graph
    distance to the endpoints already chosen (ties to the smallest id), so
    the rays probe well-separated directions instead of clustering.
    Deterministic for a fixed seed.
    """
    if max_rays < 1:
        raise ValidationError("max_rays must be >= 1")
    radial = graph_distance(g, p)
    depth = max(radial.values())
    deepest = sorted((v for v in g.vertices if radial[v] >= depth - 1e-9), key=id_key)
    if len(deepest) > max_rays:
        rows = all_pairs_distances(g, sources=deepest)
        rank = g._rank
        cols = [rank[v] for v in deepest]
        dmat = rows[:, cols]
        start = seed % len(deepest)
        chosen = [start]
        min_dist = dmat[start].copy()
        while len(chosen) < max_rays:
            best = None
            for i in range(len(deepest)):
                if i in chosen:
                    continue
                if best is None or min_dist[i] > min_dist[best] or (
                        min_dist[i] == min_dist[best] and id_key(deepest[i]) < id_key(deepest[best])):
                    best = i
            chosen.append(best)
            min_dist = np.minimum(min_dist, dmat[best])
        deepest = sorted((deepest[i] for i in chosen), key=id_key)
    rays = tuple(shortest_path_curve(g, p, v) for v in deepest)
    return RayFamily(rays, p, depth, seed)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _partition_from_relation(related: np.ndarray) -> tuple:
    """Equivalence classes = connected components of the symmetric relation.

    Returns (partition, closure_pairs): partition is a tuple of sorted index
    tuples ordered by smallest member; closure_pairs counts same-class pairs
    that are not directly related (added by transitivity).
    """
    n = related.shape[0]
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if related[i, j]:
                uf.union(i, j)
    classes = {}
    for i in range(n):
        classes.setdefault(uf.find(i), []).append(i)
    partition = tuple(tuple(sorted(c)) for c in sorted(classes.values(), key=lambda c: min(c)))
    closure = 0
    for cls in partition:
        for a in range(len(cls)):
            for b in range(a + 1, len(cls)):
                if not related[cls[a], cls[b]]:
                    closure += 1
    return partition, closure


def endpoint_gromov_products(g: MetricGraph, family: RayFamily) -> np.ndarray:
    """Matrix of (e_i | e_j)_p over the ray endpoints."""
    ends = family.endpoints()
    radial = graph_distance(g, family.basepoint)
    rows = all_pairs_distances(g, sources=ends)
    rank = g._rank
    order = g.vertex_order()
    col = [rank[e] for e in ends]
    d_ee = rows[:, col]
    r = np.array([radial[e] for e in ends])
    return 0.5 * (r[:, None] + r[None, :] - d_ee)


def gromov_equivalence_partition(g: MetricGraph, family: RayFamily, t_g: float):
    """Relate rays whose endpoint Gromov product reaches t_g; close transitively."""
    prod = endpoint_gromov_products(g, family)
    related = prod >= t_g
    np.fill_diagonal(related, True)
    return _partition_from_relation(related)


def endpoint_eps_distances(cg: ConformalGraph, family: RayFamily) -> np.ndarray:
    return cg.distances_between(family.endpoints())


def metric_limit_partition(cg: ConformalGraph, family: RayFamily, t_m: float):
    """Relate rays whose endpoints are within t_m in d_eps; close transitively."""
    d = endpoint_eps_distances(cg, family)
    related = d <= t_m
    np.fill_diagonal(related, True)
    return _partition_from_relation(related)


def default_gromov_threshold(depth: float, delta_hat: float) -> float:
    """T_G = N - delta-hat: endpoint products within one hyperbolicity
    constant of the full depth are treated as unresolved-equal.

    Two constants of slack (the first heuristic tried) merges rays across
    half the depth at desk scale (measured delta = 2 on the depth-8 segment
    filling); the sensitivity table in probe reports covers both variants.
    """
    return depth - delta_hat


def default_metric_threshold(epsilon: float, depth: float) -> float:
    """min(10 e^{-eps N}/eps, 0.05): tail heuristic with an absolute cap."""
    return min(METRIC_TAIL_FACTOR * math.exp(-epsilon * depth) / epsilon,
               METRIC_ABSOLUTE_CAP)


def _is_refinement(fine, coarse) -> bool:
    blocks = {}
    for bi, cls in enumerate(coarse):
        for x in cls:
            blocks[x] = bi
    return all(len({blocks[x] for x in cls}) == 1 for cls in fine)


@dataclass(frozen=True)
class BoundaryPartition:
    gromov_partition: tuple
    metric_partition: tuple
    agree: bool
    refinement: str  # equal | gromov-refines-metric | metric-refines-gromov | incomparable
    gromov_threshold: float
    metric_threshold: float
    gromov_closure_pairs: int
    metric_closure_pairs: int
    depth: float

    def to_dict(self):
        return {
            "gromovPartition": [list(c) for c in self.gromov_partition],
            "metricPartition": [list(c) for c in self.metric_partition],
            "agree": self.agree,
            "refinement": self.refinement,
            "thresholds": {"tg": self.gromov_threshold, "tm": self.metric_threshold},
            "closurePairs": {
                "gromov": self.gromov_closure_pairs,
                "metric": self.metric_closure_pairs,
            },
            "depth": self.depth,
        }


def compare_partitions(family: RayFamily, g_result, m_result,
                       t_g: float, t_m: float, depth: float) -> BoundaryPartition:
    """Agreement of the two partitions is the injectivity proxy for the
    canonical boundary map; the refinement relation is reported when they
    differ."""
    gpart, gclos = g_result
    mpart, mclos = m_result
    if sorted(sum(gpart, ())) != sorted(sum(mpart, ())):
        raise FormatError("partitions cover different ray families")
    agree = gpart == mpart
    if agree:
        refinement = "equal"
    elif _is_refinement(gpart, mpart):
        refinement = "gromov-refines-metric"
    elif _is_refinement(mpart, gpart):
        refinement = "metric-refines-gromov"
    else:
        refinement = "incomparable"
    return BoundaryPartition(gpart, mpart, agree, refinement, t_g, t_m,
                             gclos, mclos, depth)


def probe_boundary(g: MetricGraph, cg: ConformalGraph, family: RayFamily,
                   t_g: float, t_m: float) -> BoundaryPartition:
    gres = gromov_equivalence_partition(g, family, t_g)
    mres = metric_limit_partition(cg, family, t_m)
    return compare_partitions(family, gres, mres, t_g, t_m, family.depth)
