"""Hyperbolic filling of a finite sample of a bounded metric space.

Vertices are (point, level) pairs encoded as "pointId@level" strings; all
edges have length 1 and the level-0 vertex is the root/basepoint.  Nets are
nested maximal alpha^-n-separated subsets built greedily in a seeded order,
so the construction is reproducible bit for bit.

Ball radii use the alpha^-n scale matching the separated sets (the positive
exponent would make every same-level pair adjacent on a space of diameter
below one).  Ball intersection B(x,r) n B(y,s) != 0 is implemented as the
predicate d(x,y) < r + s with strict inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .metric import FiniteMetricSpace, MetricGraph, id_key

DIAM_TARGET = 0.9


@dataclass(frozen=True)
class FillingParams:
    alpha: float
    tau: float
    depth: int
    seed: int = 0

    def __post_init__(self):
        if not (self.alpha > 1):
            raise FormatError(f"alpha must exceed 1, got {self.alpha}")
        if not (self.tau > 1):
            raise FormatError(f"tau must exceed 1, got {self.tau}")
        if self.depth < 0:
            raise FormatError(f"depth must be >= 0, got {self.depth}")

    def to_dict(self):
        return {"alpha": self.alpha, "tau": self.tau, "depth": self.depth, "seed": self.seed}


def vertex_id(point, level: int) -> str:
    return f"{point}@{level}"


def normalize_space(space: FiniteMetricSpace):
    """Rescale so the diameter is 0.9 when it is >= 1; returns (space, scale).

    scale is the divisor applied to all distances (1.0 when unchanged).
    """
    diam = space.diameter() if len(space.points) > 1 else 0.0
    if diam < 1.0:
        return space, 1.0
    scale = diam / DIAM_TARGET
    if space.coords is not None:
        coords = {p: tuple(c / scale for c in space.coords[p]) for p in space.points}
        return FiniteMetricSpace(space.points, coords=coords), scale
    m = space.distance_matrix() / scale
    return FiniteMetricSpace(space.points, matrix=tuple(map(tuple, m))), scale


def build_nets(space: FiniteMetricSpace, params: FillingParams) -> list:
    """Nested maximal alpha^-n-separated subsets E_0 <= E_1 <= ... <= E_depth.

    E_{n+1} starts from E_n; remaining sample points are inserted in the
    seeded order whenever they keep alpha^-(n+1) separation.  Maximality is
    with respect to the finite sample.
    """
    d = space.distance_matrix()
    n_pts = len(space.points)
    if n_pts > 1 and space.diameter() >= 1.0:
        raise ValidationError("diameter >= 1; normalize_space first")
    rng = np.random.default_rng(params.seed)
    sorted_idx = sorted(range(n_pts), key=lambda i: id_key(space.points[i]))
    order = [sorted_idx[i] for i in rng.permutation(n_pts)]
    levels = []
    current: list[int] = []
    for level in range(params.depth + 1):
        sep = params.alpha ** (-level)
        members = list(current)
        member_set = set(members)
        for i in order:
            if i in member_set:
                continue
            if all(d[i, j] >= sep for j in members):
                members.append(i)
                member_set.add(i)
        current = members
        levels.append([space.points[i] for i in members])
    return levels


@dataclass(frozen=True)
class Filling:
    base: FiniteMetricSpace
    params: FillingParams
    levels: tuple  # levels[n] = tuple of point ids in E_n
    graph: MetricGraph
    root: str
    scale_factor: float = 1.0

    def level_vertices(self, n: int) -> list:
        if not (0 <= n <= self.params.depth):
            raise FormatError(f"level {n} out of range")
        return [vertex_id(p, n) for p in self.levels[n]]

    def saturation_level(self) -> int:
        """First level whose net contains every sample point (depth if none)."""
        for n, lev in enumerate(self.levels):
            if len(lev) == len(self.base.points):
                return n
        return self.params.depth

    def to_dict(self):
        return {
            "vertices": list(self.graph.vertices),
            "edges": [[u, v, length] for u, v, length in self.graph.edges],
            "basepoint": self.root,
            "levels": [list(lev) for lev in self.levels],
            "params": self.params.to_dict(),
            "scaleFactor": self.scale_factor,
        }


def build_filling(space: FiniteMetricSpace, params: FillingParams,
                  scale_factor: float = 1.0) -> Filling:
    """Construct the leveled unit-edge filling graph from the nets.

    Edge rules for (x, n), (y, m):
      same level:   n = m     and d(x, y) < tau alpha^-n + tau alpha^-m
      cross level:  |n - m|=1 and d(x, y) < alpha^-n + alpha^-m
    """
    levels = build_nets(space, params)
    idx = space.index_of()
    d = space.distance_matrix()
    vertices = []
    for n, lev in enumerate(levels):
        vertices.extend(vertex_id(p, n) for p in lev)
    edges = []
    for n, lev in enumerate(levels):
        reach = 2.0 * params.tau * params.alpha ** (-n)
        members = sorted(lev, key=id_key)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                if d[idx[members[a]], idx[members[b]]] < reach:
                    edges.append((vertex_id(members[a], n), vertex_id(members[b], n), 1.0))
        if n + 1 <= params.depth:
            reach_x = params.alpha ** (-n) + params.alpha ** (-(n + 1))
            nxt = sorted(levels[n + 1], key=id_key)
            for x in members:
                for y in nxt:
                    if d[idx[x], idx[y]] < reach_x:
                        edges.append((vertex_id(x, n), vertex_id(y, n + 1), 1.0))
    if len(levels[0]) != 1:
        raise ValidationError(
            f"E_0 has {len(levels[0])} points; expected a single root (diam < 1)"
        )
    root = vertex_id(levels[0][0], 0)
    graph = MetricGraph(tuple(vertices), tuple(edges), basepoint=root)
    # MetricGraph raises if disconnected; with the rules above every level-n+1
    # vertex has a parent in E_n by maximality, so this must not trip.
    return Filling(space, params, tuple(tuple(lev) for lev in levels),
                   graph, root, scale_factor)


def level_sphere_diameter(filling: Filling, conformal, n: int) -> float:
    """Max uniformized distance between level-n vertices (0 for singletons).

    Decay of this quantity in n is the computable signature of the metric
    boundary collapsing to a point.
    """
    verts = filling.level_vertices(n)
    if len(verts) < 2:
        return 0.0
    sub = conformal.distances_between(verts)
    return float(sub.max())
