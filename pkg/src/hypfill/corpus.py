"""Deterministic generators for the test corpus of spaces and graphs.

Spaces record whether they satisfy the curve-connectivity hypothesis (each
pair of points joined by a uniformly bounded curve in the closure): segments
and circles do, Cantor samples deliberately violate it.

Tree edge lengths are dyadic rationals on a 2^-12 grid so that path sums,
Gromov products, and four-point defects are exact in double precision; the
zero-delta and ratio-one tree assertions are then exact statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError
from .metric import FiniteMetricSpace, MetricGraph, all_pairs_distances

GENERATORS = ("segment", "circle", "cantor", "tree", "point-cloud-file")


@dataclass(frozen=True)
class SpaceCorpusEntry:
    name: str
    generator: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise FormatError(f"unknown generator {self.generator!r}")


def segment_space(points: int, length: float = 0.9) -> FiniteMetricSpace:
    """Evenly spaced points on a segment (1-D Euclidean)."""
    if points < 1:
        raise FormatError("need at least one point")
    if points == 1:
        return FiniteMetricSpace((0,), coords={0: (0.0,)})
    xs = np.linspace(0.0, length, points)
    return FiniteMetricSpace(tuple(range(points)),
                             coords={i: (float(xs[i]),) for i in range(points)})


def circle_space(points: int, circumference: float = 1.8) -> FiniteMetricSpace:
    """Evenly spaced points on a circle with the arc-length metric."""
    if points < 2:
        raise FormatError("need at least two points")
    step = circumference / points
    m = [[step * min(abs(i - j), points - abs(i - j)) for j in range(points)]
         for i in range(points)]
    return FiniteMetricSpace(tuple(range(points)), matrix=tuple(map(tuple, m)))


def cantor_space(depth: int, ratio: float = 1.0 / 3.0, scale: float = 0.9) -> FiniteMetricSpace:
    """Left endpoints of the level-``depth`` Cantor intervals, scaled.

    Totally disconnected sample: flagged as violating the hypothesis that
    pairs of points are joined by uniformly bounded curves.
    """
    if depth < 0:
        raise FormatError("depth must be >= 0")
    if not (0 < ratio < 0.5):
        raise FormatError("ratio must lie in (0, 1/2)")
    coords = [0.0]
    for k in range(depth):
        shift = (1.0 - ratio) * ratio ** k
        coords = [c for x in coords for c in (x, x + shift)]
    coords.sort()
    return FiniteMetricSpace(tuple(range(len(coords))),
                             coords={i: (scale * c,) for i, c in enumerate(coords)})


def random_tree_graph(vertices: int, seed: int = 0) -> MetricGraph:
    """Uniform random recursive tree with dyadic edge lengths in [0.25, 4).

    Lengths are multiples of 2^-12 so every path sum is exact in doubles.
    """
    if vertices < 1:
        raise FormatError("need at least one vertex")
    rng = np.random.default_rng(seed)
    edges = []
    for v in range(1, vertices):
        parent = int(rng.integers(0, v))
        length = float(rng.integers(2 ** 10, 2 ** 14)) / 2 ** 12
        edges.append((parent, v, length))
    return MetricGraph(tuple(range(vertices)), tuple(edges), basepoint=0)


def tree_space(vertices: int, seed: int = 0) -> FiniteMetricSpace:
    """The metric space of a random tree graph (explicit distance matrix)."""
    g = random_tree_graph(vertices, seed)
    d = all_pairs_distances(g)
    return FiniteMetricSpace(g.vertices, matrix=tuple(map(tuple, d)))


def corpus_generate(entry: SpaceCorpusEntry):
    """Build the space for a corpus entry; returns (space, metadata)."""
    p = entry.parameters
    if entry.generator == "segment":
        space = segment_space(int(p.get("points", 64)), float(p.get("length", 0.9)))
        hypothesis_ok = True
    elif entry.generator == "circle":
        space = circle_space(int(p.get("points", 64)), float(p.get("circumference", 1.8)))
        hypothesis_ok = True
    elif entry.generator == "cantor":
        space = cantor_space(int(p.get("depth", 5)), float(p.get("ratio", 1.0 / 3.0)))
        hypothesis_ok = False
    elif entry.generator == "tree":
        space = tree_space(int(p.get("points", 32)), int(p.get("seed", 0)))
        hypothesis_ok = True
    elif entry.generator == "point-cloud-file":
        from .serialize import load_space

        path = p.get("path")
        if not path:
            raise FormatError("point-cloud-file needs a 'path' parameter")
        space, _ = load_space(path)
        hypothesis_ok = None
    else:  # pragma: no cover - guarded in SpaceCorpusEntry
        raise FormatError(entry.generator)
    meta = {
        "name": entry.name,
        "generator": entry.generator,
        "parameters": dict(p),
        "satisfiesCurveHypothesis": hypothesis_ok,
    }
    return space, meta
