"""Gehring-Hayman ratios, uniform-curve certificates, collapse slopes,
critical-exponent bisection, and the metric-scaling identity check.

"The" geodesic between two vertices is always the deterministic tie-broken
shortest path of the metric module; the quasi-shortest bound applies to any
geodesic, and tie-break insensitivity can be confirmed on small graphs by
exhaustive enumeration (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, NumericGuardError, ValidationError
from .filling import Filling, FillingParams, build_filling, level_sphere_diameter
from .metric import (Curve, MetricGraph, curve_length, graph_distance,
                     scale_metric, shortest_path_curve, _dijkstra,
                     _predecessors)
from .uniformize import ConformalGraph, QuasiHyperbolicGraph, uniformize_graph
from .util import chunked_map, worker_count

LOCAL_BOUND_SLACK = 1e-12


def gh_ratio(cg: ConformalGraph, x, y) -> float:
    """l_{d_eps}(deterministic d-geodesic from x to y) / d_eps(x, y) >= 1."""
    if x == y:
        raise FormatError("GH ratio is undefined for a degenerate pair")
    geo = shortest_path_curve(cg.graph, x, y)
    return cg.curve_length(geo) / cg.distance(x, y)


@dataclass(frozen=True)
class GHReport:
    epsilon: float
    pairs_examined: int
    deep_pairs_examined: int
    max_ratio: float
    argmax_pair: tuple
    histogram_edges: tuple
    histogram_counts: tuple
    local_bound_violations: int
    local_bound_margin: float  # max over pairs of ratio / e^{2 eps d(x,y)}
    truncation_depth: float
    seed: int | None

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "pairsExamined": self.pairs_examined,
            "deepPairsExamined": self.deep_pairs_examined,
            "maxRatio": self.max_ratio,
            "argmaxPair": list(self.argmax_pair),
            "ratioHistogram": {
                "edges": list(self.histogram_edges),
                "counts": list(self.histogram_counts),
            },
            "localBoundChecked": {
                "violations": self.local_bound_violations,
                "maxRatioOverBound": self.local_bound_margin,
            },
            "truncationDepth": self.truncation_depth,
            "seed": self.seed,
        }


def _all_pairs(n):
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j


def _sample_pairs(n, budget, rng):
    total = n * (n - 1) // 2
    if total <= budget:
        return list(_all_pairs(n))
    codes = rng.choice(total, size=budget, replace=False)
    codes.sort()
    pairs = []
    for c in codes:
        # decode row-major upper-triangle index
        i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * c)) // 2)
        j = int(c - i * (2 * n - i - 1) // 2 + i + 1)
        pairs.append((i, j))
    return pairs


def _ratio_block(cg, order, pairs_by_source):
    """Ratios for pairs grouped by source index; returns (ratios, pair list)."""
    g = cg.graph
    ratios = []
    plist = []
    for si, targets in pairs_by_source:
        x = order[si]
        dist_d = _dijkstra(g, x)
        pred = _predecessors(g, dist_d)
        dist_eps = _dijkstra(g, x, cg.edge_weights)
        for tj in targets:
            y = order[tj]
            path = [y]
            while path[-1] != x:
                path.append(pred[path[-1]])
            path.reverse()
            num = cg.curve_length(Curve(tuple(path)))
            ratios.append((num / dist_eps[y], dist_d[y]))
            plist.append((x, y))
    return ratios, plist


def gh_sweep(cg: ConformalGraph, pair_budget: int, seed: int,
             deep_vertices: list | None = None) -> GHReport:
    """GH ratios over a (sampled) pair set plus oversampled deep pairs.

    Deep pairs have both endpoints within one unit of the truncation depth
    (for fillings, the deepest two levels); they stress the boundary regime
    of the localized Gehring-Hayman properties.  Deterministic per seed and
    invariant under the worker count.
    """
    if pair_budget < 1:
        raise ValidationError("pair budget must be >= 1")
    g = cg.graph
    order = g.vertex_order()
    n = len(order)
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(n, pair_budget, rng)
    if deep_vertices is None:
        cut = cg.truncation_depth - 1.0 - 1e-9
        deep_vertices = [v for v in order if cg.radial[v] >= cut]
    rank = g._rank
    deep_idx = sorted(rank[v] for v in deep_vertices)
    m = len(deep_idx)
    deep_pairs = [(deep_idx[i], deep_idx[j]) for i, j in _sample_pairs(m, pair_budget, rng)]
    seen = set(pairs)
    extra = [pq for pq in deep_pairs if pq not in seen]
    all_pairs = pairs + extra

    by_source = {}
    for i, j in all_pairs:
        by_source.setdefault(i, []).append(j)
    groups = sorted(by_source.items())
    results = chunked_map(lambda gs: _ratio_block(cg, order, gs), groups)

    ratios, dists, plist = [], [], []
    for rblock, pblock in results:
        for (r, d), pq in zip(rblock, pblock):
            ratios.append(r)
            dists.append(d)
            plist.append(pq)
    ratios = np.asarray(ratios)
    dists = np.asarray(dists)
    best = int(np.argmax(ratios))
    bound = np.exp(2.0 * cg.epsilon * dists)
    over = ratios / bound
    violations = int(np.sum(ratios > bound * (1.0 + LOCAL_BOUND_SLACK)))
    edges, counts = _ratio_histogram(ratios)
    return GHReport(
        epsilon=cg.epsilon,
        pairs_examined=len(all_pairs),
        deep_pairs_examined=len(extra),
        max_ratio=float(ratios[best]),
        argmax_pair=plist[best],
        histogram_edges=tuple(edges),
        histogram_counts=tuple(counts),
        local_bound_violations=violations,
        local_bound_margin=float(over.max()),
        truncation_depth=cg.truncation_depth,
        seed=seed,
    )


def _ratio_histogram(ratios, bins: int = 32):
    rmax = float(ratios.max())
    if rmax <= 1.0:
        return [1.0, 1.0 + 1e-15], [len(ratios)]
    edges = np.geomspace(1.0, rmax * (1.0 + 1e-12), bins + 1)
    counts, _ = np.histogram(ratios, bins=edges)
    return edges.tolist(), counts.tolist()


@dataclass(frozen=True)
class UniformityCertificate:
    curve: Curve
    condition_one: float  # l(curve) / d_eps(endpoints)
    condition_two: float  # max over vertices of min(before, after)/boundary
    a: float
    interior_defect_bound: float  # one conformal edge length (vertex-only check)

    def to_dict(self):
        return {
            "curve": list(self.curve.vertices),
            "conditionOneConstant": self.condition_one,
            "conditionTwoConstant": self.condition_two,
            "A": self.a,
            "interiorDefectBound": self.interior_defect_bound,
        }


def certify_uniform_curve(qg: QuasiHyperbolicGraph, c: Curve) -> UniformityCertificate:
    """Evaluate both uniform-curve constants for c, discretized at vertices.

    Condition (1): quasi-shortest, l(c) <= A d_eps(endpoints).
    Condition (2): cigar, min(length before t, length after t) <= A d_eps(. )
    checked at every curve vertex; the interior defect is bounded by one
    conformal edge length and recorded.
    """
    cg = qg.conformal
    x, y = c.endpoints()
    if x == y:
        raise FormatError("uniform-curve condition (1) needs distinct endpoints")
    seg = cg.step_lengths(c)
    total = 0.0
    for w in seg:
        total += w
    cond1 = total / cg.distance(x, y)
    cond2 = 0.0
    before = 0.0
    for i, v in enumerate(c.vertices):
        after = total - before
        cond2 = max(cond2, min(before, after) / qg.boundary[v])
        if i < len(seg):
            before += seg[i]
    return UniformityCertificate(c, cond1, cond2, max(cond1, cond2),
                                 max(seg) if seg else 0.0)


def collapse_slope(filling: Filling, cg: ConformalGraph,
                   levels: list | None = None) -> float:
    """Least-squares slope of log level-sphere diameter against the level.

    Negative slope certifies boundary collapse.  Defaults to levels 1 up to
    the net saturation level (past saturation a finite sample stops refining
    and the diameters flatten artificially).  Levels with fewer than two
    vertices or zero diameter are skipped; all-degenerate input yields -inf.
    """
    if levels is None:
        levels = list(range(1, max(filling.saturation_level(), 3) + 1))
    ns, logs = [], []
    for n in levels:
        if len(filling.levels[n]) < 2:
            continue
        diam = level_sphere_diameter(filling, cg, n)
        if diam > 0.0:
            ns.append(n)
            logs.append(math.log(diam))
    if len(ns) < 2:
        return -math.inf
    return float(np.polyfit(ns, logs, 1)[0])


@dataclass(frozen=True)
class CriticalExponentEstimate:
    family: str
    sweep: tuple  # rows: (epsilon, slope, max_gh_ratio or None, depth)
    brackets_by_depth: dict  # depth -> (lo, hi)
    lo: float
    hi: float
    tolerance: float
    method: str = "slope-sign-bisection"

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self):
        return {
            "family": self.family,
            "sweep": [
                {"epsilon": e, "collapseSlope": s, "maxGHRatio": r, "depth": d}
                for e, s, r, d in self.sweep
            ],
            "bracketsByDepth": {str(d): [lo, hi] for d, (lo, hi) in self.brackets_by_depth.items()},
            "estimate": {"lo": self.lo, "hi": self.hi, "mid": self.midpoint, "width": self.width},
            "tolerance": self.tolerance,
            "method": self.method,
        }


class FillingFamily:
    """Depth-parameterized segment-style filling family for the bisection."""

    def __init__(self, space, alpha: float, tau: float = 2.0, seed: int = 0,
                 depths: tuple = (6, 7, 8), gh_budget: int = 400):
        self.space = space
        self.alpha = alpha
        self.tau = tau
        self.seed = seed
        self.depths = tuple(depths)
        self.gh_budget = gh_budget
        self.name = f"filling(alpha={alpha})"
        self._fillings = {}

    def _filling(self, depth: int) -> Filling:
        if depth not in self._fillings:
            params = FillingParams(self.alpha, self.tau, depth, self.seed)
            self._fillings[depth] = build_filling(self.space, params)
        return self._fillings[depth]

    def slope(self, epsilon: float, depth: int) -> float:
        f = self._filling(depth)
        cg = uniformize_graph(f.graph, epsilon)
        return collapse_slope(f, cg)

    def max_gh_ratio(self, epsilon: float, depth: int) -> float:
        f = self._filling(depth)
        cg = uniformize_graph(f.graph, epsilon)
        deep = f.level_vertices(depth) + f.level_vertices(depth - 1)
        return gh_sweep(cg, self.gh_budget, self.seed, deep_vertices=deep).max_ratio


class ModelFamily:
    """Constant-curvature family; collapse read off the ray upper bound."""

    def __init__(self, kappa: float, dtheta: float = math.pi, k_max: float = 30.0):
        from .model_spaces import ModelSpaceParams, ray_upper_log_slope

        self.kappa = kappa
        self.dtheta = dtheta
        self.depths = (k_max / 2.0, k_max)
        self.name = f"model(kappa={kappa})"
        self._params_cls = ModelSpaceParams
        self._slope_fn = ray_upper_log_slope

    def slope(self, epsilon: float, depth: float) -> float:
        return self._slope_fn(self._params_cls(self.kappa, epsilon), self.dtheta, depth)

    def max_gh_ratio(self, epsilon: float, depth: float):
        return None


def estimate_critical_exponent(family, eps_range: tuple, tolerance: float,
                               with_gh: bool = True) -> CriticalExponentEstimate:
    """Bisection on the sign of the collapse slope, bracket width <= tolerance.

    The range must bracket a sign change at every depth of the family:
    nonnegative slope at the low end (no collapse), negative at the high end.
    """
    lo0, hi0 = eps_range
    if not (0 < lo0 < hi0):
        raise FormatError(f"bad epsilon range {eps_range}")
    if not (tolerance > 0):
        raise FormatError("tolerance must be positive")
    sweep = []
    brackets = {}

    def eval_point(eps, depth):
        s = family.slope(eps, depth)
        r = family.max_gh_ratio(eps, depth) if with_gh else None
        sweep.append((eps, s, r, depth))
        return s

    for depth in family.depths:
        lo, hi = lo0, hi0
        s_lo = eval_point(lo, depth)
        s_hi = eval_point(hi, depth)
        if not (s_lo >= 0.0 > s_hi):
            raise NumericGuardError(
                f"no collapse-slope sign change on [{lo0}, {hi0}] at depth {depth}: "
                f"slope({lo0}) = {s_lo}, slope({hi0}) = {s_hi}"
            )
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            if eval_point(mid, depth) < 0.0:
                hi = mid
            else:
                lo = mid
        brackets[depth] = (lo, hi)
    final = brackets[family.depths[-1]]
    return CriticalExponentEstimate(family.name, tuple(sweep), brackets,
                                    final[0], final[1], tolerance)


@dataclass(frozen=True)
class ScalingCheckParams:
    k: float
    epsilon: float

    def __post_init__(self):
        if not (self.k > 0):
            raise FormatError(f"K must be positive, got {self.k}")
        if not (self.epsilon > 0):
            raise FormatError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def epsilon_tilde(self) -> float:
        return self.epsilon / self.k


def random_curves(g: MetricGraph, count: int, seed: int) -> list:
    """Seeded sample of test curves: geodesics between random pairs mixed
    with random walks (the scaling identity holds for arbitrary curves)."""
    order = g.vertex_order()
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            i, j = rng.integers(0, len(order), size=2)
            if i == j:
                continue
            out.append(shortest_path_curve(g, order[i], order[j]))
        else:
            v = order[rng.integers(0, len(order))]
            steps = int(rng.integers(1, 13))
            path = [v]
            for _ in range(steps):
                nbrs = g.neighbors(path[-1])
                path.append(nbrs[rng.integers(0, len(nbrs))][0])
            out.append(Curve(tuple(path)))
    return out


def scaling_check(g: MetricGraph, params: ScalingCheckParams,
                  curves: list | None = None, count: int = 100, seed: int = 0) -> float:
    """Max relative defect of l_{d~_eps~}(curve) against K l_{d_eps}(curve)
    over the curve sample, where d~ = K d and eps~ = eps/K.  Exactness is
    the claim; the defect measures floating-point error only.
    """
    if curves is None:
        curves = random_curves(g, count, seed)
    cg = uniformize_graph(g, params.epsilon)
    scaled = scale_metric(g, params.k)
    cg_tilde = uniformize_graph(scaled, params.epsilon_tilde)
    worst = 0.0
    for c in curves:
        lhs = cg_tilde.curve_length(c)
        rhs = params.k * cg.curve_length(c)
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
