"""Closed-form computations in the polar model of constant negative curvature.

The metric is dr^2 + (1/-kappa) sinh(sqrt(-kappa) r)^2 dtheta^2 with the
basepoint at the origin (kappa = -1 is the hyperbolic plane).  Everything
here is a closed form; the only iteration is a golden-section refinement of
the radial-arc-radial minimizer.

Dimensions above two are covered by the plane isometrically embedded in the
higher-dimensional ball, so no n-dimensional code exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ModelSpaceParams:
    kappa: float
    epsilon: float

    def __post_init__(self):
        if not (self.kappa < 0):
            raise FormatError(f"kappa must be negative, got {self.kappa}")
        if not (self.epsilon > 0):
            raise FormatError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def sk(self) -> float:
        return math.sqrt(-self.kappa)


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise FormatError("radius must be nonnegative")


def circle_length(params: ModelSpaceParams, r: float) -> float:
    """Length of the circle of radius r: 2 pi sinh(sqrt(-k) r)/sqrt(-k)."""
    if not (r > 0):
        raise FormatError(f"radius must be positive, got {r}")
    return 2.0 * math.pi * math.sinh(params.sk * r) / params.sk


def ray_separation_bound(params: ModelSpaceParams, k: float) -> float:
    """d_eps length of the full circle at radius k: an upper bound for the
    d_eps distance between any two unit-speed rays from the origin at time k.

    Implemented literally as e^{-eps k} * circle_length(k) so the identity
    with circle_length is exact.
    """
    if k < 0:
        raise FormatError(f"radius must be nonnegative, got {k}")
    if k == 0:
        return 0.0
    return math.exp(-params.epsilon * k) * circle_length(params, k)


def _radial_arc_radial(params: ModelSpaceParams, dtheta: float, k: float, s: float) -> float:
    """Cost of descending radially to radius s, crossing an arc of angle
    dtheta, and ascending back: 2 int_s^k e^{-eps t} dt + dtheta e^{-eps s}
    sinh(sqrt(-k) s)/sqrt(-k)."""
    eps = params.epsilon
    radial = 2.0 * (math.exp(-eps * s) - math.exp(-eps * k)) / eps
    arc = dtheta * math.exp(-eps * s) * math.sinh(params.sk * s) / params.sk
    return radial + arc


def d_eps_ray_upper(params: ModelSpaceParams, dtheta: float, k: float,
                    s_grid: np.ndarray | None = None) -> tuple:
    """Minimum of the radial-arc-radial family over descent radii s in [0, k].

    Returns (value, argmin s).  Grid: geometric with 512 points on
    [1e-3 min(1,k), k] plus the endpoints, then golden-section refinement
    around the grid argmin to 1e-8.  This is an upper bound for
    d_eps(gamma(k), gamma~(k)) between rays with angle gap dtheta; no
    matching lower bound is claimed.
    """
    if not (0.0 <= dtheta <= 2.0 * math.pi):
        raise FormatError(f"angle gap must lie in [0, 2 pi], got {dtheta}")
    if k < 0:
        raise FormatError("k must be nonnegative")
    if k == 0 or dtheta == 0.0:
        return (_radial_arc_radial(params, dtheta, k, k), k)
    if s_grid is None:
        lo = min(1.0, k) * 1e-3
        s_grid = np.concatenate(([0.0], np.geomspace(lo, k, 512), [k]))
    else:
        s_grid = np.asarray(s_grid, dtype=float)
        if s_grid.size == 0:
            raise FormatError("empty s grid")
    vals = [_radial_arc_radial(params, dtheta, k, s) for s in s_grid]
    i = int(np.argmin(vals))
    a = s_grid[max(0, i - 1)]
    b = s_grid[min(len(s_grid) - 1, i + 1)]
    # golden-section refinement on [a, b]
    f = lambda s: _radial_arc_radial(params, dtheta, k, s)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > 1e-8:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    s_best = 0.5 * (a + b)
    v_best = f(s_best)
    if vals[i] < v_best:
        v_best, s_best = vals[i], float(s_grid[i])
    return (v_best, s_best)


def hyperbolic_distance(params: ModelSpaceParams, a: PolarPoint, b: PolarPoint) -> float:
    """Distance between polar points via the curvature-kappa law of cosines."""
    sk = params.sk
    arg = (math.cosh(sk * a.r) * math.cosh(sk * b.r)
           - math.sinh(sk * a.r) * math.sinh(sk * b.r) * math.cos(a.theta - b.theta))
    return math.acosh(max(1.0, arg)) / sk


def ray_upper_log_slope(params: ModelSpaceParams, dtheta: float, k_max: float,
                        n_fit: int = 16) -> float:
    """Fitted slope of log d_eps_ray_upper(dtheta, k) over k in [k_max/2, k_max].

    Negative slope certifies collapse of the candidate-family bound; the sign
    flips at eps = sqrt(-kappa).
    """
    ks = np.linspace(k_max / 2.0, k_max, n_fit)
    vals = np.array([d_eps_ray_upper(params, dtheta, k)[0] for k in ks])
    if np.any(vals <= 0):
        return -math.inf
    return float(np.polyfit(ks, np.log(vals), 1)[0])
