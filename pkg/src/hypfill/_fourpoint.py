"""Numba kernels for the exact four-point hyperbolicity scan.

The ordered-quadruple defect max over (x, y, z, p) of
(x|y)_p ^ (y|z)_p - (x|z)_p equals, after clamping at 0, the max over
unordered 4-subsets {a,b,c,d} of (S1 - S2)/2 where S1 >= S2 >= S3 are the
three pairings d(a,b)+d(c,d), d(a,c)+d(b,d), d(a,d)+d(b,c).  (Quadruples
with repeated points never have positive defect.)  Scanning subsets cuts
the work by 24x and vectorizes cleanly under numba.

Imported lazily by hyperbolicity.delta_exact: the first call pays the JIT
cost, CLI startup does not.
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True)
def max_subset_defect_per_row(d):
    """best[i] = max over j<k<l of S1 - S2 for subsets starting at i."""
    n = d.shape[0]
    best = np.full(n, -np.inf)
    for i in prange(n - 3):
        local = -np.inf
        for j in range(i + 1, n - 2):
            dij = d[i, j]
            for k in range(j + 1, n - 1):
                dik = d[i, k]
                djk = d[j, k]
                for l in range(k + 1, n):
                    s1 = dij + d[k, l]
                    s2 = dik + d[j, l]
                    s3 = d[i, l] + djk
                    if s2 > s1:
                        s1, s2 = s2, s1
                    if s3 > s1:
                        s2 = s1
                        s1 = s3
                    elif s3 > s2:
                        s2 = s3
                    if s1 - s2 > local:
                        local = s1 - s2
        best[i] = local
    return best


@njit
def first_subset_attaining(d, target):
    """Lexicographically first (i, j, k, l) whose defect equals target."""
    n = d.shape[0]
    for i in range(n - 3):
        for j in range(i + 1, n - 2):
            dij = d[i, j]
            for k in range(j + 1, n - 1):
                dik = d[i, k]
                djk = d[j, k]
                for l in range(k + 1, n):
                    s1 = dij + d[k, l]
                    s2 = dik + d[j, l]
                    s3 = d[i, l] + djk
                    if s2 > s1:
                        s1, s2 = s2, s1
                    if s3 > s1:
                        s2 = s1
                        s1 = s3
                    elif s3 > s2:
                        s2 = s3
                    if s1 - s2 == target:
                        return i, j, k, l
    return -1, -1, -1, -1
