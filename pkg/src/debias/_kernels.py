"""Compiled O(r^2) loops for the coefficient estimators.

All kernels take the centred samples ``y = x / x0 - 1`` and return arrays
indexed by the power ``k = 0..r``.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def cycling_kernel(y):
    r = y.shape[0]
    acc = np.zeros(r + 1)
    for s in range(r):
        prod = 1.0
        for k in range(1, r + 1):
            prod *= y[(s + k - 1) % r]
            acc[k] += prod
    out = acc / r if r > 0 else acc
    out[0] = 1.0
    return out


@numba.njit(cache=True)
def mvue_kernel(y):
    # u[k] after step j equals S_{j,k} / C(j,k)
    r = y.shape[0]
    u = np.zeros(r + 1)
    u[0] = 1.0
    for j in range(1, r + 1):
        yj = y[j - 1]
        for k in range(j, 0, -1):
            u[k] = ((j - k) / j) * u[k] + (k / j) * yj * u[k - 1]
    return u


@numba.njit(cache=True)
def cycling_gradient_kernel(y, g):
    r, d = g.shape
    acc = np.zeros((r + 1, d))
    for s in range(r):
        prod = 1.0
        for k in range(1, r + 1):
            idx = (s + k - 1) % r
            for c in range(d):
                acc[k, c] += g[idx, c] * prod
            prod *= y[idx]
    if r > 0:
        acc /= r
    return acc
