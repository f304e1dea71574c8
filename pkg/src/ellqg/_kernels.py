"""Hot loops with a numba backend and a pure-numpy fallback.

Set ``ELLQG_NO_NUMBA=1`` before import to force the numpy implementations.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("ELLQG_NO_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _theta_series_np(t0, tau, half_count):
    # t0 already reduced to the fundamental parallelogram
    j = np.arange(-half_count, half_count) + 0.5
    ph = 1j * np.pi * (j[None, :] ** 2 * tau + 2.0 * j[None, :] * (t0[:, None] + 0.5))
    terms = np.exp(ph)
    val = -terms.sum(axis=1)
    der = -(2j * np.pi * j[None, :] * terms).sum(axis=1)
    return val, der


def _assignment_sum_np(assign, f, g, mirror):
    # sum over block assignments c of prod_i f[i, c_i] * prod_{c_i < c_j} g[i, j]
    if assign.shape[0] == 0:
        return 0j
    m = assign.shape[1]
    rows = np.arange(m)
    diag = f[rows[None, :], assign].prod(axis=1)
    if m < 2:
        return diag.sum()
    ci = assign[:, :, None]
    cj = assign[:, None, :]
    mask = (ci > cj) if mirror else (ci < cj)
    cross = np.where(mask, g[None, :, :], 1.0).prod(axis=(1, 2))
    return (diag * cross).sum()


if USE_NUMBA:

    @njit(cache=True)
    def _theta_series_nb(t0, tau, half_count):
        n = t0.shape[0]
        val = np.empty(n, dtype=np.complex128)
        der = np.empty(n, dtype=np.complex128)
        for i in range(n):
            s = 0j
            d = 0j
            for k in range(-half_count, half_count):
                j = k + 0.5
                term = np.exp(1j * np.pi * (j * j * tau + 2.0 * j * (t0[i] + 0.5)))
                s += term
                d += 2j * np.pi * j * term
            val[i] = -s
            der[i] = -d
        return val, der

    @njit(cache=True)
    def _assignment_sum_nb(assign, f, g, mirror):
        total = 0j
        nrow, m = assign.shape
        for r in range(nrow):
            prod = 1.0 + 0j
            for i in range(m):
                prod *= f[i, assign[r, i]]
            for i in range(m):
                ci = assign[r, i]
                for j in range(m):
                    cj = assign[r, j]
                    if (mirror and ci > cj) or ((not mirror) and ci < cj):
                        prod *= g[i, j]
            total += prod
        return total

    theta_series = _theta_series_nb
    assignment_sum = _assignment_sum_nb
else:
    theta_series = _theta_series_np
    assignment_sum = _assignment_sum_np
