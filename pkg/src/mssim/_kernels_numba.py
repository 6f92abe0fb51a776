"""Numba-compiled branch-factor kernels; same contract as _kernels_numpy.

The ensemble sum is chunked into a fixed number of partial accumulators that
are reduced in a fixed order, so results are bit-reproducible regardless of
the number of threads.
"""

import numpy as np
from numba import njit, prange

_NCHUNKS = 64


@njit(cache=True)
def _accumulate_point(out, S, chi, alpha, scale, therm_w, wt):
    nb, n = S.shape
    s2 = scale * scale
    chivec = np.empty(nb)
    A = np.empty((nb, n), np.complex128)
    for x in range(nb):
        acc = 0.0
        for i in range(n):
            si = S[x, i]
            for j in range(i + 1, n):
                acc += chi[i, j] * si * S[x, j]
        chivec[x] = acc * s2
        for m in range(n):
            z = 0.0 + 0.0j
            for i in range(n):
                z += S[x, i] * alpha[i, m]
            A[x, m] = z * scale
    for x in range(nb):
        out[x, x] += wt
        for y in range(x + 1, nb):
            s0im = 0.0
            s1 = 0.0
            for m in range(n):
                ax = A[x, m]
                ay = A[y, m]
                s0im += ax.imag * ay.real - ax.real * ay.imag
                dre = ax.real - ay.real
                dim = ax.imag - ay.imag
                s1 += therm_w[m] * (dre * dre + dim * dim)
            ph = chivec[y] - chivec[x] + s0im
            mag = wt * np.exp(-s1)
            val = complex(mag * np.cos(ph), mag * np.sin(ph))
            out[x, y] += val
            out[y, x] += val.conjugate()


@njit(cache=True, parallel=True)
def ms_factor_ensemble(S, chis, alphas, w_outer, scales, w_inner, therm_w):
    nb = S.shape[0]
    K1 = chis.shape[0]
    K2 = scales.shape[0]
    total = K1 * K2
    parts = np.zeros((_NCHUNKS, nb, nb), np.complex128)
    for c in prange(_NCHUNKS):
        lo = (total * c) // _NCHUNKS
        hi = (total * (c + 1)) // _NCHUNKS
        for flat in range(lo, hi):
            k = flat // K2
            l = flat - k * K2
            _accumulate_point(parts[c], S, chis[k], alphas[k], scales[l],
                              therm_w, w_outer[k] * w_inner[l])
    out = np.zeros((nb, nb), np.complex128)
    for c in range(_NCHUNKS):
        out += parts[c]
    return out / (np.sum(w_outer) * np.sum(w_inner))
