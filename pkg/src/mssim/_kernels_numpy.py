"""Pure-numpy reference implementation of the hot branch-factor kernels.

The spin channel of a single bichromatic drive is diagonal in the X-string
decomposition: for strings x, x' it multiplies rho[x, x'] by

    E[x, x'] = exp(-i (chi(x) - chi(x')))
               * prod_m exp(i Im[a_m(x) a_m(x')*]) exp(-(nbar_m + 1/2) |a_m(x) - a_m(x')|^2)

with chi(x) = sum_{i<j} chi_ij x_i x_j and a_m(x) = sum_i x_i alpha_im.
The ensemble kernel accumulates a weighted sum of E over a grid of
(perturbed chi/alpha, Rabi scale) pairs.  Rabi scaling enters analytically:
alpha -> s * alpha, chi -> s^2 * chi.
"""

import numpy as np

# Inner-axis block size; bounds the (block, 2^n, 2^n) temporaries.
_BLOCK = 128


def branch_signs(n):
    """(2^n, n) matrix of +-1; row index is the bitstring, bit 0 -> +1."""
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _factor_block(S, chi, alpha, scales, therm_w):
    """E matrices for one (chi, alpha) at several Rabi scales; (B, 2^n, 2^n)."""
    chivec = 0.5 * np.einsum("xi,ij,xj->x", S, chi, S)
    A = S @ alpha
    A_all = scales[:, None, None] * A[None, :, :]
    G0 = A_all @ A_all.conj().transpose(0, 2, 1)
    Gw = (A_all * therm_w[None, None, :]) @ A_all.conj().transpose(0, 2, 1)
    d = np.real(np.einsum("bxx->bx", Gw))
    logmag = 2.0 * np.real(Gw) - d[:, :, None] - d[:, None, :]
    chiv = scales[:, None] ** 2 * chivec[None, :]
    phase = chiv[:, None, :] - chiv[:, :, None] + np.imag(G0)
    return np.exp(logmag + 1j * phase)


def ms_factor_ensemble(S, chis, alphas, w_outer, scales, w_inner, therm_w):
    """Weighted sum of E over the (outer grid) x (Rabi scale grid) product.

    Parameters
    ----------
    S : (2^n, n) sign matrix from `branch_signs`
    chis, alphas : (K1, n, n) stacks of phase / displacement matrices
    w_outer : (K1,) outer grid weights
    scales, w_inner : (K2,) Rabi scale factors and weights
    therm_w : (n,) per-mode nbar + 1/2
    """
    nb = S.shape[0]
    out = np.zeros((nb, nb), dtype=np.complex128)
    for k in range(chis.shape[0]):
        for lo in range(0, scales.shape[0], _BLOCK):
            sl = slice(lo, lo + _BLOCK)
            E = _factor_block(S, chis[k], alphas[k], scales[sl], therm_w)
            out += w_outer[k] * np.einsum("b,bxy->xy", w_inner[sl], E)
    return out / (np.sum(w_outer) * np.sum(w_inner))
