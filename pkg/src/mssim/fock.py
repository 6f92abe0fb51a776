"""Brute-force verification path: the drive's branch displacements are built as
matrix exponentials on a truncated Fock space and the spin state is recovered
by explicit partial trace, with no use of the closed-form overlap formulas.

Only practical for n <= 3 ions; this is a test oracle, not a production path.
"""

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, TruncationError
from .propagator import (SpinDensity, _as_x_amplitudes, branch_displacements,
                         ms_evolution)

_LEAK_BOUND = 1e-10
_THERMAL_TAIL = 1e-10


def displacement_operator(alpha, dim):
    """exp(alpha a+ - alpha* a) on a dim-dimensional truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    return expm(alpha * a.conj().T - np.conjugate(alpha) * a)


def thermal_weights(nbar, tail=_THERMAL_TAIL):
    """Geometric occupation weights with total discarded mass below `tail`."""
    if nbar < 0:
        raise ConfigError("nbar must be non-negative")
    if nbar == 0.0:
        return np.array([1.0])
    q = nbar / (nbar + 1.0)
    # Tail mass after N terms is q^N.
    nmax = int(np.ceil(np.log(tail) / np.log(q))) + 1
    w = (1.0 - q) * q**np.arange(nmax)
    return w


def default_cutoff(max_alpha, nu_max=0):
    amp = abs(max_alpha)
    return int(np.ceil(nu_max + amp**2 + 8.0 * amp + 20))


def fock_reduced_density(initial, config, pulse, t, nbars=0.0, cutoff=None):
    """Reduced spin density operator computed on a truncated Fock space.

    The initial mode state is the ground state (nbars=0) or a per-mode thermal
    mixture truncated at total tail mass 1e-10.  Raises TruncationError if any
    displaced state leaks more than 1e-10 of its population past the cutoff.
    """
    n = config.n
    if n > 3:
        raise ConfigError("Fock-space verification is limited to n <= 3")
    rho0 = _as_x_amplitudes(initial, n)
    nb = np.atleast_1d(np.asarray(nbars, dtype=float))
    if nb.size == 1:
        nb = np.full(n, nb[0])

    evo = ms_evolution(config, pulse, t)
    branch = branch_displacements(evo, n)
    A = branch.alpha_by_string           # (2^n, n)
    chi = branch.chi_by_string           # (2^n,)
    nstr = 2**n

    weights = [thermal_weights(nb[m]) for m in range(n)]
    if cutoff is None:
        cutoff = default_cutoff(np.max(np.abs(A)), max(len(w) for w in weights))

    # eps[m][x, x'] = sum_nu p_nu <D(a_m(x')) nu | D(a_m(x)) nu>, column dots of
    # the truncated displacement matrices.
    eps = np.ones((nstr, nstr), dtype=complex)
    for m in range(n):
        nu_count = len(weights[m])
        disp = np.empty((nstr, cutoff, nu_count), dtype=complex)
        for x in range(nstr):
            D = displacement_operator(A[x, m], cutoff)
            cols = D[:, :nu_count]
            leak = 1.0 - np.sum(np.abs(cols)**2, axis=0)
            top = np.sum(np.abs(cols[-2:, :])**2, axis=0)
            if np.max(leak) > _LEAK_BOUND or np.max(top) > _LEAK_BOUND:
                raise TruncationError(
                    f"Fock cutoff {cutoff} leaks {max(np.max(leak), np.max(top)):.2e} "
                    "of the displaced population; increase the cutoff")
            disp[x] = cols
        overlaps = np.einsum("ykn,xkn,n->xy", disp.conj(), disp, weights[m])
        eps *= overlaps

    phase = np.exp(-1j * (chi[:, None] - chi[None, :]))
    return SpinDensity(n, "x", rho0 * phase * eps)
