"""Closed-form evolution under a global bichromatic drive.

The drive acts on the joint spin-vibration state as a product of spin-string
dependent displacements and an entangling phase exp(-i sum_{i<j} chi_ij X_i X_j).
Everything here works in the X eigenbasis, where that action is diagonal in
the spin strings; measurement rotates to the Z basis at the end.
"""

import functools

import numpy as np
from dataclasses import dataclass

from ._kernels import branch_signs, ms_factor_ensemble
from .errors import ConfigError, SingularityError
from .chain import _check_detuning


@dataclass(frozen=True)
class SpinDensity:
    """n-qubit reduced density operator with a basis tag ('x' or 'z')."""

    n: int
    basis: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if self.basis not in ("x", "z"):
            raise ConfigError(f"unknown basis tag {self.basis!r}")
        if m.shape != (2**self.n, 2**self.n):
            raise ConfigError("density matrix shape inconsistent with n")

    def validate(self, trace_atol=1e-10, herm_atol=1e-12, eig_atol=1e-9):
        m = self.matrix
        if abs(np.trace(m).real - 1.0) > trace_atol or abs(np.trace(m).imag) > trace_atol:
            raise ValueError(f"trace {np.trace(m)} != 1")
        if np.max(np.abs(m - m.conj().T)) > herm_atol:
            raise ValueError("matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -eig_atol:
            raise ValueError("matrix has a significantly negative eigenvalue")
        return self

    def in_basis(self, basis):
        if basis == self.basis:
            return self
        H = hadamard_transform(self.n)
        return SpinDensity(self.n, basis, H @ self.matrix @ H)

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class MSEvolution:
    """Evaluated drive at time t: pair phases chi (symmetric, zero diagonal)
    and per-ion/mode displacements alpha."""

    chi: np.ndarray
    alpha: np.ndarray
    pulse: object
    time: float


@dataclass(frozen=True)
class BranchDisplacement:
    """Per X-string branch data: chi_by_string[x] and alpha_by_string[x, m]."""

    n: int
    chi_by_string: np.ndarray
    alpha_by_string: np.ndarray


@functools.lru_cache(maxsize=None)
def sign_matrix(n):
    S = branch_signs(n)
    S.setflags(write=False)
    return S


@functools.lru_cache(maxsize=None)
def hadamard_transform(n):
    H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    H = np.array([[1.0]])
    for _ in range(n):
        H = np.kron(H, H1)
    H.setflags(write=False)
    return H


def _phase_bracket(mu, w, t):
    return (mu * np.sin((mu - w) * t) / (mu - w)
            - mu * np.sin((mu + w) * t) / (mu + w)
            + w * np.sin(2.0 * mu * t) / (2.0 * mu)
            - w * t)


def geometric_phase(config, pulse, t, mode_freqs=None):
    """Entangling phase matrix chi_ij(t), the four-term closed form summed over modes."""
    freqs = config.mode_freqs if mode_freqs is None else np.asarray(mode_freqs, float)
    if pulse.mu == 0.0:
        raise SingularityError("mu = 0")
    _check_detuning(pulse.mu, freqs)
    pref = _phase_bracket(pulse.mu, freqs, t) / (pulse.mu**2 - freqs**2)
    chi = -(config.lamb_dicke * pref[None, :]) @ config.lamb_dicke.T
    chi = chi * np.outer(pulse.rabi, pulse.rabi)
    np.fill_diagonal(chi, 0.0)
    return chi


def displacements(config, pulse, t, mode_freqs=None):
    """Phase-space displacements alpha_im(t) of each mode, per ion."""
    freqs = config.mode_freqs if mode_freqs is None else np.asarray(mode_freqs, float)
    if pulse.mu == 0.0:
        raise SingularityError("mu = 0")
    _check_detuning(pulse.mu, freqs)
    mu = pulse.mu
    bracket = mu - np.exp(1j * freqs * t) * (mu * np.cos(mu * t) - 1j * freqs * np.sin(mu * t))
    return -1j * config.lamb_dicke * pulse.rabi[:, None] * (bracket / (mu**2 - freqs**2))[None, :]


def ms_evolution(config, pulse, t, mode_freqs=None):
    return MSEvolution(chi=geometric_phase(config, pulse, t, mode_freqs),
                       alpha=displacements(config, pulse, t, mode_freqs),
                       pulse=pulse, time=t)


def branch_displacements(evolution, n):
    """Collapse per-ion quantities onto the 2^n X-string branches."""
    S = sign_matrix(n)
    chi_by_string = 0.5 * np.einsum("xi,ij,xj->x", S, evolution.chi, S)
    return BranchDisplacement(n=n, chi_by_string=chi_by_string,
                              alpha_by_string=S @ evolution.alpha)


def coherent_overlap(a, b):
    """<b|a> for coherent states: exp(i Im[a b*]) exp(-|a - b|^2 / 2)."""
    a = complex(a)
    b = complex(b)
    return np.exp(1j * (a * np.conj(b)).imag) * np.exp(-abs(a - b)**2 / 2.0)


def thermal_decoherence(alpha_branch, alpha_branch_p, nbar):
    """Per-mode decoherence factor for a thermal initial mode occupation.

    exp(i Im[a a'*]) |<a'|a>|^(2 nbar + 1); reduces to coherent_overlap at nbar=0.
    """
    if nbar < 0:
        raise ConfigError("nbar must be non-negative")
    a = complex(alpha_branch)
    b = complex(alpha_branch_p)
    return np.exp(1j * (a * np.conj(b)).imag) * np.exp(-(2.0 * nbar + 1.0) * abs(a - b)**2 / 2.0)


def _as_x_amplitudes(initial, n):
    """Accept pure X-basis amplitudes or a SpinDensity; return an X-basis matrix."""
    if isinstance(initial, SpinDensity):
        if initial.n != n:
            raise ConfigError("initial state size mismatch")
        rho = initial.in_basis("x").matrix
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ConfigError("initial density operator is not normalized")
        return rho
    c = np.asarray(initial, dtype=complex).reshape(-1)
    if c.shape != (2**n,):
        raise ConfigError("initial amplitude vector has wrong length")
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ConfigError("initial amplitudes are not normalized")
    return np.outer(c, c.conj())


def _nbar_vector(nbars, n):
    nb = np.atleast_1d(np.asarray(nbars, dtype=float))
    if nb.size == 1:
        nb = np.full(n, nb[0])
    if nb.shape != (n,):
        raise ConfigError("nbar vector has wrong length")
    if np.any(nb < 0):
        raise ConfigError("nbar must be non-negative")
    return nb


def ms_branch_factor(config, pulse, t, nbars, mode_freqs=None):
    """The (2^n, 2^n) multiplicative channel factor E for a single drive."""
    evo = ms_evolution(config, pulse, t, mode_freqs)
    n = config.n
    therm = _nbar_vector(nbars, n) + 0.5
    one = np.ones(1)
    return ms_factor_ensemble(sign_matrix(n), evo.chi[None, :, :],
                              evo.alpha[None, :, :], one, one, one, therm)


def reduced_density(initial, config, pulse, t, nbars=0.0):
    """Exact reduced spin density operator after driving for time t.

    `initial` is given in the X basis (pure amplitudes or a SpinDensity);
    `nbars` sets the initial thermal occupation of every mode (scalar or
    per-mode).  Output is tagged 'x'.
    """
    rho0 = _as_x_amplitudes(initial, config.n)
    E = ms_branch_factor(config, pulse, t, nbars)
    return SpinDensity(config.n, "x", rho0 * E)


def measurement_probs(rho):
    """Z-basis outcome probabilities <z|rho|z>, in lexicographic bitstring order."""
    return np.real(np.diag(rho.in_basis("z").matrix)).copy()


def trace_distance(rho_a, rho_b):
    """(1/2) trace norm of the difference of two density operators."""
    a = rho_a.matrix if isinstance(rho_a, SpinDensity) else np.asarray(rho_a)
    b = rho_b.matrix if isinstance(rho_b, SpinDensity) else np.asarray(rho_b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def zero_state_x_amplitudes(n):
    """X-basis amplitudes of |0...0>: uniform 2^(-n/2)."""
    return np.full(2**n, 2.0**(-n / 2.0), dtype=complex)
