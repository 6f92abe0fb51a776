"""Noise channels: static Gaussian parameter fluctuations, thermal occupation,
and SPAM, composed into one noisy measurement pipeline.

Gaussian channels model a random static offset per experimental shot; the
expected density operator is a truncated-Gaussian-weighted Riemann sum
(midpoint rule) over [-3 sigma, 3 sigma], renormalized for the 0.27% of
probability mass outside the bounds.
"""

import numpy as np
from dataclasses import dataclass, field

from ._kernels import ms_factor_ensemble
from .errors import ConfigError, DataMismatchError
from .propagator import (SpinDensity, _as_x_amplitudes, _nbar_vector,
                         geometric_phase, displacements, sign_matrix)

_TARGETS = ("target_mode_freq", "rabi_rate_relative")


@dataclass(frozen=True)
class GaussianFluctuation:
    """Static Gaussian spread of one drive parameter.

    target: 'target_mode_freq' (sigma in rad/s) or 'rabi_rate_relative'
    (sigma as a dimensionless fraction of the Rabi rate).
    """

    target: str
    sigma: float
    grid_points: int = 1000
    bound_sigmas: float = 3.0

    def __post_init__(self):
        if self.target not in _TARGETS:
            raise ConfigError(f"unknown fluctuation target {self.target!r}")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")
        if self.grid_points < 1:
            raise ConfigError("grid_points must be at least 1")

    def grid(self):
        """Midpoint offsets and (unnormalized) Gaussian weights."""
        if self.sigma == 0.0:
            return np.zeros(1), np.ones(1)
        half = self.bound_sigmas * self.sigma
        step = 2.0 * half / self.grid_points
        offsets = -half + step * (np.arange(self.grid_points) + 0.5)
        return offsets, np.exp(-offsets**2 / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class SPAMModel:
    """Either a full 2^n x 2^n column-stochastic confusion matrix, or a
    per-qubit independent bit-flip probability."""

    matrix: np.ndarray = None
    bitflip_eps: float = None

    def __post_init__(self):
        if (self.matrix is None) == (self.bitflip_eps is None):
            raise ConfigError("give exactly one of matrix or bitflip_eps")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            object.__setattr__(self, "matrix", m)
            _validate_stochastic(m)
        else:
            if not 0.0 <= self.bitflip_eps <= 1.0:
                raise ConfigError("bit-flip probability must lie in [0, 1]")

    def matrix_for(self, n):
        if self.matrix is not None:
            if self.matrix.shape != (2**n, 2**n):
                raise DataMismatchError(
                    f"SPAM matrix shape {self.matrix.shape} != (2^{n}, 2^{n})")
            return self.matrix
        return bitflip_spam_matrix(n, self.bitflip_eps)


@dataclass(frozen=True)
class NoiseConfig:
    """Independently optional channels; the empty config is the ideal pipeline."""

    mode_fluct: GaussianFluctuation = None
    rabi_fluct: GaussianFluctuation = None
    nbar: object = 0.0
    spam: SPAMModel = None

    def __post_init__(self):
        if self.mode_fluct is not None and self.mode_fluct.target != "target_mode_freq":
            raise ConfigError("mode_fluct must target target_mode_freq")
        if self.rabi_fluct is not None and self.rabi_fluct.target != "rabi_rate_relative":
            raise ConfigError("rabi_fluct must target rabi_rate_relative")


def _validate_stochastic(m, atol=1e-9):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError("SPAM matrix must be square")
    if np.any(m < -atol) or np.any(m > 1 + atol):
        raise ConfigError("SPAM matrix entries must lie in [0, 1]")
    colsums = m.sum(axis=0)
    if np.max(np.abs(colsums - 1.0)) > atol:
        z = int(np.argmax(np.abs(colsums - 1.0)))
        raise ConfigError(f"SPAM column {z} sums to {colsums[z]!r}, not 1")


def ensemble_average(simulate, fluct):
    """Average `simulate(offset)` over the fluctuation's truncated Gaussian grid.

    `simulate` must be deterministic in its argument and return a SpinDensity.
    """
    if fluct is None or fluct.sigma == 0.0:
        return simulate(0.0)
    offsets, weights = fluct.grid()
    acc = None
    first = None
    for off, w in zip(offsets, weights):
        rho = simulate(off)
        if first is None:
            first = rho
            acc = w * rho.matrix
        else:
            if rho.basis != first.basis or rho.n != first.n:
                raise ConfigError("simulate returned inconsistent densities")
            acc = acc + w * rho.matrix
    return SpinDensity(first.n, first.basis, acc / weights.sum())


def compose_fluctuations(config, pulse, t, noise, initial=None):
    """Pre-SPAM density operator with all drive fluctuations applied.

    Outer average over target-mode frequency offsets, inner over common
    relative Rabi-rate offsets (the two linear averages commute); thermal
    occupations enter analytically.  Defaults to the |0...0> initial state.
    """
    n = config.n
    if initial is None:
        from .propagator import zero_state_x_amplitudes
        initial = zero_state_x_amplitudes(n)
    rho0 = _as_x_amplitudes(initial, n)
    therm = _nbar_vector(noise.nbar, n) + 0.5

    mode_offsets, w_outer = (np.zeros(1), np.ones(1))
    if noise.mode_fluct is not None:
        mode_offsets, w_outer = noise.mode_fluct.grid()
    scales, w_inner = (np.ones(1), np.ones(1))
    if noise.rabi_fluct is not None:
        rel, w_inner = noise.rabi_fluct.grid()
        scales = 1.0 + rel

    K1 = mode_offsets.shape[0]
    chis = np.empty((K1, n, n))
    alphas = np.empty((K1, n, n), dtype=complex)
    for k, off in enumerate(mode_offsets):
        freqs = config.mode_freqs.copy()
        freqs[pulse.target_mode] += off
        chis[k] = geometric_phase(config, pulse, t, mode_freqs=freqs)
        alphas[k] = displacements(config, pulse, t, mode_freqs=freqs)

    E = ms_factor_ensemble(sign_matrix(n), chis, alphas, w_outer, scales,
                           w_inner, therm)
    return SpinDensity(n, "x", rho0 * E)


def spam_apply(spam, probs):
    """Apply the confusion matrix: returns M @ probs."""
    probs = np.asarray(probs, dtype=float)
    n = int(round(np.log2(probs.shape[0])))
    if 2**n != probs.shape[0]:
        raise DataMismatchError("probability vector length is not a power of two")
    M = spam.matrix_for(n)
    if M.shape[0] != probs.shape[0]:
        raise DataMismatchError(
            f"SPAM matrix is {M.shape[0]}-dim but probs are {probs.shape[0]}-dim")
    return M @ probs


def bitflip_spam_matrix(n, eps):
    """M_{z',z} = eps^h (1-eps)^(n-h) with h the Hamming distance."""
    if not 0.0 <= eps <= 1.0:
        raise ConfigError("bit-flip probability must lie in [0, 1]")
    z = np.arange(2**n)
    xor = z[:, None] ^ z[None, :]
    h = np.zeros((2**n, 2**n), dtype=int)
    for b in range(n):
        h += (xor >> b) & 1
    return eps**h * (1.0 - eps)**(n - h)


def noisy_measurement_probs(rho, spam=None):
    """Z-basis probabilities of rho, passed through SPAM when configured."""
    from .propagator import measurement_probs
    probs = measurement_probs(rho)
    if spam is None:
        return probs
    return spam_apply(spam, probs)


@dataclass(frozen=True)
class SpamFit:
    """Best independent bit-flip approximations of a measured SPAM matrix."""

    eps: float
    trace_norm_distance: float
    abs_diff_eps: float
    abs_diff_distance: float
    n: int = field(default=0)


def fit_bitflip_epsilon(m_exp, resolution=1e-4):
    """Scan eps in [0, 0.5] minimizing (1/2) trace-norm distance to the
    bit-flip model; also reports the sum-of-absolute-differences fit."""
    m_exp = np.asarray(m_exp, dtype=float)
    _validate_stochastic(m_exp)
    n = int(round(np.log2(m_exp.shape[0])))
    eps_grid = np.arange(0.0, 0.5 + resolution / 2, resolution)
    tn = np.empty(eps_grid.shape[0])
    ad = np.empty(eps_grid.shape[0])
    for i, eps in enumerate(eps_grid):
        diff = m_exp - bitflip_spam_matrix(n, eps)
        tn[i] = 0.5 * np.sum(np.linalg.svd(diff, compute_uv=False))
        ad[i] = np.sum(np.abs(diff))
    i_tn = int(np.argmin(tn))
    i_ad = int(np.argmin(ad))
    return SpamFit(eps=float(eps_grid[i_tn]), trace_norm_distance=float(tn[i_tn]),
                   abs_diff_eps=float(eps_grid[i_ad]), abs_diff_distance=float(ad[i_ad]),
                   n=n)
