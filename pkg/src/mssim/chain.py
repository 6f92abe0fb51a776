"""Ion-chain vibrational structure, Lamb-Dicke couplings, and effective Ising couplings.

Angular frequencies are stored in rad/s throughout; configuration files quote
Hz and are converted at the boundary (see mssim.config).
"""

import numpy as np
from dataclasses import dataclass
from scipy.optimize import minimize

from .errors import ConfigError, DegenerateInstanceError, SingularityError, StructuralError

HBAR = 1.054571817e-34            # J s
ATOMIC_MASS = 1.66053906660e-27   # kg

# Default beam geometry: two 355 nm Raman beams crossing at 90 degrees, so the
# momentum kick is sqrt(2) * 2 pi / lambda along the radial direction.
YB171_ION_MASS = 170.936323 * ATOMIC_MASS
RAMAN_355_WAVEVECTOR = np.sqrt(2.0) * 2.0 * np.pi / 355e-9  # rad/m

# Mode frequencies closer than this are treated as degenerate and rejected.
_DEGENERACY_HZ = 1.0


@dataclass(frozen=True)
class IonChainConfig:
    """Vibrational structure of an n-ion chain.

    mode_freqs : (n,) angular mode frequencies omega_m in rad/s, in the order
        declared by the user (descending for the standard transverse spectrum).
    eigenvectors : (n, n) matrix, column m is the normalized participation
        vector b_{:, m} of mode m.
    lamb_dicke : (n, n) dimensionless eta_{i, m}.
    """

    n: int
    mode_freqs: np.ndarray
    eigenvectors: np.ndarray
    lamb_dicke: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.mode_freqs, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        eta = np.asarray(self.lamb_dicke, dtype=float)
        object.__setattr__(self, "mode_freqs", freqs)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "lamb_dicke", eta)
        n = self.n
        if freqs.shape != (n,) or vecs.shape != (n, n) or eta.shape != (n, n):
            raise ConfigError(f"chain arrays inconsistent with n={n}")
        if np.any(freqs <= 0):
            raise ConfigError("all mode frequencies must be positive")
        diffs = np.abs(freqs[:, None] - freqs[None, :]) / (2 * np.pi)
        np.fill_diagonal(diffs, np.inf)
        if np.any(diffs < _DEGENERACY_HZ):
            i, j = np.unravel_index(np.argmin(diffs), diffs.shape)
            raise ConfigError(
                f"degenerate transverse modes {i} and {j} "
                f"(split {diffs[i, j]:.3g} Hz < {_DEGENERACY_HZ} Hz)")
        gram = vecs.T @ vecs
        if np.max(np.abs(gram - np.eye(n))) > 1e-12:
            raise ConfigError("eigenvector columns are not orthonormal to 1e-12")
        if not np.all(np.isfinite(eta)):
            raise ConfigError("Lamb-Dicke matrix has non-finite entries")
        for arr in (freqs, vecs, eta):
            arr.setflags(write=False)


@dataclass(frozen=True)
class MSPulse:
    """Bichromatic drive: absolute detuning mu (rad/s), per-ion Rabi rates
    (rad/s), duration (s), and the index of the targeted mode."""

    mu: float
    rabi: np.ndarray
    duration: float
    target_mode: int

    def __post_init__(self):
        rabi = np.atleast_1d(np.asarray(self.rabi, dtype=float)).copy()
        rabi.setflags(write=False)
        object.__setattr__(self, "rabi", rabi)
        if self.duration < 0:
            raise ConfigError("pulse duration must be non-negative")
        if np.any(rabi < 0):
            raise ConfigError("Rabi rates must be non-negative")
        if self.mu <= 0:
            raise ConfigError("bichromatic detuning mu must be positive")

    def validate_against(self, config):
        """Check the detuning really is closest to the declared target mode."""
        if self.rabi.shape != (config.n,):
            raise ConfigError(f"rabi vector length {self.rabi.shape[0]} != n={config.n}")
        if not 0 <= self.target_mode < config.n:
            raise ConfigError(f"target_mode {self.target_mode} out of range")
        gaps = np.abs(self.mu - config.mode_freqs)
        closest = int(np.argmin(gaps))
        if closest != self.target_mode:
            raise ConfigError(
                f"mu is closer to mode {closest} than to declared target "
                f"{self.target_mode}")


def equilibrium_positions(n):
    """Dimensionless equilibrium positions of n ions in a harmonic axial trap.

    Units: the usual Coulomb length (e^2 / 4 pi eps0 M wz^2)^(1/3); the scaled
    potential is sum u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|.
    """
    if n == 1:
        return np.zeros(1)

    def energy(u):
        d = np.abs(u[:, None] - u[None, :])
        np.fill_diagonal(d, np.inf)
        return 0.5 * np.sum(u**2) + 0.5 * np.sum(1.0 / d)

    def grad(u):
        du = u[:, None] - u[None, :]
        np.fill_diagonal(du, np.inf)
        return u - np.sum(np.sign(du) / du**2, axis=1)

    u0 = np.linspace(-1, 1, n) * 0.6 * n**0.6
    res = minimize(energy, u0, jac=grad, method="BFGS",
                   options={"gtol": 1e-13, "maxiter": 2000})
    u = np.sort(res.x)
    if np.max(np.abs(grad(u))) > 1e-8:
        raise StructuralError("equilibrium position solve did not converge")
    return u


def transverse_normal_modes(n, radial_com_freq, axial_com_freq):
    """Transverse (radial) normal modes of a linear chain.

    Parameters
    ----------
    n : ion count
    radial_com_freq, axial_com_freq : angular COM frequencies in rad/s

    Returns
    -------
    mode_freqs : (n,) angular frequencies, descending; the first is the COM
        mode at the radial COM frequency, the last is the zig-zag mode.
    eigenvectors : (n, n) orthonormal columns, paired with mode_freqs; signs
        fixed so the first nonzero component of each column is positive.
    """
    if n < 1:
        raise ConfigError("need at least one ion")
    if radial_com_freq <= 0 or axial_com_freq <= 0:
        raise ConfigError("COM frequencies must be positive")
    u = equilibrium_positions(n)
    # Scaled transverse curvature matrix; its spectrum is anisotropy-free.
    A = np.zeros((n, n))
    if n > 1:
        d = np.abs(u[:, None] - u[None, :])
        np.fill_diagonal(d, np.inf)
        A = -1.0 / d**3
        np.fill_diagonal(A, -A.sum(axis=1))
    a_eig, vecs = np.linalg.eigh(A)
    a_eig[np.abs(a_eig) < 1e-12] = 0.0
    w2 = radial_com_freq**2 - axial_com_freq**2 * a_eig
    if np.any(w2 <= 0):
        m = int(np.argmax(w2 <= 0))
        raise StructuralError(
            f"transverse mode {n - 1 - m} is unstable for "
            f"radial/axial COM = {radial_com_freq / axial_com_freq:.3f}; "
            "increase the radial confinement")
    order = np.argsort(a_eig)  # ascending curvature = descending frequency
    freqs = np.sqrt(w2[order])
    vecs = vecs[:, order]
    for m in range(n):
        k = int(np.argmax(np.abs(vecs[:, m]) > 1e-12))
        if vecs[k, m] < 0:
            vecs[:, m] = -vecs[:, m]
    return freqs, vecs


def lamb_dicke_matrix(eigenvectors, mode_freqs, wavevector=RAMAN_355_WAVEVECTOR,
                      ion_mass=YB171_ION_MASS):
    """eta_{i,m} = b_{i,m} * dk * sqrt(hbar / (2 M omega_m)).

    Defaults are for 171Yb+ driven by two 355 nm beams at 90 degrees.
    """
    freqs = np.asarray(mode_freqs, dtype=float)
    if wavevector <= 0 or ion_mass <= 0 or np.any(freqs <= 0):
        raise ConfigError("wavevector, mass and mode frequencies must be positive")
    eta_m = wavevector * np.sqrt(HBAR / (2.0 * ion_mass * freqs))
    return np.asarray(eigenvectors, dtype=float) * eta_m[None, :]


def _check_detuning(mu, mode_freqs):
    gaps = np.abs(mu - mode_freqs)
    if np.any(gaps < 1e-9 * mu):
        m = int(np.argmin(gaps))
        raise SingularityError(f"detuning mu coincides with mode {m}")


def ising_couplings(config, pulse, mode_freqs=None):
    """Effective Ising coupling matrix J_{i,j} in rad/s (symmetric, zero diagonal).

    J_{i,j} = Omega_i Omega_j sum_m eta_im eta_jm omega_m / (mu^2 - omega_m^2).
    `mode_freqs` overrides the chain's frequencies (used by the noise averages).
    """
    freqs = config.mode_freqs if mode_freqs is None else np.asarray(mode_freqs, float)
    _check_detuning(pulse.mu, freqs)
    weights = freqs / (pulse.mu**2 - freqs**2)
    J = (config.lamb_dicke * weights[None, :]) @ config.lamb_dicke.T
    J = J * np.outer(pulse.rabi, pulse.rabi)
    np.fill_diagonal(J, 0.0)
    return J


def maxcut_weights(J):
    """Dimensionless weights w = J / max |J|; rejects identically zero J."""
    J = np.asarray(J, dtype=float)
    jmax = np.max(np.abs(J))
    if jmax == 0.0:
        raise DegenerateInstanceError("all Ising couplings vanish")
    return J / jmax


def loop_time(pulse, config):
    """Period 2 pi / |mu - omega_target| of the targeted phase-space loop."""
    gap = abs(pulse.mu - config.mode_freqs[pulse.target_mode])
    if gap == 0.0:
        raise SingularityError("zero detuning from the target mode")
    return 2.0 * np.pi / gap
