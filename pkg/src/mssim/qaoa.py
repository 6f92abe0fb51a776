"""MaxCut cost evaluation, the ideal alternating-layer reference circuit, the
compilation of cost angles into drive settings, and parameter-landscape sweeps.

Angle convention: the sweep axis gamma is the magnitude 2 |J|_max t realized
by a drive of duration t.  The signed cost phase the drive applies is the
negative of that, but the pipeline (drive on |0...0>, then the basis-change
rotation and mixer) reproduces the reference-circuit measurement statistics at
(+gamma, +beta); tests/test_qaoa.py checks this numerically.
"""

import math

import numpy as np
from dataclasses import dataclass, field
from scipy.optimize import minimize_scalar

from .chain import MSPulse, ising_couplings, loop_time, maxcut_weights
from .errors import CalibrationError, ConfigError, DegenerateInstanceError
from .noise import NoiseConfig, compose_fluctuations, noisy_measurement_probs
from .propagator import SpinDensity, sign_matrix, zero_state_x_amplitudes
from .stats import stderr_cost_from_probs


@dataclass(frozen=True)
class MaxCutInstance:
    """Weighted MaxCut instance; caches the diagonal cost spectrum."""

    n: int
    weights: np.ndarray
    cost_values: np.ndarray = field(init=False, repr=False)
    c_max: float = field(init=False)
    c_min: float = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ConfigError("weight matrix shape inconsistent with n")
        if np.max(np.abs(w - w.T)) > 1e-12 or np.any(np.abs(np.diag(w)) > 0):
            raise ConfigError("weights must be symmetric with zero diagonal")
        w = 0.5 * (w + w.T)
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        S = sign_matrix(self.n)
        quad = np.einsum("xi,ij,xj->x", S, w, S)  # counts each pair twice
        c = 0.25 * (np.sum(w) - quad)             # sum(w) also double counts
        c.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "cost_values", c)
        object.__setattr__(self, "c_max", float(c.max()))
        object.__setattr__(self, "c_min", float(c.min()))

    @classmethod
    def from_couplings(cls, J):
        w = maxcut_weights(J)
        return cls(n=w.shape[0], weights=w)


def cost_of_bitstring(instance, z):
    """(1/2) sum_{i<j} w_ij (1 - z_i z_j) for a +-1 string z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (instance.n,) or np.any(np.abs(z) != 1.0):
        raise ConfigError("z must be a +-1 string of length n")
    return float(0.5 * np.sum(np.triu(instance.weights, 1) * (1.0 - np.outer(z, z))))


def _apply_one_qubit(psi, u, qubit, n):
    psi = psi.reshape([2] * n)
    psi = np.moveaxis(np.tensordot(u, psi, axes=(1, qubit)), 0, qubit)
    return psi.reshape(-1)


def _mixer_gate(beta):
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ideal_qaoa_state(instance, gammas, betas):
    """Alternating cost-phase / mixer layers applied to the uniform state.

    psi = prod_l exp(-i beta_l sum_i X_i) exp(-i gamma_l C) |+>^n
    """
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if gammas.shape != betas.shape or gammas.size < 1:
        raise ConfigError("need equal-length, non-empty angle vectors")
    n = instance.n
    psi = np.full(2**n, 2.0**(-n / 2.0), dtype=complex)
    for g, b in zip(gammas, betas):
        psi = np.exp(-1j * g * instance.cost_values) * psi
        u = _mixer_gate(b)
        for q in range(n):
            psi = _apply_one_qubit(psi, u, q, n)
    return psi


def approximation_ratio(cost_expectation, instance):
    """(⟨C⟩ - C_min) / (C_max - C_min)."""
    span = instance.c_max - instance.c_min
    if span <= 0:
        raise DegenerateInstanceError("C_max equals C_min")
    return float((cost_expectation - instance.c_min) / span)


@dataclass(frozen=True)
class AnalogSchedule:
    """Drive settings realizing a requested cost angle at fixed loop closure."""

    gamma: float
    n_loops: int
    rabi: float
    duration: float
    gamma_mp: float
    rabi_mp: float


def compile_gamma(gamma, gamma_mp, rabi_mp, loop_time_s):
    """Pick the loop count and scaled Rabi rate that realize `gamma`.

    n_loops = ceil(gamma / gamma_mp); Omega = Omega_mp sqrt(gamma / (n_loops gamma_mp)),
    which preserves gamma / gamma' = Omega^2 t / Omega'^2 t' and never exceeds
    the max-power Rabi rate.
    """
    if gamma <= 0 or gamma_mp <= 0:
        raise ConfigError("gamma and gamma_mp must be positive")
    n_loops = max(1, math.ceil(gamma / gamma_mp - 1e-12))
    rabi = rabi_mp * np.sqrt(gamma / (n_loops * gamma_mp))
    return AnalogSchedule(gamma=gamma, n_loops=n_loops, rabi=float(rabi),
                          duration=n_loops * loop_time_s,
                          gamma_mp=gamma_mp, rabi_mp=rabi_mp)


def _unit_rabi_pulse(config, pulse_template):
    return MSPulse(mu=pulse_template.mu, rabi=np.ones(config.n),
                   duration=pulse_template.duration,
                   target_mode=pulse_template.target_mode)


def target_only_couplings(config, pulse):
    """Couplings keeping only the targeted mode's contribution."""
    eta_t = np.zeros_like(config.lamb_dicke)
    eta_t[:, pulse.target_mode] = config.lamb_dicke[:, pulse.target_mode]
    masked = type(config)(n=config.n, mode_freqs=config.mode_freqs,
                          eigenvectors=config.eigenvectors, lamb_dicke=eta_t)
    return ising_couplings(masked, pulse)


def _refine_1d(f, x0, lo, hi, span):
    res = minimize_scalar(lambda x: -f(x), bounds=(max(lo, x0 - span), min(hi, x0 + span)),
                          method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def optimal_angles(instance, gamma_max=2.5, gamma_steps=160, beta_steps=81):
    """Refined argmax of the p=1 ideal landscape over gamma in (0, gamma_max],
    beta in [-pi/4, pi/4] (the mixer's fundamental cell)."""
    gammas = np.linspace(gamma_max / gamma_steps, gamma_max, gamma_steps)
    betas = np.linspace(-np.pi / 4, np.pi / 4, beta_steps)
    c = instance.cost_values

    def expc(g, b):
        psi = ideal_qaoa_state(instance, [g], [b])
        return float(np.abs(psi) ** 2 @ c)

    vals = np.array([[expc(g, b) for b in betas] for g in gammas])
    gi, bi = np.unravel_index(np.argmax(vals), vals.shape)
    g, b = gammas[gi], betas[bi]
    for _ in range(3):
        b = _refine_1d(lambda x: expc(g, x), b, -np.pi / 4, np.pi / 4,
                       betas[1] - betas[0])
        g = _refine_1d(lambda x: expc(x, b), g, gammas[0], gamma_max,
                       gammas[1] - gammas[0])
    return g, b, approximation_ratio(expc(g, b), instance)


@dataclass(frozen=True)
class CalibrationResult:
    gamma_star: float
    gamma_mp: float
    rabi_mp: float
    mode: str
    n_loops: int
    beta_star: float = None
    scan_gammas: np.ndarray = None
    scan_values: np.ndarray = None


def _scan_max(f, gammas):
    vals = np.array([f(g) for g in gammas])
    k = int(np.argmax(vals))
    if k == 0 or k == len(gammas) - 1:
        raise CalibrationError("no interior maximum on the calibration scan grid")
    g = _refine_1d(f, gammas[k], gammas[0], gammas[-1], gammas[1] - gammas[0])
    return g, vals


def calibrate_rabi_mp(config, pulse_template, mode="auto", n_loops_cal=1,
                      observable_state=None, gamma_scan_max=8.0, gamma_scan_steps=1600):
    """Infer the max-power angle and Rabi rate from noiseless simulations.

    transition_popn (n <= 3): for two ions the drive is set to produce the
    maximally entangled state at the calibration time (pair phase pi/4, i.e.
    gamma* = pi/2); for three ions gamma* maximizes the population of
    `observable_state` (default '101') after driving |0...0>.

    cost_expectation (n >= 4): gamma* maximizes the instance cost expectation
    at the optimal mixer angle, with the state evolved under the targeted
    mode's couplings only.

    Returns gamma_mp = gamma* / n_loops_cal and the Rabi rate solving
    gamma* = 2 J_max(Omega) * n_loops_cal * t_loop with the full couplings.
    """
    if mode == "auto":
        mode = "transition_popn" if config.n <= 3 else "cost_expectation"
    unit = _unit_rabi_pulse(config, pulse_template)
    j_unit = ising_couplings(config, unit)
    jmax_unit = np.max(np.abs(j_unit))
    if jmax_unit == 0:
        raise DegenerateInstanceError("all couplings vanish at this detuning")
    t_loop = loop_time(pulse_template, config)
    instance = MaxCutInstance.from_couplings(j_unit)
    scan_gammas = np.linspace(gamma_scan_max / gamma_scan_steps, gamma_scan_max,
                              gamma_scan_steps)
    beta_star = None
    scan_vals = None

    if mode == "transition_popn":
        if config.n == 2:
            gamma_star = np.pi / 2
        else:
            pattern = observable_state or "101"
            if len(pattern) != config.n or set(pattern) - {"0", "1"}:
                raise ConfigError("observable_state must be an n-bit string")
            idx = int(pattern, 2)

            def popn(g):
                rho = _ising_limit_density(instance, g)
                return float(np.real(rho.in_basis("z").matrix[idx, idx]))

            gamma_star, scan_vals = _scan_max(popn, scan_gammas)
    elif mode == "cost_expectation":
        _, beta_star, _ = optimal_angles(instance)
        j_target = target_only_couplings(config, unit)
        target_instance = MaxCutInstance.from_couplings(j_target)

        def expc(g):
            psi = ideal_qaoa_state(target_instance, [g], [beta_star])
            return float(np.abs(psi) ** 2 @ instance.cost_values)

        gamma_star, scan_vals = _scan_max(expc, scan_gammas)
    else:
        raise ConfigError(f"unknown calibration mode {mode!r}")

    gamma_mp = gamma_star / n_loops_cal
    rabi_mp = np.sqrt(gamma_star / (2.0 * jmax_unit * n_loops_cal * t_loop))
    return CalibrationResult(gamma_star=float(gamma_star), gamma_mp=float(gamma_mp),
                             rabi_mp=float(rabi_mp), mode=mode, n_loops=n_loops_cal,
                             beta_star=beta_star, scan_gammas=scan_gammas,
                             scan_values=scan_vals)


def _ising_limit_density(instance, gamma):
    """Spin state after the pair-phase part of the drive alone on |0...0>, with
    pair phases chi_ij = (gamma / 2) w_ij (loop-closed, decoherence-free limit)."""
    n = instance.n
    S = sign_matrix(n)
    chivec = 0.25 * gamma * np.einsum("xi,ij,xj->x", S, instance.weights, S)
    c = zero_state_x_amplitudes(n) * np.exp(-1j * chivec)
    return SpinDensity(n, "x", np.outer(c, c.conj()))


_RY_MINUS_HALF_PI = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)


def analog_qaoa_density(config, pulse_template, schedule, beta, noise=None):
    """Density operator of the full analog pipeline, in the Z basis, pre-SPAM.

    |0...0>  -->  noisy drive for the schedule's duration  -->  global
    R_Y(-pi/2)  -->  mixer exp(-i beta sum X_i).  SPAM is applied to the
    measurement probabilities by the caller.
    """
    noise = noise or NoiseConfig()
    t_loop = loop_time(pulse_template, config)
    if abs(schedule.duration - schedule.n_loops * t_loop) > 1e-9 * schedule.duration:
        raise ConfigError("schedule duration is not a loop multiple of the "
                          "configured detuning")
    pulse = MSPulse(mu=pulse_template.mu, rabi=np.full(config.n, schedule.rabi),
                    duration=schedule.duration, target_mode=pulse_template.target_mode)
    rho = compose_fluctuations(config, pulse, schedule.duration, noise,
                               initial=zero_state_x_amplitudes(config.n))
    u1 = _mixer_gate(beta) @ _RY_MINUS_HALF_PI
    U = np.array([[1.0]], dtype=complex)
    for _ in range(config.n):
        U = np.kron(U, u1)
    rho_z = rho.in_basis("z").matrix
    return SpinDensity(config.n, "z", U @ rho_z @ U.conj().T)


@dataclass(frozen=True)
class HeatmapGrid:
    """Approximation ratios (and standard errors) on a (gamma, beta) grid."""

    gamma_axis: np.ndarray
    beta_axis: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    shots: int
    provenance: str

    def __post_init__(self):
        for name in ("gamma_axis", "beta_axis", "values", "stderr"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(np.diff(self.gamma_axis) <= 0) or np.any(np.diff(self.beta_axis) <= 0):
            raise ConfigError("heatmap axes must be strictly monotone")
        shape = (self.gamma_axis.size, self.beta_axis.size)
        if self.values.shape != shape or self.stderr.shape != shape:
            raise ConfigError("heatmap value arrays inconsistent with axes")
        if self.provenance not in ("ideal_sim", "noisy_sim", "experiment"):
            raise ConfigError(f"unknown provenance {self.provenance!r}")

    def argmax_pixel(self):
        gi, bi = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(gi), int(bi)


def heatmap_sweep(instance, gamma_axis, beta_axis, shots, sampling="exact_expectation",
                  provenance="ideal_sim", config=None, pulse_template=None,
                  noise=None, calibration=None, seed=0):
    """Approximation-ratio landscape over a (gamma, beta) grid.

    provenance 'ideal_sim' evaluates the reference circuit; 'noisy_sim' runs
    the analog pipeline with the given noise channels and calibration.  In
    'sampled' mode each pixel draws `shots` multinomial samples with a
    deterministic per-pixel seed; standard errors always come from the exact
    outcome distribution.
    """
    if sampling not in ("exact_expectation", "sampled"):
        raise ConfigError(f"unknown sampling mode {sampling!r}")
    gamma_axis = np.asarray(gamma_axis, dtype=float)
    beta_axis = np.asarray(beta_axis, dtype=float)
    c = instance.cost_values
    span = instance.c_max - instance.c_min
    if provenance == "noisy_sim":
        if config is None or pulse_template is None or calibration is None:
            raise ConfigError("noisy_sim sweeps need config, pulse_template and calibration")
        noise = noise or NoiseConfig()
        t_loop = loop_time(pulse_template, config)

    values = np.empty((gamma_axis.size, beta_axis.size))
    errs = np.empty_like(values)
    for gi, g in enumerate(gamma_axis):
        for bi, b in enumerate(beta_axis):
            if provenance == "ideal_sim":
                psi = ideal_qaoa_state(instance, [g], [b])
                probs = np.abs(psi) ** 2
            else:
                schedule = compile_gamma(g, calibration.gamma_mp,
                                         calibration.rabi_mp, t_loop)
                rho = analog_qaoa_density(config, pulse_template, schedule, b, noise)
                probs = noisy_measurement_probs(rho, noise.spam)
            if sampling == "sampled":
                rng = np.random.default_rng([seed, gi, bi])
                counts = rng.multinomial(shots, np.clip(probs, 0, None) / np.sum(np.clip(probs, 0, None)))
                mean_c = float(counts @ c) / shots
            else:
                mean_c = float(probs @ c)
            values[gi, bi] = (mean_c - instance.c_min) / span
            errs[gi, bi] = stderr_cost_from_probs(probs, c, shots) / span
    return HeatmapGrid(gamma_axis=gamma_axis, beta_axis=beta_axis, values=values,
                       stderr=errs, shots=shots, provenance=provenance)
