"""mssim: exact simulation of global entangling drives on small trapped-ion
chains, with composable noise channels and an analog-QAOA layer."""

__version__ = "0.1.0"

from .chain import (IonChainConfig, MSPulse, equilibrium_positions,
                    ising_couplings, lamb_dicke_matrix, loop_time,
                    maxcut_weights, transverse_normal_modes)
from .propagator import (BranchDisplacement, MSEvolution, SpinDensity,
                         branch_displacements, coherent_overlap, displacements,
                         geometric_phase, measurement_probs, ms_evolution,
                         reduced_density, thermal_decoherence, trace_distance,
                         zero_state_x_amplitudes)
from .noise import (GaussianFluctuation, NoiseConfig, SPAMModel,
                    bitflip_spam_matrix, compose_fluctuations, ensemble_average,
                    fit_bitflip_epsilon, noisy_measurement_probs, spam_apply)
from .qaoa import (AnalogSchedule, CalibrationResult, HeatmapGrid,
                   MaxCutInstance, analog_qaoa_density, approximation_ratio,
                   calibrate_rabi_mp, compile_gamma, cost_of_bitstring,
                   heatmap_sweep, ideal_qaoa_state, optimal_angles,
                   target_only_couplings)
from .stats import ObservationSet, chi2_red, rmse, stderr_cost, stderr_prob
from .fock import fock_reduced_density

__all__ = [
    "IonChainConfig", "MSPulse", "equilibrium_positions", "ising_couplings",
    "lamb_dicke_matrix", "loop_time", "maxcut_weights", "transverse_normal_modes",
    "BranchDisplacement", "MSEvolution", "SpinDensity", "branch_displacements",
    "coherent_overlap", "displacements", "geometric_phase", "measurement_probs",
    "ms_evolution", "reduced_density", "thermal_decoherence", "trace_distance",
    "zero_state_x_amplitudes",
    "GaussianFluctuation", "NoiseConfig", "SPAMModel", "bitflip_spam_matrix",
    "compose_fluctuations", "ensemble_average", "fit_bitflip_epsilon",
    "noisy_measurement_probs", "spam_apply",
    "AnalogSchedule", "CalibrationResult", "HeatmapGrid", "MaxCutInstance",
    "analog_qaoa_density", "approximation_ratio", "calibrate_rabi_mp",
    "compile_gamma", "cost_of_bitstring", "heatmap_sweep", "ideal_qaoa_state",
    "optimal_angles", "target_only_couplings",
    "ObservationSet", "chi2_red", "rmse", "stderr_cost", "stderr_prob",
    "fock_reduced_density",
]
