"""Finite-sampling error bars and model-vs-data comparison statistics."""

import numpy as np
from dataclasses import dataclass

from .errors import ConfigError, DataMismatchError


@dataclass(frozen=True)
class ObservationSet:
    """Paired simulated/experimental means with per-point variances.

    `variances` are squared standard errors of the mean (computed from the
    simulated density operator at the experimental shot count)."""

    values: np.ndarray
    exp_values: np.ndarray
    variances: np.ndarray
    shots: int = 0
    labels: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        e = np.asarray(self.exp_values, dtype=float)
        s2 = np.asarray(self.variances, dtype=float)
        if not (v.shape == e.shape == s2.shape) or v.ndim != 1:
            raise DataMismatchError("observation arrays must be 1-D and equal length")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "exp_values", e)
        object.__setattr__(self, "variances", s2)


def stderr_prob(p, shots):
    """Standard error of an estimated probability: sqrt(p (1-p) / S)."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"probability {p} outside [0, 1]")
    if shots < 1:
        raise ConfigError("shots must be at least 1")
    return np.sqrt(p * (1.0 - p) / shots)


def cost_moments(probs, cost_values):
    probs = np.asarray(probs, dtype=float)
    c = np.asarray(cost_values, dtype=float)
    mean = float(probs @ c)
    second = float(probs @ c**2)
    return mean, second


def stderr_cost_from_probs(probs, cost_values, shots):
    mean, second = cost_moments(probs, cost_values)
    var = max(second - mean**2, 0.0)
    return np.sqrt(var / shots)


def stderr_cost(rho, instance, shots):
    """Standard error of <C> estimated from S shots of rho."""
    from .propagator import measurement_probs
    if shots < 1:
        raise ConfigError("shots must be at least 1")
    return stderr_cost_from_probs(measurement_probs(rho), instance.cost_values, shots)


def chi2_red(obs):
    """Mean squared sim-data deviation over per-point variance (no fit-parameter
    correction)."""
    if np.any(obs.variances <= 0):
        bad = int(np.argmax(obs.variances <= 0))
        label = obs.labels[bad] if obs.labels else str(bad)
        raise ConfigError(f"zero variance at point {label}")
    return float(np.mean((obs.values - obs.exp_values)**2 / obs.variances))


def rmse(obs):
    """Unweighted root-mean-square deviation between sim and data."""
    return float(np.sqrt(np.mean((obs.values - obs.exp_values)**2)))
