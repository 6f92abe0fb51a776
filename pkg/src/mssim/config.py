"""Run-configuration parsing: JSON in, fully resolved simulator inputs out.

Frequencies in config files are plain Hz; everything is converted to angular
rad/s here, before any computation starts.  Unknown keys are rejected with
their full path.
"""

import json
from pathlib import Path

import numpy as np
from dataclasses import dataclass

from .chain import (IonChainConfig, MSPulse, lamb_dicke_matrix,
                    transverse_normal_modes, RAMAN_355_WAVEVECTOR, YB171_ION_MASS)
from .errors import ConfigError
from .noise import GaussianFluctuation, NoiseConfig, SPAMModel

TWO_PI = 2.0 * np.pi

_SCHEMA = {
    "chain": {"n", "mode_freqs_hz", "eigenvectors", "lamb_dicke",
              "radial_com_hz", "axial_com_hz", "wavevector_per_m", "ion_mass_kg"},
    "pulse": {"target_mode", "detuning_hz", "rabi_hz", "n_loops", "duration_s"},
    "noise": {"mode_sigma_hz", "rabi_sigma_fraction", "grid_points", "nbar", "spam"},
    "spam": {"type", "eps", "path"},
    "qaoa": {"gamma_grid", "beta_grid", "shots", "sampling", "seed", "calibration"},
    "grid": {"min", "max", "steps"},
    "calibration": {"mode", "n_loops", "observable_state", "gamma_scan_max"},
    "ms": {"max_loops", "points_per_loop", "times_s", "shots"},
    "root": {"chain", "pulse", "noise", "qaoa", "ms", "seed"},
}


def _check_keys(section, name):
    if not isinstance(section, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    unknown = set(section) - _SCHEMA[name]
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")


def _require(section, key, name):
    if key not in section:
        raise ConfigError(f"missing required key {name}.{key}")
    return section[key]


@dataclass(frozen=True)
class RunConfig:
    chain: IonChainConfig
    pulse: MSPulse
    noise: NoiseConfig
    qaoa: dict
    ms: dict
    seed: int
    raw: dict


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return resolve_config(raw, base_dir=Path(path).parent)


def resolve_config(raw, base_dir=Path(".")):
    _check_keys(raw, "root")
    chain = _resolve_chain(_require(raw, "chain", "root"))
    pulse = None
    if "pulse" in raw:
        pulse = _resolve_pulse(raw["pulse"], chain)
    noise = _resolve_noise(raw.get("noise", {}), base_dir)
    qaoa = _resolve_qaoa(raw.get("qaoa", {}))
    ms = _resolve_ms(raw.get("ms", {}))
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return RunConfig(chain=chain, pulse=pulse, noise=noise, qaoa=qaoa, ms=ms,
                     seed=seed, raw=raw)


def _resolve_chain(section):
    _check_keys(section, "chain")
    n = _require(section, "n", "chain")
    wavevector = section.get("wavevector_per_m", RAMAN_355_WAVEVECTOR)
    mass = section.get("ion_mass_kg", YB171_ION_MASS)

    vecs = None
    computed_freqs = None
    if "radial_com_hz" in section or "axial_com_hz" in section:
        radial = _require(section, "radial_com_hz", "chain")
        axial = _require(section, "axial_com_hz", "chain")
        computed_freqs, vecs = transverse_normal_modes(n, TWO_PI * radial, TWO_PI * axial)
    if "eigenvectors" in section:
        vecs = np.asarray(section["eigenvectors"], dtype=float).reshape(n, n)
    if vecs is None:
        raise ConfigError("chain needs either eigenvectors or radial/axial COM "
                          "frequencies to derive them")

    if "mode_freqs_hz" in section:
        freqs = TWO_PI * np.asarray(section["mode_freqs_hz"], dtype=float)
        if freqs.shape != (n,):
            raise ConfigError(f"chain.mode_freqs_hz must have length {n}")
    elif computed_freqs is not None:
        freqs = computed_freqs
    else:
        raise ConfigError("chain needs mode_freqs_hz or COM frequencies")

    if "lamb_dicke" in section:
        eta = np.asarray(section["lamb_dicke"], dtype=float).reshape(n, n)
    else:
        eta = lamb_dicke_matrix(vecs, freqs, wavevector=wavevector, ion_mass=mass)
    return IonChainConfig(n=n, mode_freqs=freqs, eigenvectors=vecs, lamb_dicke=eta)


def _resolve_pulse(section, chain):
    _check_keys(section, "pulse")
    target = _require(section, "target_mode", "pulse")
    detuning = _require(section, "detuning_hz", "pulse")
    if not 0 <= target < chain.n:
        raise ConfigError(f"pulse.target_mode {target} out of range")
    mu = chain.mode_freqs[target] + TWO_PI * detuning
    rabi = np.atleast_1d(np.asarray(section.get("rabi_hz", 0.0), dtype=float))
    if rabi.size == 1:
        rabi = np.full(chain.n, rabi[0])
    if rabi.shape != (chain.n,):
        raise ConfigError(f"pulse.rabi_hz must be scalar or length {chain.n}")
    gap = abs(TWO_PI * detuning)
    if gap == 0:
        raise ConfigError("pulse.detuning_hz must be nonzero")
    if "duration_s" in section and "n_loops" in section:
        raise ConfigError("give pulse.duration_s or pulse.n_loops, not both")
    if "duration_s" in section:
        duration = float(section["duration_s"])
    else:
        duration = section.get("n_loops", 1) * (TWO_PI / gap)
    pulse = MSPulse(mu=mu, rabi=TWO_PI * rabi, duration=duration, target_mode=target)
    pulse.validate_against(chain)
    return pulse


def _resolve_noise(section, base_dir):
    _check_keys(section, "noise")
    grid_points = section.get("grid_points", 1000)
    mode_fluct = None
    if section.get("mode_sigma_hz", 0.0):
        mode_fluct = GaussianFluctuation(target="target_mode_freq",
                                         sigma=TWO_PI * section["mode_sigma_hz"],
                                         grid_points=grid_points)
    rabi_fluct = None
    if section.get("rabi_sigma_fraction", 0.0):
        rabi_fluct = GaussianFluctuation(target="rabi_rate_relative",
                                         sigma=section["rabi_sigma_fraction"],
                                         grid_points=grid_points)
    spam = None
    if "spam" in section and section["spam"] is not None:
        spam = _resolve_spam(section["spam"], base_dir)
    nbar = section.get("nbar", 0.0)
    if isinstance(nbar, list):
        nbar = np.asarray(nbar, dtype=float)
    return NoiseConfig(mode_fluct=mode_fluct, rabi_fluct=rabi_fluct,
                       nbar=nbar, spam=spam)


def _resolve_spam(section, base_dir):
    _check_keys(section, "spam")
    kind = _require(section, "type", "spam")
    if kind == "bitflip":
        return SPAMModel(bitflip_eps=_require(section, "eps", "spam"))
    if kind == "matrix":
        path = Path(_require(section, "path", "spam"))
        if not path.is_absolute():
            path = base_dir / path
        try:
            matrix = np.loadtxt(path, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ConfigError(f"cannot read SPAM matrix {path}: {exc}") from exc
        return SPAMModel(matrix=matrix)
    raise ConfigError(f"unknown spam.type {kind!r}")


def _resolve_grid(section, name):
    _check_keys(section, "grid")
    lo = _require(section, "min", name)
    hi = _require(section, "max", name)
    steps = _require(section, "steps", name)
    if steps < 1 or hi <= lo:
        raise ConfigError(f"{name} must have max > min and steps >= 1")
    return np.linspace(lo, hi, steps)


def _resolve_qaoa(section):
    _check_keys(section, "qaoa")
    out = {
        "gamma_axis": _resolve_grid(section.get("gamma_grid",
                                                {"min": 0.05, "max": 2.0, "steps": 40}),
                                    "qaoa.gamma_grid"),
        "beta_axis": _resolve_grid(section.get("beta_grid",
                                               {"min": -np.pi / 4, "max": np.pi / 4,
                                                "steps": 41}),
                                   "qaoa.beta_grid"),
        "shots": section.get("shots", 400),
        "sampling": section.get("sampling", "exact_expectation"),
        "seed": section.get("seed", None),
    }
    cal = section.get("calibration", {})
    _check_keys(cal, "calibration")
    out["calibration"] = {
        "mode": cal.get("mode", "auto"),
        "n_loops": cal.get("n_loops", 1),
        "observable_state": cal.get("observable_state", None),
        "gamma_scan_max": cal.get("gamma_scan_max", 8.0),
    }
    if out["sampling"] not in ("exact_expectation", "sampled"):
        raise ConfigError(f"unknown qaoa.sampling {out['sampling']!r}")
    return out


def _resolve_ms(section):
    _check_keys(section, "ms")
    if "times_s" in section and ("max_loops" in section or "points_per_loop" in section):
        raise ConfigError("give ms.times_s or a loop grid, not both")
    return {
        "max_loops": section.get("max_loops", 8),
        "points_per_loop": section.get("points_per_loop", 8),
        "times_s": section.get("times_s", None),
        "shots": section.get("shots", 200),
    }
