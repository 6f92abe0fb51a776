import numpy as np
import pytest

import mssim

TWO_PI = 2 * np.pi

# Reference chain parameters: measured radial spectra (Hz) for the two-, three-
# and six-ion experiments, the targeted mode, and the drive detuning from it.
TWO_ION = {
    "freqs_hz": [1.7331e6, 1.6641e6],
    "target": 1,
    "detuning_hz": -6.57e3,
    "radial_hz": 1.7331e6,
}
THREE_ION = {
    "freqs_hz": [1.7328e6, 1.6635e6, 1.5615e6],
    "target": 2,
    "detuning_hz": -5.26e3,
    "radial_hz": 1.7328e6,
}
SIX_ION = {
    "freqs_hz": [1.7398e6, 1.6989e6, 1.6363e6, 1.5555e6, 1.4554e6, 1.3324e6],
    "target": 3,
    "detuning_hz": -6.20e3,
    "radial_hz": 1.7398e6,
}
AXIAL_HZ = 0.5e6

BELL_RABI_HZ = 26552.0  # two-ion drive calibrated for the entangled pair state


def build_chain(params):
    n = len(params["freqs_hz"])
    freqs = TWO_PI * np.asarray(params["freqs_hz"])
    _, vecs = mssim.transverse_normal_modes(n, TWO_PI * params["radial_hz"],
                                            TWO_PI * AXIAL_HZ)
    eta = mssim.lamb_dicke_matrix(vecs, freqs)
    return mssim.IonChainConfig(n=n, mode_freqs=freqs, eigenvectors=vecs,
                                lamb_dicke=eta)


def build_pulse(chain, params, rabi_hz=1.0 / TWO_PI, n_loops=1):
    mu = chain.mode_freqs[params["target"]] + TWO_PI * params["detuning_hz"]
    t_loop = TWO_PI / abs(TWO_PI * params["detuning_hz"])
    return mssim.MSPulse(mu=mu, rabi=np.full(chain.n, TWO_PI * rabi_hz),
                         duration=n_loops * t_loop, target_mode=params["target"])


def random_chain(rng, n):
    """Small random but physical chain for property tests."""
    freqs = TWO_PI * (1.5e6 + 4e5 * np.sort(rng.random(n))[::-1])
    if n > 1:
        while np.min(np.abs(np.diff(freqs))) < TWO_PI * 2e3:
            freqs = TWO_PI * (1.5e6 + 4e5 * np.sort(rng.random(n))[::-1])
    vecs, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eta = mssim.lamb_dicke_matrix(vecs, freqs)
    return mssim.IonChainConfig(n=n, mode_freqs=freqs, eigenvectors=vecs,
                                lamb_dicke=eta)


def random_pulse(rng, chain):
    target = int(rng.integers(chain.n))
    detuning = TWO_PI * rng.uniform(3e3, 9e3) * rng.choice([-1.0, 1.0])
    rabi = TWO_PI * rng.uniform(1e4, 4e4, size=chain.n)
    mu = chain.mode_freqs[target] + detuning
    gaps = np.abs(mu - chain.mode_freqs)
    if int(np.argmin(gaps)) != target:
        return random_pulse(rng, chain)
    return mssim.MSPulse(mu=mu, rabi=rabi, duration=1.0, target_mode=target)


@pytest.fixture(scope="session")
def chain2():
    return build_chain(TWO_ION)


@pytest.fixture(scope="session")
def bell_pulse(chain2):
    return build_pulse(chain2, TWO_ION, rabi_hz=BELL_RABI_HZ, n_loops=3)


@pytest.fixture(scope="session")
def chain3():
    return build_chain(THREE_ION)


@pytest.fixture(scope="session")
def pulse3(chain3):
    return build_pulse(chain3, THREE_ION)


@pytest.fixture(scope="session")
def chain6():
    return build_chain(SIX_ION)


@pytest.fixture(scope="session")
def pulse6(chain6):
    return build_pulse(chain6, SIX_ION)


@pytest.fixture(scope="session")
def cal3(chain3, pulse3):
    return mssim.calibrate_rabi_mp(chain3, pulse3, mode="transition_popn",
                                   n_loops_cal=10)


@pytest.fixture(scope="session")
def cal6(chain6, pulse6):
    return mssim.calibrate_rabi_mp(chain6, pulse6, mode="cost_expectation",
                                   n_loops_cal=2)


@pytest.fixture(scope="session")
def instance3(chain3, pulse3):
    return mssim.MaxCutInstance.from_couplings(mssim.ising_couplings(chain3, pulse3))


@pytest.fixture(scope="session")
def instance6(chain6, pulse6):
    return mssim.MaxCutInstance.from_couplings(mssim.ising_couplings(chain6, pulse6))


@pytest.fixture(scope="session")
def angles3(instance3):
    return mssim.optimal_angles(instance3)


@pytest.fixture(scope="session")
def angles6(instance6):
    return mssim.optimal_angles(instance6)
