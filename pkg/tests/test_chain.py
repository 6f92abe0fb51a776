import numpy as np
import pytest

import mssim
from mssim.errors import ConfigError, DegenerateInstanceError, SingularityError, StructuralError

from conftest import TWO_PI, build_chain, build_pulse, random_chain


def test_single_ion_mode():
    freqs, vecs = mssim.transverse_normal_modes(1, TWO_PI * 2e6, TWO_PI * 0.5e6)
    assert freqs[0] == pytest.approx(TWO_PI * 2e6)
    assert vecs == pytest.approx(np.array([[1.0]]))


def test_two_ion_modes_symmetry_forced():
    wr = TWO_PI * 1.8e6
    freqs, vecs = mssim.transverse_normal_modes(2, wr, TWO_PI * 0.4e6)
    assert freqs[0] == pytest.approx(wr)
    assert freqs[1] < freqs[0]
    assert vecs[:, 0] == pytest.approx(np.array([1, 1]) / np.sqrt(2))
    assert vecs[:, 1] == pytest.approx(np.array([1, -1]) / np.sqrt(2))


def test_three_ion_zigzag_matches_direct_diagonalization():
    # Independent check: build the transverse curvature matrix from the known
    # 3-ion equilibrium spacing (4/5)^(1/3)... scaled positions, diagonalize.
    u = mssim.equilibrium_positions(3)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    A = -1.0 / d**3
    np.fill_diagonal(A, -A.sum(axis=1))
    wr, wz = TWO_PI * 1.9e6, TWO_PI * 0.5e6
    evals, evecs = np.linalg.eigh(wr**2 * np.eye(3) - wz**2 * A)
    freqs, vecs = mssim.transverse_normal_modes(3, wr, wz)
    assert np.sort(freqs) == pytest.approx(np.sqrt(evals))
    zig = vecs[:, 2]
    assert np.abs(zig) == pytest.approx(np.abs(np.array([1, -2, 1]) / np.sqrt(6)), abs=1e-10)
    assert zig[0] * zig[1] < 0 < zig[0] * zig[2]


def test_mode_count_and_descending_order():
    for n in (2, 3, 4, 5, 6, 7):
        freqs, vecs = mssim.transverse_normal_modes(n, TWO_PI * 1.8e6, TWO_PI * 0.45e6)
        assert freqs.shape == (n,)
        assert np.all(np.diff(freqs) < 0)
        assert np.all(vecs[:, 0] > 0)                      # COM uniform sign
        assert np.all(vecs[:-1, -1] * vecs[1:, -1] < 0)    # zig-zag alternates
        assert vecs.T @ vecs == pytest.approx(np.eye(n), abs=1e-12)


def test_eigenvector_residual_invariant():
    n = 5
    wr, wz = TWO_PI * 1.7e6, TWO_PI * 0.5e6
    u = mssim.equilibrium_positions(n)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    A = -1.0 / d**3
    np.fill_diagonal(A, -A.sum(axis=1))
    D = wr**2 * np.eye(n) - wz**2 * A
    freqs, vecs = mssim.transverse_normal_modes(n, wr, wz)
    for m in range(n):
        res = np.linalg.norm(D @ vecs[:, m] - freqs[m]**2 * vecs[:, m])
        assert res < 1e-9 * freqs[m]**2


def test_unstable_chain_raises_naming_mode():
    with pytest.raises(StructuralError, match="unstable"):
        mssim.transverse_normal_modes(6, TWO_PI * 0.6e6, TWO_PI * 0.5e6)


def test_lamb_dicke_zero_participation_and_scaling():
    freqs = TWO_PI * np.array([2.0e6, 1.8e6])
    vecs = np.array([[1.0, 0.0], [0.0, 1.0]])
    eta = mssim.lamb_dicke_matrix(vecs, freqs)
    assert eta[0, 1] == 0.0 and eta[1, 0] == 0.0
    eta2 = mssim.lamb_dicke_matrix(vecs, 2 * freqs)
    assert eta2 == pytest.approx(eta / np.sqrt(2))


def test_lamb_dicke_yb171_closed_form():
    # Independent constant arithmetic for the default beam geometry.
    w = TWO_PI * 1.6641e6
    eta = mssim.lamb_dicke_matrix(np.array([[1.0]]), np.array([w]))
    hbar = 1.054571817e-34
    mass = 170.936323 * 1.66053906660e-27
    dk = np.sqrt(2) * TWO_PI / 355e-9
    assert eta[0, 0] == pytest.approx(dk * np.sqrt(hbar / (2 * mass * w)), rel=1e-12)


def test_ising_zero_rabi_and_quadratic_scaling(chain3, pulse3):
    zero = mssim.MSPulse(mu=pulse3.mu, rabi=np.zeros(3), duration=1.0, target_mode=2)
    assert np.all(mssim.ising_couplings(chain3, zero) == 0.0)
    one = mssim.ising_couplings(chain3, pulse3)
    double = mssim.MSPulse(mu=pulse3.mu, rabi=2 * pulse3.rabi, duration=1.0, target_mode=2)
    J2 = mssim.ising_couplings(chain3, double)
    assert np.max(np.abs(J2 - 4 * one)) <= 1e-12 * np.max(np.abs(J2))


def test_ising_single_mode_closed_form():
    # Chain whose Lamb-Dicke matrix couples only mode 0: the sum collapses to
    # one term, directly comparable to the closed form.
    freqs = TWO_PI * np.array([1.9e6, 1.7e6])
    eta = np.array([[0.08, 0.0], [0.05, 0.0]])
    chain = mssim.IonChainConfig(n=2, mode_freqs=freqs,
                                 eigenvectors=np.array([[1, 1], [1, -1]]) / np.sqrt(2),
                                 lamb_dicke=eta)
    mu = freqs[0] - TWO_PI * 7e3
    pulse = mssim.MSPulse(mu=mu, rabi=np.full(2, TWO_PI * 2e4), duration=1.0,
                          target_mode=0)
    expected = (pulse.rabi[0] * pulse.rabi[1] * eta[0, 0] * eta[1, 0]
                * freqs[0] / (mu**2 - freqs[0]**2))
    got = mssim.ising_couplings(chain, pulse)
    assert got[0, 1] == pytest.approx(expected, rel=1e-14)


def test_maxcut_weights_basics():
    J = np.array([[0.0, 2.0], [2.0, 0.0]])
    J[0, 1] = 2.0
    w = mssim.maxcut_weights(J)
    assert w[0, 1] == 1.0
    J = np.array([[0, 2, -1], [2, 0, 0], [-1, 0, 0]], dtype=float)
    w = mssim.maxcut_weights(J)
    assert w[0, 1] == 1.0 and w[0, 2] == -0.5
    assert mssim.maxcut_weights(5.0 * J) == pytest.approx(w)
    with pytest.raises(DegenerateInstanceError):
        mssim.maxcut_weights(np.zeros((3, 3)))


def test_three_ion_reference_weights(chain3, pulse3):
    w = mssim.maxcut_weights(mssim.ising_couplings(chain3, pulse3))
    assert w[0, 1] == pytest.approx(1.0)
    assert w[1, 2] == pytest.approx(1.0)
    assert w[0, 2] == pytest.approx(-0.470, abs=1e-3)


def test_weight_sign_pattern_follows_target_mode(chain6, pulse6):
    # Sign pattern of J is the target eigenvector's outer product, up to one
    # overall sign fixed by the detuning side: mu below the target mode makes
    # the dominant denominator mu^2 - omega_t^2 negative.
    w = mssim.maxcut_weights(mssim.ising_couplings(chain6, pulse6))
    b = chain6.eigenvectors[:, pulse6.target_mode]
    side = np.sign(pulse6.mu - chain6.mode_freqs[pulse6.target_mode])
    iu = np.triu_indices(6, 1)
    assert np.all(np.sign(w[iu]) == side * np.sign(np.outer(b, b))[iu])


def test_j_symmetric_zero_diagonal_random():
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        chain = random_chain(rng, n)
        from conftest import random_pulse
        pulse = random_pulse(rng, chain)
        J = mssim.ising_couplings(chain, pulse)
        assert J == pytest.approx(J.T)
        assert np.all(np.diag(J) == 0.0)


def test_singularity_on_mode_coincidence(chain3):
    pulse = mssim.MSPulse(mu=float(chain3.mode_freqs[2]), rabi=np.ones(3),
                          duration=1.0, target_mode=2)
    with pytest.raises(SingularityError):
        mssim.ising_couplings(chain3, pulse)


def test_loop_time_values(chain2, chain3, pulse3):
    pulse2 = build_pulse(chain2, {"target": 1, "detuning_hz": -6.57e3,
                                  "freqs_hz": [], "radial_hz": 0})
    assert mssim.loop_time(pulse2, chain2) == pytest.approx(1 / 6.57e3, rel=1e-12)
    assert mssim.loop_time(pulse2, chain2) == pytest.approx(152.2e-6, rel=1e-3)
    assert mssim.loop_time(pulse3, chain3) == pytest.approx(190.1e-6, rel=1e-3)
    f = TWO_PI * np.array([2.0e6, 1.9e6])
    ch = build_chain({"freqs_hz": [2.0e6, 1.9e6], "target": 1,
                      "detuning_hz": -1e3, "radial_hz": 2.0e6})
    pu = mssim.MSPulse(mu=f[1] - TWO_PI * 1e3, rabi=np.ones(2), duration=0.0,
                       target_mode=1)
    assert mssim.loop_time(pu, ch) == pytest.approx(1e-3, rel=1e-12)


def test_config_validation_errors():
    freqs = TWO_PI * np.array([2.0e6, 1.9e6])
    good_vecs = np.eye(2)
    with pytest.raises(ConfigError, match="degenerate"):
        mssim.IonChainConfig(n=2, mode_freqs=TWO_PI * np.array([2e6, 2e6 + 0.5]),
                             eigenvectors=good_vecs, lamb_dicke=np.eye(2))
    with pytest.raises(ConfigError, match="orthonormal"):
        mssim.IonChainConfig(n=2, mode_freqs=freqs,
                             eigenvectors=np.array([[1.0, 1.0], [0.0, 1.0]]),
                             lamb_dicke=np.eye(2))
    with pytest.raises(ConfigError, match="positive"):
        mssim.IonChainConfig(n=2, mode_freqs=np.array([-1.0, 1.0]),
                             eigenvectors=good_vecs, lamb_dicke=np.eye(2))
    chain = mssim.IonChainConfig(n=2, mode_freqs=freqs, eigenvectors=good_vecs,
                                 lamb_dicke=0.1 * np.eye(2))
    pulse = mssim.MSPulse(mu=freqs[0] - TWO_PI * 8e3, rabi=np.ones(2),
                          duration=1.0, target_mode=1)
    with pytest.raises(ConfigError, match="closer"):
        pulse.validate_against(chain)


def test_six_ion_couplings_match_explicit_sum(chain6, pulse6):
    # Recompute every pair with explicit loops over modes.
    pulse = mssim.MSPulse(mu=pulse6.mu, rabi=np.full(6, TWO_PI * 2.7e4),
                          duration=1.0, target_mode=3)
    J = mssim.ising_couplings(chain6, pulse)
    for i in range(6):
        for j in range(6):
            ref = 0.0
            if i != j:
                for m in range(6):
                    ref += (pulse.rabi[i] * pulse.rabi[j]
                            * chain6.lamb_dicke[i, m] * chain6.lamb_dicke[j, m]
                            * chain6.mode_freqs[m]
                            / (pulse.mu**2 - chain6.mode_freqs[m]**2))
            assert J[i, j] == pytest.approx(ref, rel=1e-12, abs=1e-15)
