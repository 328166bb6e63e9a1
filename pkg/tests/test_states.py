import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from intertwine.machines import MachineParams, machine_rho, machine_rho_tilde
from intertwine.states import (
    BlochDirection,
    DensityMatrix,
    PureState,
    block_generator,
    product,
    qubit_from_bloch,
    sample_bloch_angles,
    sample_bloch_uniform,
    sample_haar_amplitudes,
    sample_pure_haar,
    spin_flip,
    tilde_two_qubit,
)

from conftest import random_density, random_state

directions = st.builds(
    BlochDirection,
    st.floats(0, math.pi, allow_nan=False),
    st.floats(0, 2 * math.pi, exclude_max=True, allow_nan=False),
)


def test_bloch_poles_and_equator():
    np.testing.assert_allclose(qubit_from_bloch(BlochDirection(0, 0)).amplitudes, [1, 0], atol=1e-16)
    np.testing.assert_allclose(qubit_from_bloch(BlochDirection(math.pi, 0)).amplitudes, [0, 1], atol=1e-16)
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(qubit_from_bloch(BlochDirection(math.pi / 2, 0)).amplitudes, [s, s], atol=1e-16)


def test_bloch_phase_convention():
    amps = qubit_from_bloch(BlochDirection(1.0, 2.0)).amplitudes
    np.testing.assert_allclose(amps, [math.cos(0.5) * np.exp(-1j), math.sin(0.5) * np.exp(1j)], atol=1e-16)


@pytest.mark.parametrize("theta, phi", [(-0.1, 0.0), (3.2, 0.0), (1.0, -0.5), (1.0, 7.0)])
def test_bloch_out_of_range(theta, phi):
    with pytest.raises(ValueError):
        BlochDirection(theta, phi)


def test_bloch_rounding_is_clamped():
    d = BlochDirection(3.1415927, 0.0)
    assert d.theta == math.pi


@given(directions)
def test_unit_vector_norm(d):
    assert abs(np.linalg.norm(d.unit_vector()) - 1) <= 1e-12


@given(directions)
def test_antipodes_are_orthogonal(d):
    assert abs(qubit_from_bloch(d).inner(qubit_from_bloch(d.antipode()))) <= 1e-12
    np.testing.assert_allclose(d.antipode().unit_vector(), -d.unit_vector(), atol=1e-12)


def test_pure_state_normalization_policy():
    s = PureState([1.0 + 5e-7, 0.0])
    assert abs(np.linalg.norm(s.amplitudes) - 1) <= 1e-15
    with pytest.raises(ValueError):
        PureState([1.1, 0.0])
    with pytest.raises(ValueError):
        PureState([1, 0, 0], (2, 2))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
    assert DensityMatrix(np.eye(4) / 4, (2, 2)).partial_trace(1).dims == (2,)


def test_spin_flip_examples():
    np.testing.assert_allclose(spin_flip(PureState([1, 0])).amplitudes, [0, 1j], atol=1e-16)
    a, b = 0.6 * np.exp(0.3j), 0.8 * np.exp(-1.1j)
    np.testing.assert_allclose(spin_flip(PureState([a, b])).amplitudes, [-1j * np.conj(b), 1j * np.conj(a)], atol=1e-15)
    with pytest.raises(ValueError):
        spin_flip(PureState([1, 0, 0]))


def test_spin_flip_orthogonal_1000(rng):
    for _ in range(1000):
        psi = random_state(rng, 2)
        flipped = spin_flip(psi)
        assert abs(psi.inner(flipped)) <= 1e-12
        assert abs(np.linalg.norm(flipped.amplitudes) - 1) <= 1e-12


def test_tilde_basis_action():
    np.testing.assert_allclose(tilde_two_qubit(PureState.basis(0, (2, 2))).amplitudes, [0, 0, 0, -1], atol=1e-16)


def test_tilde_involutions(rng):
    for _ in range(50):
        rho = DensityMatrix(random_density(rng, 4), (2, 2))
        np.testing.assert_allclose(tilde_two_qubit(tilde_two_qubit(rho)).matrix, rho.matrix, atol=1e-12)
        psi = PureState(random_state(rng, 4).amplitudes, (2, 2))
        back = tilde_two_qubit(tilde_two_qubit(psi))
        assert abs(abs(psi.inner(back)) - 1) <= 1e-12


def test_tilde_of_machine_rho_matches_closed_form():
    psi, p = PureState([0.6, 0.8]), MachineParams(0.3, 0.2)
    got = tilde_two_qubit(machine_rho(psi, p)).matrix
    assert np.max(np.abs(got - machine_rho_tilde(psi, p))) <= 1e-12


def test_tilde_wrong_dims():
    with pytest.raises(ValueError):
        tilde_two_qubit(PureState.basis(0, (4,)))
    with pytest.raises(ValueError):
        tilde_two_qubit(np.eye(3))


def test_product():
    out = product(PureState([1, 0]), PureState([0, 1]))
    np.testing.assert_array_equal(out.amplitudes, [0, 1, 0, 0])
    assert product(PureState([1, 0]), PureState.basis(0, (3,))).dims == (2, 3)


def test_product_norm_multiplicative(rng):
    a, b = random_state(rng, 3), random_state(rng, 2)
    assert abs(np.linalg.norm(product(a, b).amplitudes) - 1) <= 1e-12


def test_bloch_sampler_moments():
    theta, phi = sample_bloch_angles(block_generator(42), 10**6)
    assert abs(np.mean(np.cos(theta))) <= 0.004
    assert phi.min() >= 0 and phi.max() < 2 * math.pi
    t2, p2 = sample_bloch_angles(block_generator(43), 10**6)
    st_, st2 = np.sin(theta), np.sin(t2)
    dot = st_ * st2 * np.cos(phi - p2) + np.cos(theta) * np.cos(t2)
    assert abs(np.mean(dot)) <= 0.004


def test_sampler_determinism():
    a = [sample_bloch_uniform(block_generator(42)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    x, y = sample_bloch_angles(block_generator(42), 100), sample_bloch_angles(block_generator(42), 100)
    assert x[0].tobytes() == y[0].tobytes() and x[1].tobytes() == y[1].tobytes()
    assert sample_bloch_angles(block_generator(42, 1), 1)[0][0] != x[0][0]


def test_haar_norm_and_dimension():
    rng = block_generator(3)
    for d in (2, 3, 5):
        assert abs(np.linalg.norm(sample_pure_haar(d, rng).amplitudes) - 1) <= 1e-12
    with pytest.raises(ValueError):
        sample_pure_haar(1, rng)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_haar_first_moment(d):
    amps = sample_haar_amplitudes(block_generator(11), 10**5, d)
    w = np.abs(amps[:, 0]) ** 2
    sigma = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - 1 / d) <= 3 * sigma


def test_haar_qubit_matches_bloch_marginal():
    a2_haar = np.abs(sample_haar_amplitudes(block_generator(5), 20000, 2)[:, 0]) ** 2
    theta, _ = sample_bloch_angles(block_generator(6), 20000)
    a2_bloch = np.cos(theta / 2) ** 2
    assert stats.ks_2samp(a2_haar, a2_bloch).pvalue > 1e-3
