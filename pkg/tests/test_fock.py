import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from metalsi import fock
from metalsi.fock import (
    PSDError,
    State,
    SupportError,
    TruncatedSpace,
    annihilation,
    anti_number_op,
    beam_splitter,
    binary_relative_entropy,
    characteristic_function,
    displacement,
    displacement_elements,
    edge_population,
    embed,
    matrix_log,
    matrix_power,
    number_op,
    random_state,
    relative_entropy,
    squeezer,
    thermal_entropy,
    thermal_state,
    thermal_x,
    von_neumann_entropy,
)


def test_ladder_matrix_elements():
    a = annihilation(6)
    for n in range(1, 6):
        assert a[n - 1, n] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 5


def test_commutator_holds_below_the_cutoff():
    n = 10
    a = annihilation(n)
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(comm[:-1, :-1], np.eye(n - 1), atol=1e-14)
    assert comm[-1, -1] == pytest.approx(-(n - 1))


def test_anti_number_op_readings():
    n = 7
    comp = anti_number_op(n)
    trunc = anti_number_op(n, compressed=False)
    np.testing.assert_allclose(np.diag(comp), np.arange(1, n + 1))
    np.testing.assert_allclose(np.diag(trunc)[:-1], np.arange(1, n))
    assert trunc[-1, -1] == 0
    np.testing.assert_allclose(number_op(n), np.diag(np.arange(n)))


def test_space_validation():
    with pytest.raises(ValueError):
        TruncatedSpace(0)
    assert TruncatedSpace(5, 2).total_dim == 25


def test_thermal_state_tail_and_entries():
    x = 0.3
    s = thermal_state(x, 12)
    assert s.tail_mass == pytest.approx(x**12, rel=1e-12)
    np.testing.assert_allclose(np.diag(s.rho).real, (1 - x) * x ** np.arange(12), rtol=1e-14)
    assert thermal_x(1.0) == pytest.approx(np.exp(-1.0))


def test_state_validation():
    with pytest.raises(ValueError):
        State(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(PSDError):
        State(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        State(np.diag([0.4, 0.4]))
    State(np.diag([0.4, 0.4]), tail_mass=0.2)


def test_matrix_functions():
    rho = random_state(6, rank=3, seed=1).rho
    sq = matrix_power(rho, 0.5)
    np.testing.assert_allclose(sq @ sq, rho, atol=1e-12)
    proj = matrix_power(rho, 0.0)
    assert np.trace(proj).real == pytest.approx(3.0)
    with pytest.raises(SupportError):
        matrix_log(rho)
    with pytest.raises(PSDError):
        fock.psd_eigh(np.diag([1.0, -1e-6]))
    full = random_state(5, rank=5, seed=2).rho
    np.testing.assert_allclose(sla.expm(matrix_log(full)), full, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_power_law_is_additive(seed, s, t):
    rho = random_state(5, rank=5, seed=seed).rho
    lhs = matrix_power(rho, s) @ matrix_power(rho, t)
    np.testing.assert_allclose(lhs, matrix_power(rho, s + t), atol=1e-10)


def test_entropies():
    x = 0.45
    tau = thermal_state(x, 120)
    # eigenvalues below the clip floor drop out: their -w log w sums to ~5e-12 here
    assert von_neumann_entropy(tau) == pytest.approx(float(oracles.thermal_entropy(x)), abs=1e-10)
    assert float(thermal_entropy(x)) == pytest.approx(float(oracles.thermal_entropy(x)), rel=1e-14)
    assert float(thermal_entropy(0.5)) == pytest.approx(1.3862944, abs=1e-7)
    pure = np.diag([1.0, 0, 0])
    assert relative_entropy(np.diag([0.5, 0.5, 0]), pure) == np.inf
    assert relative_entropy(pure, np.diag([0.5, 0.25, 0.25])) == pytest.approx(np.log(2))
    assert float(binary_relative_entropy(0.3, 0.3)) == pytest.approx(0.0, abs=1e-16)


def test_relative_entropy_of_thermal_states():
    u, s = 0.2, np.exp(-1.0)
    d = relative_entropy(thermal_state(u, 80).rho, thermal_state(s, 80).rho)
    assert d == pytest.approx(float(oracles.thermal_relative_entropy(u, s)), abs=1e-12)


def test_displacement_elements_against_large_truncation():
    xi = 0.4 - 0.3j
    exact = displacement_elements(xi, 10)
    big = displacement(xi, 80)[:10, :10]
    np.testing.assert_allclose(exact, big, atol=1e-12)


@pytest.mark.parametrize("xi", [0.3, 0.5j, 0.2 + 0.7j])
def test_thermal_characteristic_function(xi):
    x = 0.25
    chi = characteristic_function(thermal_state(x, 60), xi)
    n = x / (1 - x)
    assert chi == pytest.approx(complex(oracles.thermal_char(n, xi)), abs=1e-12)


def test_gaussian_unitaries():
    n = 12
    u = squeezer(0.2, n)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(n), atol=1e-12)
    d2 = displacement([0.1, 0.2j], n, modes=2)
    np.testing.assert_allclose(d2.conj().T @ d2, np.eye(n * n), atol=1e-12)


def test_beam_splitter_mixes_modes_below_total_cutoff():
    n, theta = 8, 0.6
    u = beam_splitter(theta, n)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(n * n), atol=1e-12)
    a = annihilation(n)
    a1, a2 = embed(a, 0, 2, n), embed(a, 1, 2, n)
    lhs = u.conj().T @ a1 @ u
    rhs = np.cos(theta) * a1 + np.sin(theta) * a2
    tot = np.add.outer(np.arange(n), np.arange(n)).ravel()
    keep = np.flatnonzero(tot <= n - 2)
    np.testing.assert_allclose(lhs[np.ix_(keep, keep)], rhs[np.ix_(keep, keep)], atol=1e-12)


def test_random_state_properties():
    s = random_state(10, rank=3, seed=5)
    w = np.linalg.eigvalsh(s.rho)
    assert np.sum(w > 1e-12) == 3
    assert np.trace(s.rho).real == pytest.approx(1.0)
    again = random_state(10, rank=3, seed=5)
    np.testing.assert_array_equal(s.rho, again.rho)
    low = random_state(10, rank=2, seed=5, support=4)
    assert edge_population(low, 6) == 0.0
    two = random_state(5, rank=2, seed=3, support=3, modes=2)
    assert two.rho.shape == (25, 25)
    with pytest.raises(ValueError):
        random_state(4, rank=5, seed=0)


def test_spawned_seeds_are_reproducible():
    assert fock.spawn_seeds(7, 4) == fock.spawn_seeds(7, 4)
    assert len(set(fock.spawn_seeds(7, 4))) == 4
