import math

import numpy as np
import pytest
from hypothesis import given

from bellbound.quantum import (OUTCOMES, Direction, InvalidDirectionError, Outcome, SingletState,
                               pauli_operator, quantum_anticorrelation, singlet_cell_probabilities,
                               singlet_expectation, singlet_probability)

from conftest import random_directions, unit_vectors

Z = Direction(0.0, 0.0, 1.0)
X = Direction(1.0, 0.0, 0.0)


def test_pauli_z_and_x():
    np.testing.assert_array_equal(pauli_operator(Z).matrix, [[1, 0], [0, -1]])
    np.testing.assert_array_equal(pauli_operator(X).matrix, [[0, 1], [1, 0]])


def test_direction_rejects_non_unit():
    with pytest.raises(InvalidDirectionError):
        Direction(1.0, 1.0, 0.0)
    with pytest.raises(InvalidDirectionError):
        Direction(1.0 + 1e-8, 0.0, 0.0)


def test_direction_renormalizes_within_tolerance():
    d = Direction(1.0 + 5e-10, 0.0, 0.0)
    assert d.x == 1.0


def test_outcome_values_restricted():
    with pytest.raises(ValueError):
        Outcome(0, 1)


def test_singlet_state_canonical():
    s = SingletState.canonical()
    assert s.norm == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(s.amplitudes, [0, 1 / math.sqrt(2), -1 / math.sqrt(2), 0])


def test_singlet_expectation_examples():
    assert singlet_expectation(Z, Z) == pytest.approx(-1.0, abs=1e-12)
    assert singlet_expectation(Z, X) == pytest.approx(0.0, abs=1e-12)


def test_singlet_expectation_matches_dot_on_random_pairs():
    rng = np.random.default_rng(11)
    a_list, b_list = random_directions(rng, 100), random_directions(rng, 100)
    for a, b in zip(a_list, b_list):
        assert abs(singlet_expectation(a, b) + a.dot(b)) <= 1e-12


def test_singlet_probability_examples():
    assert singlet_probability(Z, Z, Outcome(1, 1)) == 0.0
    for o in OUTCOMES:
        assert singlet_probability(Z, X, o) == 0.25


@given(unit_vectors)
def test_pauli_eigen_structure(a):
    op = pauli_operator(a)
    assert op.is_hermitian()
    assert abs(op.trace) <= 1e-12
    assert abs(op.determinant + 1) <= 1e-12
    np.testing.assert_allclose(op.matrix @ op.matrix, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(op.matrix)), [-1, 1], atol=1e-12)


@given(unit_vectors, unit_vectors)
def test_probability_invariants(a, b):
    p = [singlet_probability(a, b, o) for o in OUTCOMES]
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert all(-1e-15 <= x <= 0.5 + 1e-15 for x in p)
    corr = sum(o.epsilon * o.eta * singlet_probability(a, b, o) for o in OUTCOMES)
    assert abs(corr + a.dot(b)) <= 1e-12
    assert abs(singlet_expectation(a, b) - corr) <= 1e-12


@given(unit_vectors, unit_vectors)
def test_angle_to_consistent_with_dot(a, b):
    t = a.angle_to(b)
    assert 0.0 <= t <= math.pi
    assert math.cos(t) == pytest.approx(a.dot(b), abs=1e-12)


def test_cell_probabilities_match_pointwise():
    theta = np.array([0.0, 0.3, math.pi / 2, 2.0, math.pi])
    table = singlet_cell_probabilities(theta)
    for t, row in zip(theta, table):
        b = Direction.on_great_circle(t)
        expected = [singlet_probability(X, b, o) for o in OUTCOMES]
        np.testing.assert_allclose(row, expected, atol=1e-15)


def test_quantum_anticorrelation():
    assert quantum_anticorrelation(0.0) == 1.0
    assert quantum_anticorrelation(math.pi) == -1.0
    assert quantum_anticorrelation(math.pi / 2) == pytest.approx(0.0, abs=1e-16)


def test_great_circle_custom_plane():
    base = Direction(0.0, 1.0, 0.0)
    normal = Direction(1.0, 0.0, 0.0)
    for t in np.linspace(0, 2 * math.pi, 7):
        d = Direction.on_great_circle(t, base, normal)
        assert d.dot(base) == pytest.approx(math.cos(t), abs=1e-12)
        assert abs(d.dot(normal)) <= 1e-12
