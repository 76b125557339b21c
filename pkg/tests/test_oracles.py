import numpy as np
import pytest

from qmaxent.operators import PAULI, expectation, random_density_matrix, random_hermitian, von_neumann_entropy
from qmaxent.oracles import classical_maxent, hermitian_null_space, primal_maxent


def test_classical_single_constraint_closed_form():
    # two outcomes: p = ((1 + a)/2, (1 - a)/2)
    p, s = classical_maxent([[1.0, -1.0]], [0.2])
    assert np.allclose(p, [0.6, 0.4], atol=1e-12)
    q = np.array([0.6, 0.4])
    assert s == pytest.approx(-np.sum(q * np.log2(q)))


def test_classical_boundary_value():
    p, s = classical_maxent([[1.0, 1.0, -1.0]], [1.0])
    assert np.allclose(p, [0.5, 0.5, 0]) and s == pytest.approx(1)


def test_classical_several_constraints_match_exponential_family(rng):
    values = rng.standard_normal((2, 5))
    lam = rng.standard_normal(2)
    p = np.exp(lam @ values)
    p /= p.sum()
    q, _ = classical_maxent(values, values @ p)
    assert np.allclose(q, p, atol=1e-6)


def test_null_space_is_orthogonal_to_constraints(rng):
    F = [random_hermitian(3, rng) for _ in range(2)]
    null = hermitian_null_space(F, 3)
    assert len(null) == 9 - 1 - 2
    for n in null:
        assert abs(np.trace(n)) < 1e-12
        assert all(abs(np.trace(n @ f)) < 1e-10 for f in F)


def test_primal_matches_known_gibbs_state():
    z = PAULI["Z"]
    rho = np.diag([0.7, 0.3]).astype(complex)
    seed = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
    out, s = primal_maxent([z], [expectation(rho, z)], seed)
    assert np.allclose(out, rho, atol=1e-6)
    assert s == pytest.approx(von_neumann_entropy(rho), abs=1e-9)


def test_primal_rejects_large_or_singular_seeds(rng):
    with pytest.raises(ValueError):
        primal_maxent([np.eye(7)], [1.0], np.eye(7) / 7)
    with pytest.raises(ValueError):
        primal_maxent([PAULI["X"]], [0.0], np.diag([1.0, 0.0]))


def test_primal_never_decreases_entropy(rng):
    F = [random_hermitian(4, rng) for _ in range(3)]
    rho = random_density_matrix(4, rng)
    _, s = primal_maxent(F, [expectation(rho, f) for f in F], rho, restarts=2, rng=rng)
    assert s >= von_neumann_entropy(rho) - 1e-12
