import json
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmaxent.operators import (
    PAULI,
    DegenerateTraceWarning,
    InvalidStateError,
    NotHermitianError,
    SiteStructure,
    basis_state,
    density_matrix,
    embed_local,
    entropy_of_spectrum,
    expectation,
    fix_global_phase,
    from_local_coefficients,
    ghz_state,
    hermitian,
    local_hermitian_basis,
    matrix_exp_hermitian,
    operator_from_json,
    operator_to_json,
    partial_trace,
    partial_trace_pure,
    projector,
    pure_state,
    random_density_matrix,
    random_hermitian,
    random_pure_state,
    random_unitary,
    to_local_coefficients,
    trace_distance,
    von_neumann_entropy,
)

seeds = st.integers(0, 2**32 - 1)


def test_hermitian_symmetrises_noise():
    a = np.array([[1, 2 + 1e-13], [2, 3]], dtype=complex)
    h = hermitian(a)
    assert np.allclose(h, h.conj().T, atol=0)


def test_hermitian_rejects_asymmetric():
    with pytest.raises(NotHermitianError):
        hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitianError):
        hermitian(np.zeros((2, 3)))


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError):
        density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidStateError):
        density_matrix(np.diag([1.5, -0.5]))
    rho = density_matrix(np.eye(2) / 2)
    assert np.trace(rho) == pytest.approx(1)


def test_pure_state_norm():
    with pytest.raises(InvalidStateError):
        pure_state([1, 1])
    assert pure_state([0, 1]).dtype == complex


def test_site_structure_errors():
    s = SiteStructure(3)
    with pytest.raises(ValueError):
        s.sites([0, 0])
    with pytest.raises(ValueError):
        s.sites([3])
    with pytest.raises(ValueError):
        SiteStructure(0)
    with pytest.raises(ValueError):
        s.check(np.eye(4))


def test_site_zero_is_most_significant():
    s = SiteStructure(3)
    z0 = embed_local(PAULI["Z"], [0], s)
    assert np.allclose(np.diag(z0).real, [1, 1, 1, 1, -1, -1, -1, -1])
    assert np.argmax(np.abs(basis_state("100"))) == 4


def test_embed_respects_site_order():
    s = SiteStructure(3)
    op = np.kron(PAULI["X"], PAULI["Z"])
    a = embed_local(op, [2, 0], s)
    b = embed_local(np.kron(PAULI["Z"], PAULI["X"]), [0, 2], s)
    assert np.allclose(a, b)
    expected = np.kron(np.kron(PAULI["Z"], np.eye(2)), PAULI["X"])
    assert np.allclose(a, expected)


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b = random_density_matrix(2, rng), random_density_matrix(4, rng)
    rho = np.kron(a, b)
    s = SiteStructure(3)
    assert np.allclose(partial_trace(rho, [0], s), a)
    assert np.allclose(partial_trace(rho, [1, 2], s), b)


def test_partial_trace_all_sites_warns():
    s = SiteStructure(2)
    with pytest.warns(DegenerateTraceWarning):
        out = partial_trace(np.eye(4) / 4, [], s)
    assert out.shape == (1, 1)


@given(seeds, st.integers(2, 4))
def test_partial_trace_composes(seed, n):
    rng = np.random.default_rng(seed)
    s = SiteStructure(n)
    rho = random_density_matrix(2**n, rng)
    keep = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
    inner = keep[: max(1, len(keep) - 1)]
    once = partial_trace(rho, inner, s)
    red = partial_trace(rho, keep, s)
    twice = partial_trace(red, [keep.index(k) for k in inner], SiteStructure(len(keep)))
    assert np.allclose(once, twice, atol=1e-12)
    assert np.trace(red).real == pytest.approx(1)


@given(seeds, st.integers(2, 5))
def test_partial_trace_pure_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    psi = random_pure_state(2**n, rng)
    s = SiteStructure(n)
    keep = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
    assert np.allclose(partial_trace_pure(psi, keep, s), partial_trace(projector(psi), keep, s), atol=1e-12)


@given(seeds, st.integers(2, 16))
def test_entropy_bounds(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
    s = von_neumann_entropy(rho)
    assert -1e-12 <= s <= np.log2(d) + 1e-9


def test_entropy_reference_values():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2)
    assert von_neumann_entropy(projector(ghz_state(3))) == pytest.approx(0, abs=1e-12)
    assert entropy_of_spectrum([0.5, 0.5], base=np.e) == pytest.approx(np.log(2))
    assert entropy_of_spectrum([]) == 0.0


@given(seeds, st.integers(2, 6))
def test_trace_distance_is_metric(seed, d):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density_matrix(d, rng) for _ in range(3))
    dab = trace_distance(a, b)
    assert 0 <= dab <= 1 + 1e-12
    assert dab == pytest.approx(trace_distance(b, a))
    assert trace_distance(a, c) <= dab + trace_distance(b, c) + 1e-12
    assert trace_distance(a, a) == pytest.approx(0, abs=1e-12)


def test_trace_distance_orthogonal_states():
    assert trace_distance(projector(basis_state("0")), projector(basis_state("1"))) == pytest.approx(1)
    with pytest.raises(ValueError):
        trace_distance(np.eye(2), np.eye(3))


@given(seeds, st.integers(1, 3), st.sampled_from([2, 3]))
def test_local_coefficients_roundtrip(seed, k, d):
    rng = np.random.default_rng(seed)
    op = random_hermitian(d**k, rng)
    coeffs = to_local_coefficients(op, k, d)
    assert coeffs.shape == (d * d,) * k
    assert np.allclose(from_local_coefficients(coeffs, k, d), op, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_local_basis_orthonormal(d):
    basis = local_hermitian_basis(d)
    gram = np.einsum("aij,bji->ab", basis, basis)
    assert np.allclose(gram, np.eye(d * d), atol=1e-12)
    assert np.allclose(basis[0], np.eye(d) / np.sqrt(d))
    assert all(np.allclose(b, b.conj().T) for b in basis)


def test_local_coefficients_of_pauli():
    coeffs = to_local_coefficients(np.kron(PAULI["X"], PAULI["Z"]), 2, 2)
    expected = np.zeros((4, 4))
    expected[1, 3] = 2.0
    assert np.allclose(coeffs, expected)


def test_json_roundtrip():
    rng = np.random.default_rng(3)
    h = random_hermitian(3, rng)
    text = json.dumps(operator_to_json(h))
    assert np.array_equal(operator_from_json(text), h)
    with pytest.raises(ValueError):
        operator_from_json({"dim": 3, "re": [[1, 0], [0, 1]]})


def test_matrix_exp_and_expectation():
    z = PAULI["Z"]
    assert np.allclose(matrix_exp_hermitian(z), np.diag([np.e, 1 / np.e]))
    assert expectation(projector(basis_state("1")), z) == pytest.approx(-1)
    with pytest.raises(ValueError):
        expectation(np.eye(2), np.eye(3))


def test_fix_global_phase():
    v = np.exp(1j * 0.7) * np.array([0.6, 0.8j])
    w = fix_global_phase(v)
    k = np.argmax(np.abs(w))
    assert w[k].imag == pytest.approx(0) and w[k].real > 0
    assert np.allclose(projector(v), projector(w))


def test_random_ensembles(rng):
    u = random_unitary(5, rng)
    assert np.allclose(u.conj().T @ u, np.eye(5))
    rho = random_density_matrix(4, rng, rank=2)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 2
    assert np.allclose(random_hermitian(3, rng, real=True).imag, 0)


def test_ghz_state_sign():
    minus = ghz_state(2, sign=-1)
    assert np.allclose(minus, [1 / np.sqrt(2), 0, 0, -1 / np.sqrt(2)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pure_state(ghz_state(5))
