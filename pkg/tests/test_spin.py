import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmaxent import catalog
from qmaxent.operators import random_pure_state
from qmaxent.spin import (
    DuplicateSite,
    IsingParams,
    NoConvergence,
    PauliParseError,
    PauliString,
    PauliSumHamiltonian,
    apply,
    build_ising,
    global_flip,
    ground_space_dense,
    ground_state_lanczos,
    parse_pauli_string,
)

paulis = st.sampled_from(["X", "Y", "Z"])


@st.composite
def pauli_sums(draw):
    n = draw(st.integers(1, 5))
    terms = []
    for _ in range(draw(st.integers(1, 6))):
        sites = draw(st.lists(st.integers(0, n - 1), unique=True, max_size=n))
        coeff = draw(st.floats(-2, 2, allow_nan=False))
        terms.append(PauliString.of(coeff, {s: draw(paulis) for s in sites}))
    return PauliSumHamiltonian(n, terms)


def dense_reference(h: PauliSumHamiltonian) -> np.ndarray:
    out = np.zeros((h.dim, h.dim), dtype=complex)
    for t in h.terms:
        factors = dict(t.factors)
        names = "".join(factors.get(s, "I") for s in range(h.n_sites))
        out += t.coefficient * catalog_kron(names)
    return out


def catalog_kron(names: str) -> np.ndarray:
    from qmaxent.operators import PAULI

    m = np.eye(1, dtype=complex)
    for c in names:
        m = np.kron(m, PAULI[c])
    return m


@settings(max_examples=60)
@given(pauli_sums(), st.integers(0, 2**32 - 1))
def test_matvec_matches_kronecker_products(h, seed):
    ref = dense_reference(h)
    assert np.allclose(h.to_dense(), ref, atol=1e-12)
    v = random_pure_state(h.dim, np.random.default_rng(seed))
    assert np.allclose(apply(h, v), ref @ v, atol=1e-12)


def test_ising_terms_and_sign():
    h = build_ising(IsingParams(3, J=2.0, lambda_x=0.5))
    dense = h.to_dense()
    zz = catalog.pauli_on("Z", [0, 1], 3) + catalog.pauli_on("Z", [1, 2], 3)
    xs = sum(catalog.pauli_on("X", [i], 3) for i in range(3))
    assert np.allclose(dense, -2.0 * (zz + 0.5 * xs))
    periodic = build_ising(IsingParams(4, boundary="periodic"))
    assert len(periodic.terms) == 4
    assert build_ising(IsingParams(2, boundary="periodic")).terms.__len__() == 1


@pytest.mark.parametrize("kwargs", [dict(n=1), dict(n=3, J=0.0), dict(n=3, boundary="twisted")])
def test_ising_params_validation(kwargs):
    with pytest.raises(ValueError):
        IsingParams(**kwargs)


@pytest.mark.parametrize("n,lam,boundary", [(6, 0.5, "open"), (8, 1.0, "periodic"), (10, 2.0, "open"), (8, 0.3, "periodic")])
def test_lanczos_matches_dense(n, lam, boundary):
    h = build_ising(IsingParams(n, lambda_x=lam, boundary=boundary))
    w, v = np.linalg.eigh(h.to_dense())
    e, psi = ground_state_lanczos(h, sector=1)
    assert e == pytest.approx(w[0], abs=1e-9)
    assert abs(np.vdot(v[:, 0], psi)) == pytest.approx(1, abs=1e-8)
    assert np.linalg.norm(h.apply(psi) - e * psi) < 1e-8 * h.scale()


def test_lanczos_with_longitudinal_field_and_complex_terms():
    h = build_ising(IsingParams(6, lambda_x=0.7, lambda_z=0.3))
    w = np.linalg.eigvalsh(h.to_dense())
    assert ground_state_lanczos(h)[0] == pytest.approx(w[0], abs=1e-9)
    hy = parse_pauli_string("1 Y0 Z1\n0.5 X1 Y2\n-1 Z0")
    assert not hy.is_real
    assert ground_state_lanczos(hy)[0] == pytest.approx(np.linalg.eigvalsh(hy.to_dense())[0], abs=1e-9)


def test_lanczos_is_deterministic_for_a_seed():
    h = build_ising(IsingParams(8, lambda_x=0.9, boundary="periodic"))
    a = ground_state_lanczos(h, seed=5, sector=1)[1]
    b = ground_state_lanczos(h, seed=5, sector=1)[1]
    assert np.array_equal(a, b)


def test_lanczos_budget_exhausted():
    h = build_ising(IsingParams(10, lambda_x=1.0))
    with pytest.raises(NoConvergence):
        ground_state_lanczos(h, tol=1e-15, max_iter=3, krylov=2)


def test_even_sector_selects_cat_state():
    h = build_ising(IsingParams(6, lambda_x=0.05))
    _, psi = ground_state_lanczos(h, sector=1)
    assert np.allclose(global_flip(psi, 6), psi, atol=1e-10)
    assert abs(psi[0]) == pytest.approx(abs(psi[-1]))


def test_ground_space_dense_degeneracy():
    gs = ground_space_dense(build_ising(IsingParams(3)))
    assert gs.m == 2 and gs.degeneracy == 2
    assert np.allclose(np.diag(gs.projector()).real, [1, 0, 0, 0, 0, 0, 0, 1])
    assert gs.matrix().shape == (8, 2)
    assert ground_space_dense(build_ising(IsingParams(3, lambda_x=0.5))).m == 1


def test_parse_pauli_text():
    h = parse_pauli_string("# chain\n-1 Z0 Z1   # bond\n\n0.5 X2\n", n_sites=4)
    assert h.n_sites == 4 and len(h.terms) == 2
    assert str(h).splitlines()[0] == "-1 Z0 Z1"
    assert parse_pauli_string("2").terms[0].factors == ()


@pytest.mark.parametrize("text,exc", [("x Z0", PauliParseError), ("1 Q0", PauliParseError), ("1 Z0 X0", DuplicateSite), ("1 Z5", PauliParseError), ("inf Z0", PauliParseError)])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_pauli_string(text, n_sites=3 if "Z5" in text else None)


def test_parse_error_reports_line():
    with pytest.raises(PauliParseError) as info:
        parse_pauli_string("1 Z0\n1 W1")
    assert info.value.line == 2


def test_term_validation():
    with pytest.raises(ValueError):
        PauliSumHamiltonian(2, [PauliString.of(1.0, {2: "Z"})])
    with pytest.raises(ValueError):
        PauliString.of(float("nan"), {0: "Z"})
    with pytest.raises(ValueError):
        PauliString.of(1.0, {0: "I"})
    with pytest.raises(ValueError):
        global_flip(np.ones(3), 2)
