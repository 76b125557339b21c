import numpy as np
import pytest

from qmaxent import catalog
from qmaxent.discontinuity import (
    NonUniqueGroundState,
    PathSpec,
    check_necessary,
    check_partial_error_detect,
    check_sufficient,
    path_limit_probe,
)
from qmaxent.maxent import solve_maxent
from qmaxent.operators import PAULI, basis_state, projector, trace_distance
from qmaxent.spin import ground_space_dense


def test_path_spec_validation():
    with pytest.raises(ValueError):
        PathSpec.linear([1.0], [1.0], eps_grid=(0.1,))
    with pytest.raises(ValueError):
        PathSpec.linear([1.0], [1.0], eps_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        PathSpec.monomial([1.0, 0.0], [0.0, 1.0], [1.0])
    path = PathSpec.from_json({"h0": [-1, 0], "scale": [0, 1], "power": [1, 2], "grid": [0.1, 0.01]})
    assert np.allclose(path.perturbation(0.1), [0, 0.01])
    assert path.params["power"] == [1.0, 2.0]
    with pytest.raises(ValueError):
        path.hamiltonian(np.array([PAULI["Z"]]), 0.1)


def test_ex1_probe_discontinuous():
    F = catalog.degenerate_coupled_pair()
    rep = path_limit_probe(PathSpec.linear([-1, 0], [0, 1]), F)
    assert rep.verdict == "discontinuous"
    assert rep.gap_entropy_bits == pytest.approx(1, abs=1e-3)
    assert rep.alpha_drift < 1e-3 and rep.cauchy < 1e-4
    assert np.allclose(rep.alpha_limit, [1, 1], atol=1e-6)
    out = rep.to_json()
    assert out["verdict"] == "discontinuous" and out["reference"]["rank"] == 2


def test_ex2_probe_continuous():
    rep = path_limit_probe(PathSpec.linear([-1, 0], [0, 1]), catalog.degenerate_split_pair())
    assert rep.verdict == "continuous"
    assert trace_distance(rep.limit_state, projector(basis_state("1", 3))) < 1e-6


def test_probe_needs_a_gap():
    F = [PAULI["Z"], PAULI["Z"]]
    with pytest.raises(NonUniqueGroundState):
        path_limit_probe(PathSpec.linear([0, 0], [0, 0]), F)


def test_probe_custom_reference_is_used():
    calls = []

    def reference(rho, alpha):
        calls.append(alpha)
        return solve_maxent(catalog.degenerate_coupled_pair(), alpha)

    path_limit_probe(PathSpec.linear([-1, 0], [0, 1]), catalog.degenerate_coupled_pair(), reference=reference)
    assert len(calls) == 1


def test_necessary_ex1_finds_pure_witness():
    F = catalog.degenerate_coupled_pair()
    sol = solve_maxent(F, [1.0, 1.0])
    res = check_necessary(F, sol)
    assert res.status == "satisfied" and res.witness_rank == 1
    assert res.witness_residual < 1e-10
    assert res.to_json()["field"] == "real"


def test_necessary_on_segment_points():
    F = catalog.degenerate_split_pair()
    # the coherence between |0> and |1> is unconstrained, so a pure feasible state exists
    sol = solve_maxent(F, [1.0, 0.4])
    assert check_necessary(F, sol).status == "satisfied"
    pure = solve_maxent(F, [1.0, 0.0])
    assert check_necessary(F, pure).status == "violated"


def test_necessary_violated_when_state_is_pinned():
    F = [PAULI[p] for p in "XYZ"]
    sol = solve_maxent(F, [0.1, 0.2, 0.3])
    res = check_necessary(F, sol)
    assert res.status == "violated" and res.free_directions == 0
    with pytest.raises(ValueError):
        check_necessary(F, sol, field_="quaternion")


def test_ex7_field_dependence():
    F = catalog.qutrit_quadruple()
    sol = solve_maxent(F, [1.0, 1.0, 0.5, 1.0])
    assert check_necessary(F, sol).status == "violated"
    assert check_necessary(F, sol, field_="complex").status == "satisfied"


def test_error_detect_on_ghz_ground_space():
    F = catalog.ghz_observables(3)
    v0 = ground_space_dense(-F[0])
    res = check_partial_error_detect(F, v0)
    assert res.status == "holds" and res.max_commutator < 1e-12
    assert sorted(len(b) for b in res.blocks) == [1, 1]
    assert res.to_json()["status"] == "holds"


def test_error_detect_fails_when_compressions_do_not_commute():
    # ground space span{|0>, |1>} of -Z x I on a qubit pair; X and Z on the second qubit do not commute there
    z1 = np.kron(PAULI["Z"], np.eye(2))
    F = [z1, np.kron(np.eye(2), PAULI["X"]), np.kron(np.eye(2), PAULI["Z"])]
    v0 = ground_space_dense(-z1)
    assert check_partial_error_detect(F, v0).status == "fails"
    with pytest.raises(ValueError):
        check_partial_error_detect(F, basis_state("00"))


def test_sufficient_on_ghz_paths():
    F = catalog.ghz_observables(3)
    x = check_sufficient(F, [-1, 0, 0], PathSpec.linear([-1, 0, 0], [0, 1, 0]))
    assert x.status == "sufficient_holds" and x.degeneracy == 2
    assert x.superposition_distance < 1e-6
    assert x.to_json()["probe"]["verdict"] == "discontinuous"
    z = check_sufficient(F, [-1, 0, 0], PathSpec.linear([-1, 0, 0], [0, 0, 1]))
    assert z.status != "sufficient_holds"


def test_sufficient_needs_degeneracy():
    res = check_sufficient([PAULI["Z"]], [1.0], PathSpec.linear([1.0], [0.1]))
    assert res.status == "not_established" and res.degeneracy == 1
