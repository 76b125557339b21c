"""Concrete observable sets and states used by the reproduction commands.

The three-level observables are written in a fixed basis ``|0>, |1>, |2>``.
"""

from __future__ import annotations

import numpy as np

from .operators import PAULI, SiteStructure, embed_local, basis_state

QUTRIT_F1 = np.array([[1, 0, 0], [0, 1, 0], [0, 0, -1]], dtype=float)
# couples both |0> and |1> to |2>
QUTRIT_COUPLED = np.array([[1, 0, 1], [0, 1, 1], [1, 1, -1]], dtype=float)
# like QUTRIT_COUPLED but splits |0> from |1> on the diagonal
QUTRIT_SPLIT = np.array([[1, 0, 1], [0, 0, 1], [1, 1, -1]], dtype=float)
QUTRIT_DIAG = np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=float)
# mixes |0> and |1>
QUTRIT_MIX = np.array([[1, 1, 0], [1, 1, 0], [0, 0, -1]], dtype=float)


def degenerate_coupled_pair():
    """Two qutrit observables whose degenerate face collapses to one point."""
    return [QUTRIT_F1, QUTRIT_COUPLED]


def degenerate_split_pair():
    """Two qutrit observables whose degenerate face is a segment."""
    return [QUTRIT_F1, QUTRIT_SPLIT]


def commuting_pair():
    return [QUTRIT_F1, QUTRIT_DIAG]


def qutrit_triple():
    return [QUTRIT_F1, QUTRIT_COUPLED, QUTRIT_SPLIT]


def qutrit_quadruple():
    return [QUTRIT_F1, QUTRIT_COUPLED, QUTRIT_SPLIT, QUTRIT_MIX]


def pauli_on(name: str, sites, n: int) -> np.ndarray:
    """Tensor product of the same Pauli on each listed site."""
    st = SiteStructure(n)
    op = PAULI[name]
    out = np.eye(1, dtype=complex)
    for _ in sites:
        out = np.kron(out, op)
    return embed_local(out, list(sites), st)


def ghz_observables(n: int = 3, normalise: bool = False):
    """``(sum Z_i Z_{i+1}, sum X_i, sum Z_i)`` on an open chain of ``n`` qubits."""
    zz = sum(pauli_on("Z", [i, i + 1], n) for i in range(n - 1))
    xs = sum(pauli_on("X", [i], n) for i in range(n))
    zs = sum(pauli_on("Z", [i], n) for i in range(n))
    if normalise:
        return [zz / (n - 1), xs / n, zs / n]
    return [zz, xs, zs]


# pair term of a frustration-free three-qubit model with a two-fold degenerate ground space
SYMMETRIC_PAIR_TERM = np.array(
    [
        [2 / 9, 0, 0, -4 / 9],
        [0, 2 / 3, 0, 0],
        [0, 0, 2 / 3, 0],
        [-4 / 9, 0, 0, 2 / 9],
    ]
)


def symmetric_chain_hamiltonian() -> np.ndarray:
    st = SiteStructure(3)
    return embed_local(SYMMETRIC_PAIR_TERM, [0, 1], st) + embed_local(SYMMETRIC_PAIR_TERM, [1, 2], st)


def symmetric_chain_ground_states():
    """Orthonormal basis of the ground space of :func:`symmetric_chain_hamiltonian`."""
    psi0 = (2 * basis_state("000") + basis_state("011") + basis_state("110")) / np.sqrt(6)
    psi1 = (2 * basis_state("111") + basis_state("001") + basis_state("100")) / np.sqrt(6)
    return psi0, psi1
