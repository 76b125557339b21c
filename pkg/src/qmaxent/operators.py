"""Dense Hermitian linear algebra on tensor-product Hilbert spaces.

Operators, density matrices and state vectors are plain numpy arrays; the
constructors below validate and normalise them.  Site 0 is always the most
significant tensor factor, so the computational basis index of
``|s_0 s_1 ... s_{n-1}>`` is ``sum_j s_j d**(n-1-j)``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import TOL

__all__ = [
    "NotHermitianError",
    "InvalidStateError",
    "DegenerateTraceWarning",
    "SiteStructure",
    "PAULI",
    "hermitian",
    "density_matrix",
    "pure_state",
    "projector",
    "embed_local",
    "partial_trace",
    "partial_trace_pure",
    "eigh",
    "von_neumann_entropy",
    "entropy_of_spectrum",
    "matrix_exp_hermitian",
    "trace_distance",
    "expectation",
    "fix_global_phase",
    "local_hermitian_basis",
    "to_local_coefficients",
    "from_local_coefficients",
    "operator_to_json",
    "operator_from_json",
    "ghz_state",
    "basis_state",
    "random_density_matrix",
    "random_pure_state",
    "random_hermitian",
    "random_unitary",
]


class NotHermitianError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class DegenerateTraceWarning(UserWarning):
    pass


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class SiteStructure:
    n_sites: int
    local_dim: int = 2

    def __post_init__(self):
        if self.n_sites < 1 or self.local_dim < 1:
            raise ValueError(f"invalid site structure {self}")

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_sites

    def check(self, op: np.ndarray) -> None:
        if op.shape[0] != self.dim:
            raise ValueError(f"operator dimension {op.shape[0]} does not match {self} (dim {self.dim})")

    def sites(self, sites: Iterable[int], allow_empty: bool = True) -> list[int]:
        sites = [int(s) for s in sites]
        if len(set(sites)) != len(sites):
            raise ValueError(f"repeated site index in {sites}")
        bad = [s for s in sites if not 0 <= s < self.n_sites]
        if bad:
            raise ValueError(f"site indices {bad} out of range for {self.n_sites} sites")
        if not allow_empty and not sites:
            raise ValueError("empty site list")
        return sites


def hermitian(a, reject_tol: float = TOL.hermitian_reject) -> np.ndarray:
    """Return ``(a + a^dagger)/2`` after checking ``a`` is Hermitian up to float noise.

    Raises NotHermitianError when the anti-Hermitian part exceeds
    ``reject_tol`` relative to the largest entry.
    """
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > reject_tol * max(scale, 1e-300):
        raise NotHermitianError(f"matrix is not Hermitian (deviation {dev:.3g}, scale {scale:.3g})")
    return (a + a.conj().T) / 2


def density_matrix(a, psd_tol: float = TOL.psd, trace_tol: float = TOL.trace) -> np.ndarray:
    rho = hermitian(a)
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise InvalidStateError(f"trace {tr!r} differs from 1")
    wmin = np.linalg.eigvalsh(rho)[0]
    if wmin < -psd_tol:
        raise InvalidStateError(f"negative eigenvalue {wmin:.3g}")
    return rho


def pure_state(v, norm_tol: float = TOL.norm) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    nrm = np.vdot(v, v).real
    if abs(nrm - 1) > norm_tol:
        raise InvalidStateError(f"squared norm {nrm!r} differs from 1")
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        return np.outer(v, v.conj())
    return v @ v.conj().T


def embed_local(op, sites: Sequence[int], structure: SiteStructure) -> np.ndarray:
    """Return ``op`` acting on ``sites`` (in the given order) tensored with identity elsewhere."""
    sites = structure.sites(sites)
    op = np.asarray(op)
    n, d = structure.n_sites, structure.local_dim
    k = len(sites)
    if op.shape != (d**k, d**k):
        raise ValueError(f"operator shape {op.shape} does not act on {k} sites of dimension {d}")
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(op, np.eye(d ** len(rest), dtype=op.dtype)).reshape((d,) * (2 * n))
    inv = np.argsort(sites + rest)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(d**n, d**n)


def partial_trace(rho, keep: Iterable[int], structure: SiteStructure) -> np.ndarray:
    """Reduced operator on ``keep`` (sorted ascending); the rest is traced out."""
    rho = np.asarray(rho)
    structure.check(rho)
    keep = sorted(structure.sites(keep))
    n, d = structure.n_sites, structure.local_dim
    if not keep:
        warnings.warn("partial trace over all sites leaves a 1x1 matrix", DegenerateTraceWarning, stacklevel=2)
        return np.array([[np.trace(rho)]])
    rest = [s for s in range(n) if s not in keep]
    dk, dr = d ** len(keep), d ** len(rest)
    t = rho.reshape((d,) * (2 * n))
    t = t.transpose(keep + rest + [n + s for s in keep] + [n + s for s in rest])
    return np.einsum("ajbj->ab", t.reshape(dk, dr, dk, dr))


def partial_trace_pure(psi, keep: Iterable[int], structure: SiteStructure) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` on ``keep`` without forming ``|psi><psi|``."""
    psi = np.asarray(psi)
    if psi.shape != (structure.dim,):
        raise ValueError(f"state length {psi.shape} does not match {structure}")
    keep = sorted(structure.sites(keep))
    n, d = structure.n_sites, structure.local_dim
    rest = [s for s in range(n) if s not in keep]
    m = psi.reshape((d,) * n).transpose(keep + rest).reshape(d ** len(keep), d ** len(rest))
    return m @ m.conj().T


def eigh(op, check: bool = True):
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian matrix."""
    if check:
        op = hermitian(op)
    return np.linalg.eigh(op)


def entropy_of_spectrum(p, base: float = 2, floor: float = TOL.eig_floor) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > floor]
    if p.size == 0:
        return 0.0
    return float(max(-np.sum(p * np.log(p)) / np.log(base), 0.0))


def von_neumann_entropy(rho, base: float = 2) -> float:
    """``-tr rho log rho`` in units of ``log(base)``; bits by default."""
    return entropy_of_spectrum(np.linalg.eigvalsh(np.asarray(rho)), base=base)


def matrix_exp_hermitian(op) -> np.ndarray:
    w, v = eigh(op)
    return (v * np.exp(w)) @ v.conj().T


def trace_distance(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    diff = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def expectation(rho, op) -> float:
    rho, op = np.asarray(rho), np.asarray(op)
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {op.shape}")
    return float(np.einsum("ij,ji->", rho, op).real)


def fix_global_phase(v) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude amplitude is real and positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    return v * (abs(v[k]) / v[k])


# --- trace-orthonormal local operator bases -------------------------------


def local_hermitian_basis(d: int) -> np.ndarray:
    """Trace-orthonormal Hermitian basis of ``d x d`` matrices, identity first.

    For qubits this is ``(I, X, Y, Z)/sqrt(2)``; otherwise the identity is
    followed by the generalised Gell-Mann matrices.
    """
    if d == 2:
        return np.stack([PAULI[p] for p in "IXYZ"]) / np.sqrt(2)
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            basis.append(e)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return np.stack(basis)


def _site_transform(d: int):
    basis = local_hermitian_basis(d)
    # coefficient a of vec(op) with vec index (o, i): tr(op E_a) = sum op[o,i] E_a[i,o]
    fwd = basis.transpose(0, 2, 1).reshape(d * d, d * d)
    inv = basis.reshape(d * d, d * d).T
    return fwd, inv


def _per_site(t: np.ndarray, k: int, d: int, mat: np.ndarray) -> np.ndarray:
    t = t.reshape((d,) * (2 * k))
    t = t.transpose([x for j in range(k) for x in (j, k + j)]).reshape((d * d,) * k)
    for j in range(k):
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [j])), 0, j)
    return t


def to_local_coefficients(op, k: int, d: int) -> np.ndarray:
    """Coefficients ``tr(op E_a1 x ... x E_ak)`` as a real tensor of shape ``(d*d,)*k``."""
    fwd, _ = _site_transform(d)
    return _per_site(np.asarray(op, dtype=complex), k, d, fwd).real


def from_local_coefficients(coeffs, k: int, d: int) -> np.ndarray:
    """Inverse of :func:`to_local_coefficients`."""
    _, inv = _site_transform(d)
    t = np.asarray(coeffs, dtype=complex).reshape((d * d,) * k)
    for j in range(k):
        t = np.moveaxis(np.tensordot(inv, t, axes=([1], [j])), 0, j)
    t = t.reshape((d,) * (2 * k))
    order = [2 * j for j in range(k)] + [2 * j + 1 for j in range(k)]
    return t.transpose(order).reshape(d**k, d**k)


# --- serialisation ---------------------------------------------------------


def operator_to_json(op) -> dict:
    op = np.asarray(op)
    return {"dim": int(op.shape[0]), "re": op.real.tolist(), "im": np.imag(op).tolist()}


def operator_from_json(obj: dict | str) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    op = re + 1j * im
    if op.shape != (obj["dim"], obj["dim"]):
        raise ValueError(f"declared dim {obj['dim']} does not match entries of shape {op.shape}")
    return op


# --- common states and random ensembles ------------------------------------


def basis_state(bits: str | Sequence[int], d: int = 2) -> np.ndarray:
    digits = [int(b) for b in bits]
    v = np.zeros(d ** len(digits), dtype=complex)
    v[int(np.ravel_multi_index(digits, (d,) * len(digits)))] = 1
    return v


def ghz_state(n: int, sign: int = 1) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1 / np.sqrt(2)
    v[-1] = sign / np.sqrt(2)
    return v


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    g = rng.standard_normal((d, d))
    if not real:
        g = g + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2
