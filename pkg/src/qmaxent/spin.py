"""Qubit Hamiltonians written as sums of Pauli strings.

Basis index convention matches :mod:`qmaxent.operators`: site ``j`` is bit
``n-1-j`` of the computational-basis index.  Matrix-free application groups
the terms by their bit-flip mask, so one matvec costs one gather per mask.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .config import DEFAULT_SEED, TOL

__all__ = [
    "PauliString",
    "PauliSumHamiltonian",
    "IsingParams",
    "GroundSpace",
    "NoConvergence",
    "PauliParseError",
    "DuplicateSite",
    "build_ising",
    "apply",
    "ground_state_lanczos",
    "ground_space_dense",
    "parse_pauli_string",
    "global_flip",
]

MAX_STATE_SITES = 24
MAX_DENSE_SITES = 14


class NoConvergence(RuntimeError):
    pass


class PauliParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DuplicateSite(PauliParseError):
    pass


@dataclass(frozen=True)
class PauliString:
    """``coefficient * prod_s P_s`` with ``P_s`` in {X, Y, Z}; sites absent from ``factors`` carry identity."""

    coefficient: float
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError("Pauli coefficient must be finite")
        items = tuple(sorted(dict(self.factors).items()))
        if len(items) != len(self.factors):
            raise DuplicateSite(f"repeated site in {self.factors}")
        for site, op in items:
            if op not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli factor {op!r}")
            if site < 0:
                raise ValueError(f"negative site index {site}")
        object.__setattr__(self, "factors", items)

    @classmethod
    def of(cls, coefficient: float, factors: Mapping[int, str] | None = None) -> "PauliString":
        return cls(float(coefficient), tuple((factors or {}).items()))

    def masks(self, n: int) -> tuple[int, int, int]:
        """``(flip_mask, phase_mask, y_count)`` for an ``n``-site register."""
        flip = phase = 0
        ny = 0
        for site, op in self.factors:
            bit = 1 << (n - 1 - site)
            if op in ("X", "Y"):
                flip |= bit
            if op in ("Z", "Y"):
                phase |= bit
            ny += op == "Y"
        return flip, phase, ny

    def __str__(self) -> str:
        body = " ".join(f"{op}{site}" for site, op in self.factors)
        return f"{self.coefficient:g} {body}".strip()


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    shift = 32
    while shift:
        x ^= x >> shift
        shift //= 2
    return x & 1


@dataclass
class PauliSumHamiltonian:
    n_sites: int
    terms: list[PauliString] = field(default_factory=list)

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("need at least one site")
        for t in self.terms:
            for site, _ in t.factors:
                if site >= self.n_sites:
                    raise ValueError(f"term {t} acts outside {self.n_sites} sites")
        self._cache = None

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def is_real(self) -> bool:
        return all(t.masks(self.n_sites)[2] % 2 == 0 for t in self.terms)

    def scale(self) -> float:
        """Upper bound on the spectral radius (sum of absolute coefficients)."""
        return float(sum(abs(t.coefficient) for t in self.terms)) or 1.0

    def _groups(self):
        if self._cache is None:
            n = self.n_sites
            if n > MAX_STATE_SITES:
                raise ValueError(f"state vectors are limited to {MAX_STATE_SITES} sites")
            idx = np.arange(2**n, dtype=np.int64)
            dtype = float if self.is_real else complex
            groups: dict[int, np.ndarray] = {}
            for t in self.terms:
                flip, phase, ny = t.masks(n)
                sign = 1.0 - 2.0 * _parity(idx & phase)
                # Y = i X Z on each site: the phase is taken on the input bit
                c = t.coefficient * (1j**ny if ny % 2 else (-1) ** (ny // 2))
                g = groups.setdefault(flip, np.zeros(idx.size, dtype=dtype))
                g += np.real_if_close(c * sign) if dtype is float else c * sign
            # store as (flip, coef over output index b, gather index b ^ flip)
            self._cache = [(f, g[idx ^ f], idx ^ f) for f, g in groups.items()]
        return self._cache

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise ValueError(f"vector length {v.shape[0]} does not match 2**{self.n_sites}")
        out = None
        for flip, coef, gather in self._groups():
            contrib = (coef * v.T).T if flip == 0 else (coef * v[gather].T).T
            out = contrib if out is None else out + contrib
        if out is None:
            return np.zeros_like(v)
        return out

    def to_dense(self) -> np.ndarray:
        if self.n_sites > MAX_DENSE_SITES:
            raise ValueError(f"dense matrices are limited to {MAX_DENSE_SITES} sites")
        return self.apply(np.eye(self.dim))

    def __str__(self) -> str:
        return "\n".join(str(t) for t in self.terms)


@dataclass(frozen=True)
class IsingParams:
    n: int
    J: float = 1.0
    lambda_x: float = 0.0
    lambda_z: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Ising chain needs n >= 2")
        if not self.J > 0:
            raise ValueError("coupling J must be positive")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")


def build_ising(params: IsingParams) -> PauliSumHamiltonian:
    """``-J (sum Z_i Z_{i+1} + lambda_x sum X_i + lambda_z sum Z_i)``."""
    n, j = params.n, params.J
    bonds = [(i, i + 1) for i in range(n - 1)]
    if params.boundary == "periodic" and n > 2:
        bonds.append((n - 1, 0))
    terms = [PauliString.of(-j, {a: "Z", b: "Z"}) for a, b in bonds]
    if params.lambda_x:
        terms += [PauliString.of(-j * params.lambda_x, {i: "X"}) for i in range(n)]
    if params.lambda_z:
        terms += [PauliString.of(-j * params.lambda_z, {i: "Z"}) for i in range(n)]
    return PauliSumHamiltonian(n, terms)


def apply(h: PauliSumHamiltonian, v) -> np.ndarray:
    return h.apply(v)


def global_flip(v: np.ndarray, n: int) -> np.ndarray:
    """Apply ``X`` on every site (reverses the basis order)."""
    v = np.asarray(v)
    if v.shape[0] != 2**n:
        raise ValueError(f"vector length {v.shape[0]} does not match 2**{n}")
    return v[::-1]


def _project_sector(v: np.ndarray, sector: int | None) -> np.ndarray:
    if sector is None:
        return v
    return 0.5 * (v + sector * v[::-1])


def ground_state_lanczos(
    h: PauliSumHamiltonian,
    tol: float = TOL.lanczos,
    max_iter: int = 2000,
    seed: int = DEFAULT_SEED,
    sector: int | None = None,
    krylov: int = 120,
):
    """Lowest eigenpair by restarted Lanczos with full reorthogonalization.

    ``sector`` = +1/-1 confines the iteration to the even/odd eigenspace of
    the global spin flip, which must then commute with ``h``.  Convergence
    means ``||Hv - Ev|| < tol * h.scale()``; ``max_iter`` counts matvecs.
    """
    n = h.n_sites
    if n > MAX_STATE_SITES:
        raise ValueError(f"state vectors are limited to {MAX_STATE_SITES} sites")
    rng = np.random.default_rng(seed)
    dtype = float if h.is_real else complex
    v = rng.standard_normal(h.dim)
    if dtype is complex:
        v = v + 1j * rng.standard_normal(h.dim)
    v = _project_sector(v.astype(dtype), sector)
    v /= np.linalg.norm(v)
    target = tol * h.scale()
    used = 0
    while used < max_iter:
        basis = [v]
        alphas, betas = [], []
        w_vec = None
        for _ in range(min(krylov, h.dim, max_iter - used)):
            w_vec = _project_sector(h.apply(basis[-1]), sector)
            used += 1
            a = float(np.real(np.vdot(basis[-1], w_vec)))
            alphas.append(a)
            q = np.array(basis)
            # two passes of classical Gram-Schmidt keep the basis orthonormal to rounding
            for _ in range(2):
                w_vec = w_vec - q.T @ (q.conj() @ w_vec)
            b = float(np.linalg.norm(w_vec))
            t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            evals, evecs = np.linalg.eigh(t)
            if b * abs(evecs[-1, 0]) < 0.1 * target or b < 1e-14 * h.scale():
                break
            betas.append(b)
            basis.append(w_vec / b)
        evals, evecs = np.linalg.eigh(np.diag(alphas) + np.diag(betas[: len(alphas) - 1], 1) + np.diag(betas[: len(alphas) - 1], -1))
        q = np.array(basis[: len(alphas)])
        v = q.T @ evecs[:, 0]
        v /= np.linalg.norm(v)
        hv = h.apply(v)
        used += 1
        energy = float(np.real(np.vdot(v, hv)))
        if np.linalg.norm(hv - energy * v) < target:
            return energy, v
    raise NoConvergence(f"Lanczos did not reach residual {target:.3g} within {max_iter} matvecs")


@dataclass
class GroundSpace:
    energy: float
    basis: list[np.ndarray]

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def degeneracy(self) -> int:
        return self.m

    def matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return np.column_stack(self.basis)

    def projector(self) -> np.ndarray:
        v = self.matrix()
        return v @ v.conj().T


def ground_space_dense(h, degeneracy_tol: float = TOL.degeneracy) -> GroundSpace:
    """All eigenvectors within ``degeneracy_tol * spectral range`` of the minimum.

    Accepts a :class:`PauliSumHamiltonian` or a dense Hermitian matrix.
    """
    if isinstance(h, PauliSumHamiltonian):
        mat = h.to_dense()
    else:
        mat = np.asarray(h)
        if mat.shape[0] > 2**MAX_DENSE_SITES:
            raise ValueError(f"dense matrices are limited to dimension 2**{MAX_DENSE_SITES}")
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    spread = max(w[-1] - w[0], 1e-300)
    m = int(np.sum(w - w[0] <= degeneracy_tol * spread))
    return GroundSpace(energy=float(w[0]), basis=[v[:, j] for j in range(m)])


_TERM = re.compile(r"^([XYZ])(\d+)$")


def parse_pauli_string(text: str, n_sites: int | None = None) -> PauliSumHamiltonian:
    """Parse lines like ``-1.0 Z0 Z1``; ``#`` starts a comment.

    The register size defaults to one more than the largest site mentioned.
    """
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            coeff = float(tokens[0])
        except ValueError:
            raise PauliParseError(f"expected a coefficient, got {tokens[0]!r}", lineno) from None
        factors: dict[int, str] = {}
        for tok in tokens[1:]:
            match = _TERM.match(tok)
            if not match:
                raise PauliParseError(f"malformed Pauli factor {tok!r}", lineno)
            site = int(match.group(2))
            if site in factors:
                raise DuplicateSite(f"site {site} appears twice in one term", lineno)
            factors[site] = match.group(1)
        if not np.isfinite(coeff):
            raise PauliParseError("coefficient must be finite", lineno)
        terms.append(PauliString.of(coeff, factors))
    top = max((s for t in terms for s, _ in t.factors), default=0) + 1
    n = top if n_sites is None else n_sites
    if n < top:
        raise PauliParseError(f"site {top - 1} exceeds register of {n} sites")
    return PauliSumHamiltonian(n, terms)
