"""Continuity tests for the maximum-entropy map at boundary points.

Three tools:

* :func:`path_limit_probe` follows unique ground states of ``H_0 + delta(eps)``
  towards ``eps -> 0`` and compares their limit with the max-ent state at the
  limiting expectation values.
* :func:`check_necessary` asks whether any feasible state other than the
  max-ent state exists; without one, no sequence can converge elsewhere.
* :func:`check_sufficient` combines a degenerate ground space, an
  off-diagonal-free basis and an equal-weight path limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import TOL, Tolerances
from .maxent import MaxEntSolution, solve_maxent
from .operators import entropy_of_spectrum, fix_global_phase, trace_distance
from .oracles import hermitian_null_space

__all__ = [
    "PathSpec",
    "DiscontinuityReport",
    "NecessaryResult",
    "ErrorDetectResult",
    "SufficientResult",
    "NonUniqueGroundState",
    "path_limit_probe",
    "check_necessary",
    "check_partial_error_detect",
    "check_sufficient",
    "GAP_THRESHOLD",
    "DRIFT_THRESHOLD",
]

GAP_THRESHOLD = 0.1
DRIFT_THRESHOLD = 0.01
CONTINUITY_THRESHOLD = 0.01
DEFAULT_GRID = tuple(10.0 ** -k for k in range(1, 7))


class NonUniqueGroundState(RuntimeError):
    pass


def _stack(F) -> np.ndarray:
    if hasattr(F, "stack"):
        return F.stack
    return np.asarray([np.asarray(f, dtype=complex) for f in F])


def _images(stack, rho) -> np.ndarray:
    return np.einsum("iab,ba->i", stack, rho).real


@dataclass
class PathSpec:
    """A one-parameter family ``H(eps) = sum_i (base_i + delta_i(eps)) F_i``.

    ``perturbation`` maps ``eps`` to the coefficient offsets ``delta(eps)``.
    """

    base: np.ndarray
    perturbation: Callable[[float], np.ndarray]
    eps_grid: tuple[float, ...] = DEFAULT_GRID
    label: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        grid = tuple(float(e) for e in self.eps_grid)
        if len(grid) < 2:
            raise ValueError("a path needs at least two grid points")
        if any(e <= 0 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
            raise ValueError("eps grid must be positive and strictly decreasing")
        self.eps_grid = grid

    @classmethod
    def monomial(cls, base, scale, power=None, eps_grid=DEFAULT_GRID, label: str = "") -> "PathSpec":
        """``delta_i(eps) = scale_i * eps**power_i`` (power defaults to 1)."""
        scale = np.asarray(scale, dtype=float)
        power = np.ones_like(scale) if power is None else np.asarray(power, dtype=float)
        if scale.shape != power.shape:
            raise ValueError("scale and power must have the same length")
        params = {"h0": list(map(float, np.asarray(base, dtype=float))), "scale": scale.tolist(), "power": power.tolist(), "grid": list(eps_grid)}
        return cls(base, lambda e: scale * e**power, eps_grid, label, params)

    @classmethod
    def linear(cls, base, direction, eps_grid=DEFAULT_GRID, label: str = "") -> "PathSpec":
        return cls.monomial(base, direction, None, eps_grid, label)

    @classmethod
    def from_json(cls, obj: dict) -> "PathSpec":
        grid = tuple(obj.get("grid", DEFAULT_GRID))
        return cls.monomial(obj["h0"], obj["scale"], obj.get("power"), grid, obj.get("label", ""))

    def hamiltonian(self, stack: np.ndarray, eps: float) -> np.ndarray:
        coeffs = self.base + np.asarray(self.perturbation(eps), dtype=float)
        if coeffs.shape != (stack.shape[0],):
            raise ValueError(f"path has {coeffs.size} coefficients for {stack.shape[0]} observables")
        h = np.tensordot(coeffs, stack, axes=1)
        return (h + h.conj().T) / 2


@dataclass
class DiscontinuityReport:
    limit_state: np.ndarray
    limit_vector: np.ndarray
    reference: MaxEntSolution | None
    gap_trace: float
    gap_entropy_bits: float
    alpha_drift: float
    alpha_limit: np.ndarray
    verdict: str
    eps_used: list = field(default_factory=list)
    cauchy: float = float("nan")
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        from .operators import operator_to_json

        return {
            "verdict": self.verdict,
            "gap_trace": self.gap_trace,
            "gap_entropy_bits": self.gap_entropy_bits,
            "alpha_drift": self.alpha_drift,
            "alpha_limit": [float(x) for x in self.alpha_limit],
            "eps_used": self.eps_used,
            "cauchy_distance": self.cauchy,
            "limit_state": operator_to_json(self.limit_state),
            "reference": None if self.reference is None else self.reference.to_json(),
            "notes": list(self.notes),
        }


def _ground_space(h: np.ndarray, tol: float):
    w, v = np.linalg.eigh(h)
    spread = max(w[-1] - w[0], 1e-300)
    m = int(np.sum(w - w[0] <= tol * spread))
    return w, v, m


def _pure(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def path_limit_probe(
    path: PathSpec,
    F,
    reference: Callable[[np.ndarray, np.ndarray], MaxEntSolution] | None = None,
    tol: Tolerances = TOL,
) -> DiscontinuityReport:
    """Limit of the unique ground states along ``path`` versus the max-ent state at the limit.

    Grid points where the ground state is not unique (gap below
    ``tol.unique`` times the spectral range) are dropped.  Each ground state
    is projected onto the ground space of ``H_0`` and the last two are
    extrapolated linearly in ``eps``.  ``reference(limit_rho, alpha_limit)``
    overrides the default ``solve_maxent(F, alpha_limit)``.
    """
    stack = _stack(F)
    h0 = np.tensordot(path.base, stack, axes=1)
    h0 = (h0 + h0.conj().T) / 2
    _, v0_all, m0 = _ground_space(h0, tol.degeneracy)
    v0 = v0_all[:, :m0]
    notes = []
    eps_used, states, raw = [], [], []
    for eps in path.eps_grid:
        w, v, _ = _ground_space(path.hamiltonian(stack, eps), 0.0)
        spread = max(w[-1] - w[0], 1e-300)
        if w[1] - w[0] <= tol.unique * spread:
            notes.append(f"eps={eps:g}: ground state not resolved (gap {w[1] - w[0]:.3g}); dropped")
            continue
        psi = v[:, 0]
        # align the phase with the previous point so differences are meaningful
        if states:
            ov = np.vdot(raw[-1], psi)
            psi = psi * (abs(ov) / ov if abs(ov) > 1e-12 else 1.0)
        else:
            psi = fix_global_phase(psi)
        raw.append(psi)
        proj = v0 @ (v0.conj().T @ psi)
        states.append(proj / np.linalg.norm(proj))
        eps_used.append(eps)
    if len(states) < 2:
        raise NonUniqueGroundState("fewer than two grid points have a unique ground state")
    # linear Richardson steps towards eps = 0, each mapped back onto the ground space of H_0
    extrapolants = []
    for k in range(1, len(states)):
        e1, e2 = eps_used[k - 1], eps_used[k]
        est = states[k] + (states[k] - states[k - 1]) * e2 / (e1 - e2)
        est = v0 @ (v0.conj().T @ est)
        extrapolants.append(fix_global_phase(est / np.linalg.norm(est)))
    lim = extrapolants[-1]
    if len(extrapolants) > 1:
        cauchy = trace_distance(_pure(extrapolants[-2]), _pure(lim))
    else:
        cauchy = trace_distance(_pure(states[-2]), _pure(states[-1]))
    rho_lim = _pure(lim)
    alpha_lim = _images(stack, rho_lim)
    drift = float(np.max(np.abs(_images(stack, _pure(raw[-1])) - alpha_lim)))
    if reference is None:
        ref = solve_maxent(list(stack), alpha_lim, tol=tol)
    else:
        ref = reference(rho_lim, alpha_lim)
    gap_trace = trace_distance(rho_lim, ref.state)
    gap_entropy = ref.entropy_bits - entropy_of_spectrum(np.linalg.eigvalsh(rho_lim))
    if cauchy >= tol.cauchy:
        verdict = "inconclusive"
        notes.append(f"no Cauchy convergence: last two estimates differ by {cauchy:.3g}")
    elif gap_trace > GAP_THRESHOLD and drift < DRIFT_THRESHOLD:
        verdict = "discontinuous"
    elif gap_trace < CONTINUITY_THRESHOLD:
        verdict = "continuous"
    else:
        verdict = "inconclusive"
    return DiscontinuityReport(
        limit_state=rho_lim,
        limit_vector=lim,
        reference=ref,
        gap_trace=float(gap_trace),
        gap_entropy_bits=float(gap_entropy),
        alpha_drift=drift,
        alpha_limit=alpha_lim,
        verdict=verdict,
        eps_used=eps_used,
        cauchy=float(cauchy),
        notes=notes,
    )


# --- necessary condition ------------------------------------------------------


@dataclass
class NecessaryResult:
    status: str
    witness: np.ndarray | None
    witness_residual: float
    witness_rank: int
    field: str
    free_directions: int
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness_residual": self.witness_residual,
            "witness_rank": self.witness_rank,
            "field": self.field,
            "free_directions": self.free_directions,
            "notes": list(self.notes),
        }


def _support_basis(support: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((support + support.conj().T) / 2)
    return v[:, w > 0.5]


def _real_symmetric_null_space(ops: np.ndarray, m: int) -> np.ndarray:
    basis = []
    for j in range(m):
        for k in range(j, m):
            e = np.zeros((m, m))
            e[j, k] = e[k, j] = 1.0 if j == k else 1 / np.sqrt(2)
            basis.append(e)
    basis = np.array(basis)
    rows = [np.einsum("kab,ba->k", basis, np.eye(m))]
    rows += [np.einsum("kab,ba->k", basis, g.real) for g in ops]
    _, s, vt = np.linalg.svd(np.array(rows))
    rank = int(np.sum(s > 1e-10 * max(s[0], 1e-300)))
    return np.tensordot(vt[rank:], basis, axes=1)


def _is_real(stack: np.ndarray) -> bool:
    return bool(np.max(np.abs(stack.imag), initial=0.0) <= 1e-14 * max(np.max(np.abs(stack)), 1.0))


def check_necessary(F, solution: MaxEntSolution, field_: str = "auto", tol: Tolerances = TOL) -> NecessaryResult:
    """Does ``L(alpha)`` contain a state whose range is strictly inside ``range(rho*)``?

    The max-ent state is positive definite on its support, so any other
    feasible state spans a segment through it that can be extended until an
    eigenvalue vanishes.  The question therefore reduces to whether the
    constraints, compressed to the support, leave a free traceless direction.

    With ``field_='auto'`` and all observables real, only real directions are
    considered: Gibbs states of real observables are real, so every limit of
    max-ent states is real too.
    """
    stack = _stack(F)
    v = _support_basis(solution.support)
    m = v.shape[1]
    if field_ == "auto":
        field_ = "real" if _is_real(stack) and _is_real(v[None]) else "complex"
    if field_ not in ("real", "complex"):
        raise ValueError("field_ must be 'auto', 'real' or 'complex'")
    notes = []
    if m == 1:
        return NecessaryResult("violated", None, float("nan"), 1, field_, 0, ["max-ent state is pure"])
    comp = np.einsum("ak,iab,bl->ikl", v.conj(), stack, v)
    tau = v.conj().T @ solution.state @ v
    tau = (tau + tau.conj().T) / 2
    if field_ == "real":
        tau = tau.real
        null = _real_symmetric_null_space(comp, m)
    else:
        null = hermitian_null_space(list(comp), m)
    if len(null) == 0:
        return NecessaryResult("violated", None, float("nan"), m, field_, 0, ["the constraints pin the state on its support"])
    # walk from tau along a free direction until the spectrum touches zero
    best = None
    rng = np.random.default_rng(0)
    for k in range(len(null) + 8):
        direction = null[k] if k < len(null) else np.tensordot(rng.standard_normal(len(null)), null, axes=1)
        w_dir = _max_step(tau, direction)
        cand = tau + w_dir * direction
        cand = (cand + cand.conj().T) / 2
        ev, evec = np.linalg.eigh(cand)
        rank = int(np.sum(ev > tol.psd))
        if best is None or rank < best[1]:
            best = (cand, rank)
    cand, rank = best
    ev, evec = np.linalg.eigh(cand)
    cand = (evec * np.clip(ev, 0, None)) @ evec.conj().T
    cand /= np.trace(cand).real
    witness = v @ cand @ v.conj().T
    alpha = _images(stack, solution.state)
    residual = float(np.max(np.abs(_images(stack, witness) - alpha)))
    status = "satisfied" if rank < m and residual < tol.necessary else "violated"
    if status == "violated":
        notes.append(f"free direction found but witness residual {residual:.3g} fails tolerance")
    return NecessaryResult(status, witness, residual, rank, field_, len(null), notes)


def _max_step(tau: np.ndarray, direction: np.ndarray) -> float:
    """Largest ``t`` with ``tau + t * direction`` positive semidefinite (``tau`` positive definite)."""
    w, u = np.linalg.eigh(tau)
    half = u / np.sqrt(w)
    g = half.conj().T @ direction @ half
    lam = np.linalg.eigvalsh((g + g.conj().T) / 2)
    if lam[0] >= 0:
        return float(-1.0 / lam[-1]) if lam[-1] > 0 else 0.0
    return float(-1.0 / lam[0])


# --- sufficient condition -----------------------------------------------------


@dataclass
class ErrorDetectResult:
    status: str
    basis: np.ndarray | None
    blocks: list
    max_commutator: float

    def to_json(self) -> dict:
        return {"status": self.status, "blocks": [list(map(int, b)) for b in self.blocks], "max_commutator": self.max_commutator}


def _basis_matrix(v0) -> np.ndarray:
    if hasattr(v0, "matrix"):
        return v0.matrix()
    v0 = np.asarray(v0)
    return v0 if v0.ndim == 2 else v0[:, None]


def check_partial_error_detect(F, v0, tol: Tolerances = TOL) -> ErrorDetectResult:
    """Look for a ground-space basis in which every observable is diagonal.

    Such a basis exists exactly when the compressions ``V^dag F_i V`` commute.
    The returned ``blocks`` group basis vectors sharing all diagonal values;
    inside a block any rotation of the basis works equally well.
    """
    stack = _stack(F)
    v = _basis_matrix(v0)
    m = v.shape[1]
    if m < 2:
        raise ValueError("the partial error-detecting test needs a degenerate ground space")
    comp = np.einsum("ak,iab,bl->ikl", v.conj(), stack, v)
    scale = max(float(np.max(np.abs(comp))), 1.0)
    worst = 0.0
    for i in range(len(comp)):
        for j in range(i + 1, len(comp)):
            c = comp[i] @ comp[j] - comp[j] @ comp[i]
            worst = max(worst, float(np.max(np.abs(c))) / scale)
    if worst > tol.commutator:
        return ErrorDetectResult("fails", None, [], worst)
    rng = np.random.default_rng(0)
    mix = np.tensordot(rng.standard_normal(len(comp)), comp, axes=1)
    _, u = np.linalg.eigh((mix + mix.conj().T) / 2)
    diag = np.einsum("ak,iab,bk->ki", u.conj(), comp, u).real
    blocks: list[list[int]] = []
    for k in range(m):
        for b in blocks:
            if np.max(np.abs(diag[k] - diag[b[0]])) <= 1e-8 * scale:
                b.append(k)
                break
        else:
            blocks.append([k])
    return ErrorDetectResult("holds", v @ u, blocks, worst)


@dataclass
class SufficientResult:
    status: str
    degeneracy: int
    error_detect: ErrorDetectResult | None
    probe: DiscontinuityReport | None
    superposition_distance: float
    block_weights: list = field(default_factory=list)
    aligned_target: np.ndarray | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "degeneracy": self.degeneracy,
            "error_detect": None if self.error_detect is None else self.error_detect.to_json(),
            "superposition_distance": self.superposition_distance,
            "block_weights": self.block_weights,
            "probe": None if self.probe is None else self.probe.to_json(),
            "notes": list(self.notes),
        }


def _ones_to(u: np.ndarray) -> np.ndarray:
    """Unitary (Householder) mapping the uniform vector ``(1,...,1)/sqrt(k)`` to the unit vector ``u``."""
    k = u.size
    ones = np.ones(k) / np.sqrt(k)
    phase = np.vdot(ones, u)
    phase = phase / abs(phase) if abs(phase) > 1e-14 else 1.0
    w = ones * phase - u
    if np.linalg.norm(w) < 1e-14:
        return np.eye(k) * phase
    w /= np.linalg.norm(w)
    house = np.eye(k) - 2 * np.outer(w, w.conj())
    return house * phase


def check_sufficient(F, h0_coeffs: Sequence[float], path: PathSpec, tol: Tolerances = TOL) -> SufficientResult:
    """All three ingredients of the sufficient condition for a discontinuity.

    The path limit must be the equal superposition of some off-diagonal-free
    basis.  Phases of basis vectors are free, and so is the basis inside each
    block, so the test is that each block carries weight ``k_j / m``; the
    reported distance is to the closest such superposition.
    """
    stack = _stack(F)
    h0 = np.tensordot(np.asarray(h0_coeffs, dtype=float), stack, axes=1)
    _, v, m = _ground_space((h0 + h0.conj().T) / 2, tol.degeneracy)
    notes = []
    if m < 2:
        return SufficientResult("not_established", m, None, None, float("nan"), notes=["ground space of H_0 is not degenerate"])
    ed = check_partial_error_detect(stack, v[:, :m], tol)
    if ed.status != "holds":
        return SufficientResult("not_established", m, ed, None, float("nan"), notes=["no off-diagonal-free basis"])
    probe = path_limit_probe(path, stack, tol=tol)
    psi = probe.limit_vector
    target = np.zeros_like(psi)
    weights = []
    for block in ed.blocks:
        sub = ed.basis[:, block]
        comp = sub.conj().T @ psi
        wgt = float(np.vdot(comp, comp).real)
        weights.append(wgt)
        if wgt > 1e-300:
            aligned = sub @ _ones_to(comp / np.sqrt(wgt))
        else:
            aligned = sub
        target = target + aligned.sum(axis=1) / np.sqrt(m)
    overlap = abs(np.vdot(target, psi))
    dist = float(np.sqrt(max(0.0, 1 - min(overlap, 1.0) ** 2)))
    if probe.verdict == "inconclusive":
        notes.append("path limit did not converge")
    ok = probe.verdict != "inconclusive" and dist < tol.cauchy
    return SufficientResult(
        "sufficient_holds" if ok else "not_established",
        m,
        ed,
        probe,
        dist,
        block_weights=weights,
        aligned_target=fix_global_phase(target),
        notes=notes,
    )
