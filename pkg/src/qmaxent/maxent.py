"""Maximum-entropy inference from expectation values and from marginals.

Given observables ``F_1..F_r`` and target values ``alpha``, the solver finds
the state of maximal von Neumann entropy with ``tr(rho F_i) = alpha_i``.

Interior points are handled by limited-memory BFGS on the convex dual
``log tr exp(sum lambda_i F_i) - lambda . alpha``.  At boundary points the
dual minimiser runs off to infinity; the solver then identifies an exposing
direction ``y`` (a PSD operator ``(y.alpha) I - sum y_i F_i`` whose kernel
contains the support of every feasible state), compresses the problem onto
that kernel and starts again.  The recursion ends on a face where the dual
attains its minimum.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .config import TOL, Tolerances
from .operators import (
    SiteStructure,
    density_matrix,
    embed_local,
    entropy_of_spectrum,
    from_local_coefficients,
    hermitian,
    partial_trace,
    to_local_coefficients,
    trace_distance,
)

__all__ = [
    "MaxEntError",
    "Infeasible",
    "Inconsistent",
    "NoConvergence",
    "IllConditionedWarning",
    "ObservableSet",
    "MaxEntSolution",
    "RdmConstraintSet",
    "gibbs_state",
    "dual_value_grad",
    "solve_maxent",
    "solve_maxent_rdm",
    "rdm_observables",
    "rdm_constraints_of",
    "irreducible_correlation_k",
    "irreducible_correlation_ABC",
]

LN2 = np.log(2.0)


class MaxEntError(RuntimeError):
    pass


class Infeasible(MaxEntError):
    """The target expectation values are not attained by any state."""


class Inconsistent(MaxEntError):
    """Overlapping marginals disagree on their shared sites."""


class NoConvergence(MaxEntError):
    pass


class IllConditionedWarning(UserWarning):
    """Linearly dependent observables were pruned before solving."""


# --- observable sets -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """A tuple of Hermitian observables of equal dimension.

    ``supports`` optionally records, per observable, the sites it acts on
    non-trivially (requires ``structure``).
    """

    observables: tuple
    structure: SiteStructure | None = None
    supports: tuple | None = None

    def __post_init__(self):
        ops = tuple(hermitian(f) for f in self.observables)
        if not ops:
            raise ValueError("an observable set needs at least one operator")
        d = ops[0].shape[0]
        if any(f.shape != (d, d) for f in ops):
            raise ValueError("observables must share one dimension")
        object.__setattr__(self, "observables", ops)
        if self.structure is not None:
            self.structure.check(ops[0])
        if self.supports is not None:
            if self.structure is None:
                raise ValueError("supports need a site structure")
            if len(self.supports) != len(ops):
                raise ValueError("one support per observable is required")
            sup = tuple(tuple(self.structure.sites(s)) for s in self.supports)
            object.__setattr__(self, "supports", sup)
            for f, s in zip(ops, sup):
                _check_support(f, s, self.structure)

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]

    @property
    def r(self) -> int:
        return len(self.observables)

    def __len__(self) -> int:
        return self.r

    @property
    def stack(self) -> np.ndarray:
        return np.stack(self.observables)

    @property
    def is_real(self) -> bool:
        return all(np.max(np.abs(f.imag)) < 1e-14 for f in self.observables) if np.iscomplexobj(self.stack) else True

    def combine(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.r,):
            raise ValueError(f"expected {self.r} coefficients, got shape {coeffs.shape}")
        return np.tensordot(coeffs, self.stack, axes=1)

    def measure(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state of shape {rho.shape} does not match dimension {self.dim}")
        return np.einsum("kij,ji->k", self.stack, rho).real

    def measure_vector(self, psi) -> np.ndarray:
        psi = np.asarray(psi)
        return np.einsum("i,kij,j->k", psi.conj(), self.stack, psi).real


def _check_support(op, sites, structure: SiteStructure) -> None:
    n, d = structure.n_sites, structure.local_dim
    rest = d ** (n - len(sites))
    local = partial_trace(op, sites, structure) / rest if sites else np.array([[np.trace(op) / structure.dim]])
    order = sorted(sites)
    rebuilt = embed_local(local, order, structure) if sites else local[0, 0] * np.eye(structure.dim)
    if np.max(np.abs(rebuilt - op)) > 1e-10 * max(1.0, np.max(np.abs(op))):
        raise ValueError(f"observable acts outside its declared support {sites}")


def _as_observables(F) -> ObservableSet:
    return F if isinstance(F, ObservableSet) else ObservableSet(tuple(F))


# --- exponential family basics ----------------------------------------------


def _gibbs_from_matrix(k: np.ndarray):
    """Eigen-decomposition based Gibbs state of ``exp(k)/tr exp(k)``.

    Returns ``(rho, log_partition, probabilities, eigenvectors)``; the
    probabilities are in ascending order of the eigenvalues of ``k``.
    """
    w, v = np.linalg.eigh((k + k.conj().T) / 2)
    shift = w[-1]
    p = np.exp(w - shift)
    z = p.sum()
    p = p / z
    rho = (v * p) @ v.conj().T
    return rho, shift + np.log(z), p, v


def gibbs_state(F, lam) -> np.ndarray:
    """``exp(sum_i lam_i F_i) / Z`` evaluated with a max-eigenvalue shift."""
    F = _as_observables(F)
    return _gibbs_from_matrix(F.combine(lam))[0]


def dual_value_grad(F, alpha, lam):
    """Dual objective ``log tr exp(sum lam_i F_i) - lam . alpha`` (natural log) and its gradient."""
    F = _as_observables(F)
    alpha = np.asarray(alpha, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if alpha.shape != (F.r,) or lam.shape != (F.r,):
        raise ValueError("alpha and lambda must have one entry per observable")
    rho, logz, _, _ = _gibbs_from_matrix(F.combine(lam))
    return float(logz - lam @ alpha), F.measure(rho) - alpha


# --- internal standardised problems -----------------------------------------


class _Problem:
    """Dual problem on a (possibly compressed) Hilbert space.

    ``combine(y)`` returns ``sum_j y_j B_j`` and ``measure(sigma)`` returns
    ``tr(sigma B_j)``; the aim is ``measure(rho) == target``.
    ``cross_ops(v, w)`` returns the stack of ``v^dag B_j w``; it may be None
    when only ``v == w`` is affordable (see ``compress_ops``).
    """

    def __init__(self, dim, r, combine, measure, target, compress_ops, cross_ops=None):
        self.dim = dim
        self.r = r
        self.combine = combine
        self.measure = measure
        self.target = np.asarray(target, dtype=float)
        self.compress_ops = compress_ops
        self.cross_ops = cross_ops
        # relative eigenvalue error tolerated when accepting an exposed face
        self.slack = 1e-12
        self.face_error = 0.0

    def restrict(self, u: np.ndarray) -> "_Problem":
        """Compress onto the column span of the isometry ``u``."""
        uh = u.conj().T
        cross = None if self.cross_ops is None else (lambda a, b: self.cross_ops(u @ a, u @ b))
        return _Problem(
            u.shape[1],
            self.r,
            lambda y: uh @ self.combine(y) @ u,
            lambda s: self.measure(u @ s @ uh),
            self.target,
            lambda v: self.compress_ops(u @ v),
            cross,
        )


def _dense_problem(stack: np.ndarray, target) -> _Problem:
    def cross(v, w):
        return np.einsum("ia,kij,jb->kab", v.conj(), stack, w, optimize=True)

    return _Problem(
        stack.shape[1],
        stack.shape[0],
        lambda y: np.tensordot(y, stack, axes=1),
        lambda s: np.einsum("kij,ji->k", stack, s).real,
        target,
        lambda v: cross(v, v),
        cross,
    )


def _probe_compress(measure, r):
    """Compressed operators ``v^dag B_j v`` via Hermitian probes of ``measure``."""

    def compress(v):
        m = v.shape[1]
        out = np.zeros((r, m, m), dtype=complex)
        for a in range(m):
            out[:, a, a] = measure(np.outer(v[:, a], v[:, a].conj()))
            for b in range(a + 1, m):
                x = np.outer(v[:, b], v[:, a].conj())
                re = measure((x + x.conj().T) / 2)
                im = measure((x - x.conj().T) / 2j)
                out[:, a, b] = re + 1j * im
                out[:, b, a] = re - 1j * im
        return out

    return compress


@dataclass
class _Outcome:
    lam: np.ndarray | None = None
    rho: np.ndarray | None = None
    face: np.ndarray | None = None
    iterations: int = 0


def _lbfgs_direction(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        a = (s @ q) / (y @ s)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = (y @ q) / (y @ s)
        q += (a - b) * s
    return -q


def _descend(prob: _Problem, tol: Tolerances, grad_tol: float, max_iter: int, memory: int = 30) -> _Outcome:
    """Minimise the dual of ``prob``; stop at convergence or when a face is exposed."""

    def evaluate(lam):
        rho, logz, p, _ = _gibbs_from_matrix(prob.combine(lam))
        return logz - lam @ prob.target, prob.measure(rho) - prob.target, rho, p

    lam = np.zeros(prob.r)
    f, g, rho, p = evaluate(lam)
    s_hist: list = []
    y_hist: list = []
    cap = tol.lambda_cap
    eig_trigger = tol.min_eig
    flat = 0
    for it in range(1, max_iter + 1):
        # repeated steps without decrease mean f is resolved to rounding; the residual check decides
        if np.max(np.abs(g)) < grad_tol or flat >= 10:
            return _Outcome(lam=lam, rho=rho, iterations=it)
        # weak duality gives f >= 0 when feasible; allow for face-kernel error
        if f < -1e-7 * (1.0 + np.linalg.norm(lam)):
            raise Infeasible(f"dual objective {f:.3g} < 0 certifies that the targets are unattainable")
        norm = np.linalg.norm(lam)
        if norm > cap or p[0] < eig_trigger:
            face = _expose_face(prob, lam, p, tol)
            if face is not None:
                return _Outcome(lam=lam, face=face, iterations=it)
            if norm > cap:
                cap *= 10
                if cap > 1e9:
                    raise NoConvergence("dual diverges but no exposing face could be identified")
            else:
                eig_trigger = p[0] * 1e-2
        d = _lbfgs_direction(g, s_hist, y_hist) if s_hist else -g / max(1.0, np.max(np.abs(g)))
        slope = g @ d
        if slope >= 0:
            s_hist.clear()
            y_hist.clear()
            d = -g
            slope = -g @ g
        step = 1.0
        accepted = False
        for _ in range(60):
            lam_new = lam + step * d
            f_new, g_new, rho_new, p_new = evaluate(lam_new)
            if f_new <= f + 1e-4 * step * slope:
                accepted = True
                break
            # near the optimum f is flat to rounding; accept any gradient decrease
            if f_new <= f + 1e-14 * max(1.0, abs(f)) and np.linalg.norm(g_new) < np.linalg.norm(g):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if s_hist:
                s_hist.clear()
                y_hist.clear()
                continue
            raise NoConvergence(f"line search failed with gradient {np.max(np.abs(g)):.3g}")
        s, yv = lam_new - lam, g_new - g
        if s @ yv > 1e-16 * np.linalg.norm(s) * np.linalg.norm(yv):
            s_hist.append(s)
            y_hist.append(yv)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        flat = flat + 1 if f_new >= f else 0
        lam, f, g, rho, p = lam_new, f_new, g_new, rho_new, p_new
    raise NoConvergence(f"no convergence after {max_iter} iterations (gradient {np.max(np.abs(g)):.3g})")


def _exposing_residual(prob: _Problem, y):
    k = prob.combine(y)
    ymat = (y @ prob.target) * np.eye(prob.dim) - k
    w, v = np.linalg.eigh((ymat + ymat.conj().T) / 2)
    return w, v


def _expose_face(prob: _Problem, lam, p, tol: Tolerances):
    """Try to turn the divergent dual iterate ``lam`` into an exposing vector.

    Returns an isometry onto the kernel of the refined exposing operator,
    or None when no candidate converges.
    """
    dim = prob.dim
    theta = lam / np.linalg.norm(lam)
    w, _ = _exposing_residual(prob, theta)
    spread = max(w[-1] - w[0], 1e-300)
    # nested faces inherit kernel error near the square root of machine precision
    if w[0] > 1e-6 * spread:
        raise Infeasible("targets lie strictly outside the supporting hyperplane of the dual direction")
    # candidate face sizes: large gaps in the log-spectrum of the Gibbs iterate
    logp = np.log(np.maximum(p[::-1], 1e-300))
    gaps = logp[:-1] - logp[1:]
    order = [int(i) + 1 for i in np.argsort(-gaps) if gaps[i] > 1.0][:4]
    for m in order:
        if m >= dim:
            continue
        u = _refine_exposing(prob, theta, m, tol)
        if u is not None:
            return u
    return None


def _refine_exposing(prob: _Problem, y0, m: int, tol: Tolerances):
    """Newton-type refinement of an approximate exposing vector for an ``m``-dimensional face.

    First-order (Gauss-Newton) steps drive the ``m`` lowest eigenvalues of
    ``Y(y)`` to zero.  Directions to which that block is insensitive at first
    order (tangential contact of the supporting hyperplane) are handled by
    maximising a second-order model of the block trace; without this, the
    kernel would only be resolved to about the square root of machine
    precision.
    """
    y = y0 / np.linalg.norm(y0)
    r = prob.r
    eye = np.eye(m)
    stalls = 0
    for _ in range(200):
        w, v = _exposing_residual(prob, y)
        spread = max(w[-1] - w[0], 1e-300)
        vm, q = v[:, :m], v[:, m:]
        a_ops = prob.target[:, None, None] * eye[None] - prob.compress_ops(vm)
        iu = np.triu_indices(m)
        jac = [a_ops[:, i, j].real for i, j in zip(*iu)]
        jac += [a_ops[:, i, j].imag for i, j in zip(*iu) if i != j]
        res = [w[i] if i == j else 0.0 for i, j in zip(*iu)]
        res += [0.0 for i, j in zip(*iu) if i != j]
        jac = np.array(jac)
        res = np.array(res)
        # tangent space of the unit sphere at y
        basis = np.linalg.svd(y[None, :])[2][1:].T
        jt = jac @ basis
        uu, ss, vt = np.linalg.svd(jt, full_matrices=False)
        if ss.size < r - 1:
            vt = np.vstack([vt, np.linalg.svd(jt)[2][ss.size:]])
            ss = np.concatenate([ss, np.zeros(r - 1 - ss.size)])
            uu = np.hstack([uu, np.zeros((uu.shape[0], r - 1 - uu.shape[1]))])
        hess = None
        if prob.cross_ops is not None and q.shape[1] and w[m] > 0:
            dirs = basis @ vt.T
            cd = np.tensordot(dirs.T, prob.cross_ops(q, vm), axes=1)
            hess = np.einsum("iba,jba,b->ij", cd.conj(), cd, 1.0 / w[m:]).real
            grad = dirs.T @ np.einsum("kaa->k", a_ops).real
        res_norm = float(np.linalg.norm(res))
        floor = 1e-9 * spread
        if hess is None:
            tangential = np.zeros(ss.size, dtype=bool)
        else:
            # first-order steps are unreliable where the quadratic term dominates
            curv = np.abs(np.diag(hess))
            tangential = (curv * res_norm > 0.05 * ss**2) | ((ss <= floor) & (curv > 0))
        live = ss > floor
        big = live & ~tangential
        z_gn = -vt[live].T @ ((uu[:, live].T @ res) / ss[live])
        candidates = [z_gn]
        if hess is not None and tangential.any():
            z = -vt[big].T @ ((uu[:, big].T @ res) / ss[big])
            h = hess[np.ix_(tangential, tangential)]
            hw, hv = np.linalg.eigh(h)
            cut = 1e-10 * max(float(np.max(np.abs(hess))), 1.0 / spread)
            keep = hw > cut
            zeta = 0.5 * hv[:, keep] @ ((hv[:, keep].T @ grad[tangential]) / hw[keep])
            candidates.append(z + vt[tangential].T @ zeta)
        merit = float(np.max(np.abs(w[:m])))
        zc = candidates[-1]
        if hess is None:
            settled = np.linalg.norm(zc) < 1e-10
        else:
            # squared rotation of the kernel that the proposed step would cause
            coef = vt @ zc
            settled = float(coef @ hess @ coef) / w[m] < 1e-20
        converged = merit < prob.slack * spread and w[0] > -prob.slack * spread
        # at roundoff level a step that no longer improves means the kernel is as good as it gets
        if converged and (settled or stalls > 3):
            # the refined block is the kernel even when its eigenvalues sit above the degeneracy cut
            kernel = (w < tol.degeneracy * spread) | (np.arange(w.size) < m)
            k = int(kernel.sum())
            if k >= prob.dim:
                return None
            # feasible states have <psi|Y|psi> = 0, so their weight off the kernel is at most sqrt(merit / gap)
            prob.face_error = float(np.sqrt(max(merit, 1e-15 * spread) / max(w[k], 1e-300)))
            return v[:, kernel]
        best = None
        for z in candidates:
            delta = basis @ z
            if not np.all(np.isfinite(delta)) or np.linalg.norm(delta) > 1.0:
                continue
            y_new = y + delta
            y_new /= np.linalg.norm(y_new)
            w_new = _exposing_residual(prob, y_new)[0]
            score = float(np.max(np.abs(w_new[:m]))) / max(w_new[-1] - w_new[0], 1e-300)
            if best is None or score < best[0]:
                best = (score, y_new)
        if best is None:
            return None
        if best[0] >= 0.75 * merit / spread:
            stalls += 1
            if stalls > 3 and not converged:
                return None
        y = best[1]
    return None


# --- public solver ----------------------------------------------------------


@dataclass
class MaxEntSolution:
    state: np.ndarray
    dual: np.ndarray | None
    support: np.ndarray
    status: str
    residual: float
    entropy_bits: float
    faces: list = field(default_factory=list)
    pruned: list = field(default_factory=list)
    iterations: int = 0

    @property
    def rank(self) -> int:
        return int(np.round(np.trace(self.support).real))

    def to_json(self) -> dict:
        from .operators import operator_to_json

        return {
            "rho": operator_to_json(self.state),
            "status": self.status,
            "entropy_bits": self.entropy_bits,
            "residual": self.residual,
            "rank": self.rank,
            "dual": None if self.dual is None else [float(x) for x in self.dual],
            "pruned": list(self.pruned),
        }


@dataclass
class _Standard:
    stack: np.ndarray
    target: np.ndarray
    weights: np.ndarray
    kept: list
    pruned: list
    amplification: float


def _standardise(stack: np.ndarray, alpha: np.ndarray, consistency: float = 1e-8, warn: bool = True) -> _Standard:
    """Whitened traceless operators spanning the same affine constraints as ``stack``.

    The result satisfies ``out[j] = sum_i weights[i, j] * T_kept[i]`` with
    ``T_i = stack[i] - tr(stack[i])/d`` and ``tr(out[a] out[b]) = d delta_ab``.
    Linearly dependent operators are dropped after checking that their
    targets follow from the kept ones.
    """
    r, d = stack.shape[0], stack.shape[1]
    traces = np.einsum("kii->k", stack).real / d
    t = stack - traces[:, None, None] * np.eye(d)[None]
    beta = np.asarray(alpha, dtype=float) - traces
    flat = t.reshape(r, -1)
    gram = (flat.conj() @ flat.T).real
    diag_max = np.max(np.abs(np.diag(gram))) if r else 0.0
    if diag_max < 1e-14:
        kept: list[int] = []
    else:
        cols = np.hstack([flat.real, flat.imag]).T
        _, rr, piv = scipy.linalg.qr(cols, mode="economic", pivoting=True)
        dg = np.abs(np.diag(rr))
        rank = int(np.sum(dg > 1e-9 * dg[0]))
        kept = sorted(int(i) for i in piv[:rank])
    pruned = [i for i in range(r) if i not in kept]
    coef_norm = 0.0
    if pruned:
        if kept:
            coef = np.linalg.lstsq(gram[np.ix_(kept, kept)], gram[np.ix_(kept, pruned)], rcond=None)[0]
            pred = coef.T @ beta[kept]
            coef_norm = float(np.max(np.sum(np.abs(coef), axis=0)))
        else:
            pred = np.zeros(len(pruned))
        bad = np.abs(pred - beta[pruned]) > consistency * (1.0 + coef_norm) * max(1.0, np.max(np.abs(beta)))
        if bad.any():
            raise Infeasible(
                f"observables {[p for p, b in zip(pruned, bad) if b]} depend linearly on others "
                "but their targets are inconsistent"
            )
        if warn:
            warnings.warn(f"pruned linearly dependent observables {pruned}", IllConditionedWarning, stacklevel=3)
    if not kept:
        return _Standard(np.zeros((0, d, d)), np.zeros(0), np.zeros((0, 0)), kept, pruned, 1.0)
    ew, ev = np.linalg.eigh(gram[np.ix_(kept, kept)])
    weights = ev @ np.diag(np.sqrt(d / ew)) @ ev.T
    out = np.tensordot(weights.T, t[kept], axes=1)
    inv = np.linalg.inv(weights)
    amp = max(1.0, float(np.max(np.sum(np.abs(inv), axis=0)))) * (1.0 + coef_norm)
    return _Standard(out, weights.T @ beta[kept], weights, kept, pruned, amp)


def _finish(state, support, status, measure, alpha, faces, pruned, iterations, dual):
    state = (state + state.conj().T) / 2
    resid = float(np.max(np.abs(measure(state) - alpha))) if len(alpha) else 0.0
    ent = entropy_of_spectrum(np.linalg.eigvalsh(state))
    return MaxEntSolution(state, dual, support, status, resid, ent, faces, pruned, iterations)


_MATERIALISE_LIMIT = 5e7


def _face_problem(prob: _Problem, v: np.ndarray):
    """Problem compressed onto span(v), re-standardised when it is small enough to materialise.

    Returns ``(problem, amplification)``.  In place of a problem it may
    return None, meaning no constraint survives and the answer is the
    maximally mixed face state, or an array, the unique state on the face.
    """
    k = v.shape[1]
    if prob.r * k * k > _MATERIALISE_LIMIT:
        return prob.restrict(v), 1.0
    ops = prob.compress_ops(v)
    # dependent targets on an inexact face disagree by about the kernel error
    std = _standardise(ops, prob.target, consistency=max(1e-7, 10 * prob.face_error), warn=False)
    if not std.kept:
        return None, 1.0
    if len(std.kept) == k * k - 1:
        # the targets fix the state on the face; the dual has no finite optimum when it is singular
        rho = np.eye(k) / k + np.tensordot(std.target / k, std.stack, axes=1)
        w, vv = np.linalg.eigh((rho + rho.conj().T) / 2)
        w = np.clip(w, 0, None)
        return (vv * (w / w.sum())) @ vv.conj().T, 1.0
    return _dense_problem(std.stack, std.target), std.amplification


def _solve_problem(prob: _Problem, tol: Tolerances, grad_tol: float, max_iter: int, u0=None):
    """Facial-reduction loop; returns (state, support, faces, lam_or_None, iterations)."""
    faces: list = []
    total = 0
    u = None
    cur: _Problem | None = prob
    fixed = None
    amp = 1.0

    def enter(face):
        nonlocal u, cur, amp, fixed
        u = face if u is None else u @ face
        faces.append(u.shape[1])
        if u.shape[1] == 1:
            cur = None
            return
        parent = cur
        cur, a = _face_problem(cur, face)
        if isinstance(cur, np.ndarray):
            fixed, cur = cur, None
            return
        amp *= a
        if cur is not None and parent is not None:
            # targets on an inexact face are off by about the kernel error
            cur.slack = float(np.clip(10 * parent.face_error, parent.slack, 1e-6))

    if u0 is not None:
        enter(u0)
    while True:
        if cur is None:
            proj = u @ u.conj().T
            if fixed is not None:
                return u @ fixed @ u.conj().T, proj, faces, None, total
            return proj / u.shape[1], proj, faces, None, total
        out = _descend(cur, tol, grad_tol / amp, max_iter)
        total += out.iterations
        if out.face is None:
            if u is None:
                return out.rho, np.eye(prob.dim), faces, out.lam, total
            return u @ out.rho @ u.conj().T, u @ u.conj().T, faces, None, total
        enter(out.face)


def solve_maxent(F, alpha, tol: Tolerances = TOL, max_iter: int = 20000) -> MaxEntSolution:
    """Maximum-entropy state reproducing ``tr(rho F_i) = alpha_i``.

    Raises Infeasible when the targets cannot be met; prunes (with an
    ``IllConditionedWarning``) observables that are linearly dependent.
    """
    F = _as_observables(F)
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape != (F.r,):
        raise ValueError(f"expected {F.r} target values, got {alpha.size}")
    d = F.dim
    std = _standardise(F.stack, alpha)
    if not std.kept:
        sol = _finish(np.eye(d) / d, np.eye(d), "interior", F.measure, alpha, [], std.pruned, 0, np.zeros(F.r))
        _check_residual(sol)
        return sol
    if len(std.kept) == d * d - 1:
        return _reconstruct(std, d, F, alpha, tol)
    prob = _dense_problem(std.stack, std.target)
    grad_tol = tol.grad * 0.5 / std.amplification
    state, support, faces, lam, iters = _solve_problem(prob, tol, grad_tol, max_iter)
    dual = None
    if lam is not None:
        dual = np.zeros(F.r)
        dual[std.kept] = std.weights @ lam
    status = "interior" if not faces else "face-reduced"
    sol = _finish(state, support, status, F.measure, alpha, faces, std.pruned, iters, dual)
    sol = _polish(sol, lambda: F.stack, F.measure, alpha)
    sol = _truncate(sol, lambda: F.stack, F.measure, alpha, tol.grad)
    _check_residual(sol)
    return sol


def _polish(sol: MaxEntSolution, get_stack, measure, alpha, steps: int = 8) -> MaxEntSolution:
    """Gauss-Newton feasibility correction of a rank-deficient solution.

    Face kernels from a tangential exposing vector are only accurate to
    about the square root of machine precision; a minimum-norm correction
    of the factor ``W`` in ``rho = W W^dag`` removes the resulting residual.
    """
    d = sol.state.shape[0]
    if sol.residual < 1e-12 or sol.rank == d or len(alpha) * d * d > _MATERIALISE_LIMIT:
        return sol
    w, v = np.linalg.eigh(sol.state)
    keep = w > 1e-12 * w[-1]
    fac = v[:, keep] * np.sqrt(w[keep])
    ops = np.concatenate([np.eye(d)[None], get_stack()])
    goal = np.concatenate([[1.0], alpha])
    best = sol
    for _ in range(steps):
        tangents = np.einsum("kij,jb->kib", ops, fac)
        resid = np.einsum("ia,kia->k", fac.conj(), tangents).real - goal
        gram = 2 * np.einsum("kia,lia->kl", tangents.conj(), tangents).real
        mu = np.linalg.lstsq(gram, -resid, rcond=1e-12)[0]
        fac = fac + np.tensordot(mu, tangents, axes=1)
        q = np.linalg.qr(fac)[0]
        trial = _finish(fac @ fac.conj().T, q @ q.conj().T, best.status, measure, alpha,
                        best.faces, best.pruned, best.iterations, best.dual)
        if trial.residual >= best.residual:
            break
        best = trial
        if best.residual < 1e-13:
            break
    return best


def _truncate(sol: MaxEntSolution, get_stack, measure, alpha, floor: float) -> MaxEntSolution:
    """Drop eigenvalues the dual iteration cannot resolve from zero.

    A face whose weight falls below the gradient tolerance is never exposed,
    so the iteration stops with a spurious tiny eigenvalue; removing it (and
    re-polishing) keeps the reported rank and support honest.
    """
    w, v = np.linalg.eigh(sol.state)
    keep = w > floor
    if keep.all() or not keep.any() or len(alpha) * w.size**2 > _MATERIALISE_LIMIT:
        return sol
    vk = v[:, keep]
    rho = (vk * w[keep]) @ vk.conj().T
    trial = _finish(rho / w[keep].sum(), vk @ vk.conj().T, "face-reduced", measure, alpha,
                    sol.faces + [int(keep.sum())], sol.pruned, sol.iterations, None)
    trial = _polish(trial, get_stack, measure, alpha)
    return trial if trial.residual <= max(sol.residual, 1e-10) else sol


def _check_residual(sol: MaxEntSolution, limit: float = 1e-7):
    if sol.residual > limit:
        raise Infeasible(f"final constraint residual {sol.residual:.3g} exceeds {limit:g}")


def _reconstruct(std: _Standard, d, F, alpha, tol):
    rho = np.eye(d) / d + np.tensordot(std.target / d, std.stack, axes=1)
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    if w[0] < -tol.psd:
        raise Infeasible(f"informationally complete targets give a non-positive operator (eigenvalue {w[0]:.3g})")
    keep = w > 1e-12
    support = v[:, keep] @ v[:, keep].conj().T
    status = "interior" if keep.all() else "face-reduced"
    rho = (v * np.clip(w, 0, None)) @ v.conj().T
    faces = [] if keep.all() else [int(keep.sum())]
    return _finish(rho, support, status, F.measure, alpha, faces, std.pruned, 0, None)


# --- marginal constraints --------------------------------------------------


@dataclass(frozen=True, eq=False)
class RdmConstraintSet:
    """Target reduced density matrices on site subsets.

    Each target is ``(sites, rho)`` where ``rho`` is ordered by the listed
    sites (first listed site most significant).
    """

    structure: SiteStructure
    targets: tuple
    k: int | None = None

    def __post_init__(self):
        d = self.structure.local_dim
        normal = []
        for sites, rho in self.targets:
            sites = self.structure.sites(sites, allow_empty=False)
            rho = density_matrix(rho)
            if rho.shape[0] != d ** len(sites):
                raise ValueError(f"target on sites {sites} has dimension {rho.shape[0]}")
            order = sorted(sites)
            if order != sites:
                # reorder tensor factors to ascending site order
                perm = [sites.index(s) for s in order]
                t = rho.reshape((d,) * (2 * len(sites)))
                t = t.transpose(perm + [len(sites) + p for p in perm])
                rho = t.reshape(rho.shape)
            normal.append((tuple(order), rho))
        object.__setattr__(self, "targets", tuple(normal))
        if self.k is None:
            object.__setattr__(self, "k", max(len(s) for s, _ in normal))
        self.check_consistency()

    def check_consistency(self, tol: float = 1e-8) -> None:
        d = self.structure.local_dim
        for (sa, ra), (sb, rb) in itertools.combinations(self.targets, 2):
            shared = sorted(set(sa) & set(sb))
            if not shared:
                continue
            ma = partial_trace(ra, [sa.index(s) for s in shared], SiteStructure(len(sa), d))
            mb = partial_trace(rb, [sb.index(s) for s in shared], SiteStructure(len(sb), d))
            dist = trace_distance(ma, mb)
            if dist >= tol:
                raise Inconsistent(f"targets on {sa} and {sb} disagree on sites {shared} (trace distance {dist:.3g})")


def rdm_constraints_of(rho, structure: SiteStructure, subsets) -> RdmConstraintSet:
    subsets = [tuple(sorted(s)) for s in subsets]
    return RdmConstraintSet(structure, tuple((s, partial_trace(rho, s, structure)) for s in subsets))


class _MarginalMap:
    """Product-basis observables ``d^(|S|/2) E_a1 x ... x E_ak`` on each target support."""

    def __init__(self, constraints: RdmConstraintSet):
        self.structure = constraints.structure
        d = self.structure.local_dim
        self.groups = []
        seen: dict = {}
        target = []
        for sites, rho in constraints.targets:
            kk = len(sites)
            coeffs = to_local_coefficients(rho, kk, d) * d ** (kk / 2)
            idx, keys = [], []
            for a in itertools.product(range(d * d), repeat=kk):
                key = tuple((s, ai) for s, ai in zip(sites, a) if ai != 0)
                if not key or key in seen:
                    continue
                seen[key] = len(target)
                keys.append(len(target))
                idx.append(a)
                target.append(coeffs[a])
            if idx:
                self.groups.append((sites, np.array(idx).T if idx else None, np.array(keys)))
        self.target = np.array(target, dtype=float)
        self.r = len(target)

    def combine(self, y):
        st = self.structure
        d = st.local_dim
        out = np.zeros((st.dim, st.dim), dtype=complex)
        for sites, idx, keys in self.groups:
            kk = len(sites)
            c = np.zeros((d * d,) * kk)
            c[tuple(idx)] = y[keys] * d ** (kk / 2)
            out += embed_local(from_local_coefficients(c, kk, d), list(sites), st)
        return out

    def measure(self, rho):
        st = self.structure
        d = st.local_dim
        out = np.empty(self.r)
        for sites, idx, keys in self.groups:
            kk = len(sites)
            red = partial_trace(rho, sites, st)
            c = to_local_coefficients(red, kk, d)
            out[keys] = c[tuple(idx)] * d ** (kk / 2)
        return out

    def observables(self) -> np.ndarray:
        """Dense stack of the constraint observables (ordered like ``target``)."""
        eye = np.eye(self.r)
        return np.array([self.combine(e) for e in eye])

    def kernel_isometry(self, constraints: RdmConstraintSet, cutoff: float = 1e-12):
        """Exact exposing operator built from the kernels of the target marginals."""
        st = self.structure
        y = np.zeros((st.dim, st.dim), dtype=complex)
        any_kernel = False
        for sites, rho in constraints.targets:
            w, v = np.linalg.eigh(rho)
            ker = v[:, w < cutoff]
            if ker.shape[1]:
                any_kernel = True
                y += embed_local(ker @ ker.conj().T, list(sites), st)
        if not any_kernel:
            return None
        w, v = np.linalg.eigh((y + y.conj().T) / 2)
        keep = w < 1e-9
        if not keep.any():
            raise Infeasible("no global state has marginals supported on the given ranges")
        return v[:, keep]


def rdm_observables(constraints: RdmConstraintSet):
    """Explicit ``(observables, targets)`` equivalent to the marginal constraints."""
    mm = _MarginalMap(constraints)
    return mm.observables(), mm.target.copy()


def solve_maxent_rdm(constraints: RdmConstraintSet, tol: Tolerances = TOL, max_iter: int = 20000) -> MaxEntSolution:
    """Maximum-entropy global state with the given marginals."""
    mm = _MarginalMap(constraints)
    st = constraints.structure
    if st.dim > 4096:
        raise ValueError(f"global dimension {st.dim} too large for dense marginal inference")
    if mm.r == 0:
        state = np.eye(st.dim) / st.dim
        return MaxEntSolution(state, np.zeros(0), np.eye(st.dim), "interior", 0.0,
                              entropy_of_spectrum(np.full(st.dim, 1 / st.dim)))
    # observables already satisfy tr(O_a O_b) = dim * delta_ab, so no whitening is needed
    cross = None
    if mm.r * st.dim * st.dim <= _MATERIALISE_LIMIT:
        stack = mm.observables()

        def cross(v, w):
            return np.einsum("ia,kij,jb->kab", v.conj(), stack, w, optimize=True)

    prob = _Problem(
        st.dim,
        mm.r,
        lambda y: mm.combine(y),
        lambda s: mm.measure(s),
        mm.target,
        _probe_compress(mm.measure, mm.r),
        cross,
    )
    u0 = mm.kernel_isometry(constraints)
    state, support, faces, lam, iters = _solve_problem(prob, tol, tol.grad * 0.5, max_iter, u0=u0)
    if u0 is not None:
        faces = [u0.shape[1]] + faces
    status = "interior" if not faces else "face-reduced"
    sol = _finish(state, support, status, mm.measure, mm.target, faces, [], iters, lam)
    sol = _polish(sol, mm.observables, mm.measure, mm.target)
    sol = _truncate(sol, mm.observables, mm.measure, mm.target, tol.grad)
    _check_residual(sol)
    return sol


# --- irreducible correlations ----------------------------------------------


def _entropy_bits(rho) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(rho))


def maxent_entropy_k(rho, structure: SiteStructure, k: int, tol: Tolerances = TOL) -> float:
    """Entropy (bits) of the max-ent state consistent with all k-site marginals of ``rho``."""
    n = structure.n_sites
    if k == 0:
        return float(np.log2(structure.dim))
    if k >= n:
        return _entropy_bits(rho)
    cons = rdm_constraints_of(rho, structure, itertools.combinations(range(n), k))
    return solve_maxent_rdm(cons, tol).entropy_bits


def irreducible_correlation_k(rho, structure: SiteStructure, k: int, tol: Tolerances = TOL) -> float:
    """``S(rho*(k-1)) - S(rho*(k))`` in bits."""
    rho = density_matrix(rho)
    structure.check(rho)
    if not 1 <= k <= structure.n_sites:
        raise ValueError(f"k must lie in [1, {structure.n_sites}]")
    return maxent_entropy_k(rho, structure, k - 1, tol) - maxent_entropy_k(rho, structure, k, tol)


def irreducible_correlation_ABC(rho_abc, partition, tol: Tolerances = TOL) -> float:
    """Entropy gap between the max-ent state fixing the AB and BC marginals and ``rho_abc``.

    ``partition`` provides ``a``, ``b``, ``c`` site lists (B may consist of
    several blocks) covering exactly the sites of ``rho_abc``.
    """
    a, b, c = list(partition.a), list(partition.b), list(partition.c)
    sites = sorted(a + b + c)
    n = len(sites)
    if not (a and b and c):
        raise ValueError("A, B and C must be nonempty")
    if n > 8:
        raise ValueError(f"|ABC| = {n} exceeds the 8-site limit for marginal-constrained inference")
    local = {s: i for i, s in enumerate(sites)}
    d = getattr(partition, "local_dim", 2)
    structure = SiteStructure(n, d)
    rho = density_matrix(rho_abc)
    structure.check(rho)
    ab = [local[s] for s in sorted(a + b)]
    bc = [local[s] for s in sorted(b + c)]
    cons = rdm_constraints_of(rho, structure, [ab, bc])
    return solve_maxent_rdm(cons, tol).entropy_bits - _entropy_bits(rho)
