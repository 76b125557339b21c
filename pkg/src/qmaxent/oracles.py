"""Independent reference solvers used to cross-check the dual max-ent solver.

Both work in the primal: they search directly over states (or probability
vectors) satisfying the constraints, so they share no code path with the
dual iteration in :mod:`qmaxent.maxent`.
"""

from __future__ import annotations

import numpy as np
import scipy.optimize

from .operators import entropy_of_spectrum

__all__ = ["primal_maxent", "classical_maxent", "hermitian_null_space"]


def _hermitian_basis(d: int) -> np.ndarray:
    """Real-orthonormal basis (Frobenius) of d x d Hermitian matrices."""
    out = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1
        out.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(e)
    return np.array(out)


def hermitian_null_space(observables, d: int):
    """Orthonormal Hermitian directions ``N`` with ``tr N = 0`` and ``tr(N F_i) = 0``."""
    basis = _hermitian_basis(d)
    rows = [np.einsum("kij,ji->k", basis, np.eye(d)).real]
    for f in observables:
        rows.append(np.einsum("kij,ji->k", basis, f).real)
    a = np.array(rows)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null = vt[rank:]
    return np.tensordot(null, basis, axes=1)


def _entropy_nats(rho):
    w = np.linalg.eigvalsh(rho)
    if w[0] <= 0:
        return -np.inf
    return float(-np.sum(w * np.log(w)))


def _ascend(rho0, null, max_iter=20000, gtol=1e-11):
    """Gradient ascent of the entropy along the null directions, staying positive definite."""
    x = np.zeros(len(null))

    def state(xv):
        return rho0 + np.tensordot(xv, null, axes=1)

    def grad(rho):
        w, v = np.linalg.eigh(rho)
        logm = (v * np.log(w)) @ v.conj().T
        return -np.einsum("kij,ji->k", null, logm).real

    rho = state(x)
    f = _entropy_nats(rho)
    g = grad(rho)
    step = 1e-2
    prev = None
    for _ in range(max_iter):
        if np.linalg.norm(g) < gtol:
            break
        if prev is not None:
            dx, dg = x - prev[0], g - prev[1]
            denom = -(dx @ dg)
            if denom > 1e-300:
                step = float(np.clip((dx @ dx) / denom, 1e-8, 1e3))
        t = step
        while True:
            x_new = x + t * g
            rho_new = state(x_new)
            f_new = _entropy_nats(rho_new)
            if np.isfinite(f_new) and f_new >= f + 1e-4 * t * (g @ g) - 1e-15:
                break
            t *= 0.5
            if t < 1e-16:
                return rho, f
        prev = (x, g)
        x, rho, f = x_new, rho_new, f_new
        g = grad(rho)
    return rho, f


def primal_maxent(observables, alpha, seed_state, restarts: int = 10, rng=None):
    """Maximum entropy over ``{rho >= 0 : tr rho = 1, tr(rho F_i) = alpha_i}`` by direct ascent.

    ``seed_state`` must be a positive-definite feasible state; restarts start
    from random positive-definite feasible perturbations of it.  Returns the
    best state and its entropy in bits.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    seed_state = np.asarray(seed_state, dtype=complex)
    d = seed_state.shape[0]
    if d > 6:
        raise ValueError("the primal oracle is limited to d <= 6")
    null = hermitian_null_space(observables, d)
    if len(null) == 0:
        return seed_state, entropy_of_spectrum(np.linalg.eigvalsh(seed_state))
    floor = 0.5 * np.linalg.eigvalsh(seed_state)[0]
    if floor <= 0:
        raise ValueError("seed state must be positive definite")
    best = None
    for k in range(restarts):
        start = seed_state
        if k:
            direction = np.tensordot(rng.standard_normal(len(null)), null, axes=1)
            t = 1.0
            while np.linalg.eigvalsh(seed_state + t * direction)[0] <= floor:
                t *= 0.5
            start = seed_state + t * direction
        rho, f = _ascend(start, null)
        if best is None or f > best[1]:
            best = (rho, f)
    return best[0], best[1] / np.log(2)


def classical_maxent(values, alpha):
    """Maximum-entropy distribution ``p`` over outcomes with ``sum_j p_j values[i, j] = alpha_i``.

    A single constraint is solved by bisection on the exponential-family
    parameter; several constraints go through SLSQP over the simplex.
    Returns ``(p, entropy_bits)``.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    m = values.shape[1]
    if values.shape[0] == 1:
        f = values[0]
        a = alpha[0]
        if a <= f.min() + 1e-14 or a >= f.max() - 1e-14:
            p = (np.abs(f - a) < 1e-12).astype(float)
            p /= p.sum()
        else:

            def mean(t):
                z = t * (f - f.max()) if t > 0 else t * (f - f.min())
                w = np.exp(z)
                return (w @ f) / w.sum() - a

            lo, hi = -1.0, 1.0
            while mean(lo) > 0:
                lo *= 2
            while mean(hi) < 0:
                hi *= 2
            t = scipy.optimize.brentq(mean, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
            z = t * (f - (f.max() if t > 0 else f.min()))
            p = np.exp(z)
            p /= p.sum()
    else:
        # SLSQP misbehaves on dependent rows: keep an orthonormal basis of the row space
        aug = np.vstack([np.ones(m), values])
        rhs = np.concatenate([[1.0], alpha])
        u, sv, vt = np.linalg.svd(aug, full_matrices=False)
        keep = sv > 1e-10 * sv[0]
        rows = vt[keep]
        target = (u[:, keep].T @ rhs) / sv[keep]

        def negent(p):
            q = np.clip(p, 1e-300, None)
            return float(np.sum(q * np.log(q)))

        def negent_grad(p):
            return np.log(np.clip(p, 1e-300, None)) + 1

        cons = [{"type": "eq", "fun": lambda p: rows @ p - target, "jac": lambda p: rows}]
        res = scipy.optimize.minimize(
            negent,
            np.full(m, 1 / m),
            jac=negent_grad,
            constraints=cons,
            bounds=[(0, 1)] * m,
            method="SLSQP",
            options={"ftol": 1e-15, "maxiter": 2000},
        )
        p = np.clip(res.x, 0, None)
        p /= p.sum()
        if np.max(np.abs(values @ p - alpha)) > 1e-7:
            raise RuntimeError(f"classical oracle failed: {res.message}")
    return p, entropy_of_spectrum(p)
