"""Sampling the joint numerical range ``{(tr rho F_1, ..., tr rho F_r)}``.

A direction ``theta`` selects the Hamiltonian ``H = sum_i theta_i F_i``.
States on its ground space minimise ``theta . alpha``, so their images form
the face of the range exposed by ``-theta``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .config import DEFAULT_SEED, TOL
from .operators import random_pure_state

__all__ = [
    "FaceDescriptor",
    "RangePoint",
    "RangeSample",
    "boundary_point",
    "ground_space_of",
    "face_at_direction",
    "sample_boundary",
    "direction_grid",
    "direction_angles",
    "hull_contains",
    "write_points_csv",
]


def _stack(F) -> np.ndarray:
    stack = np.asarray([np.asarray(f, dtype=complex) for f in F])
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValueError("observables must be square matrices of one common size")
    return stack


def _unit(theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    norm = np.linalg.norm(theta)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"direction must be a unit vector (norm {norm:.15g})")
    return theta


def _images(stack: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``<v|F_i|v>`` for each column ``v``; shape (columns, r)."""
    return np.einsum("ak,iab,bk->ki", vecs.conj(), stack, vecs).real


def ground_space_of(F, theta, degeneracy_tol: float = TOL.degeneracy):
    """Ground energy and orthonormal ground-space basis (columns) of ``sum theta_i F_i``."""
    stack = _stack(F)
    theta = _unit(theta)
    if theta.size != stack.shape[0]:
        raise ValueError(f"direction has {theta.size} components for {stack.shape[0]} observables")
    h = np.tensordot(theta, stack, axes=1)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    spread = max(w[-1] - w[0], 1e-300)
    m = int(np.sum(w - w[0] <= degeneracy_tol * spread))
    return float(w[0]), v[:, :m]


def boundary_point(F, theta, degeneracy_tol: float = TOL.degeneracy):
    """Image of the maximally mixed ground state of ``sum theta_i F_i``, with its degeneracy."""
    stack = _stack(F)
    _, v = ground_space_of(stack, theta, degeneracy_tol)
    return _images(stack, v).mean(axis=0), v.shape[1]


@dataclass
class FaceDescriptor:
    direction: np.ndarray
    projector: np.ndarray
    extreme_images: np.ndarray
    dimension_estimate: int

    @property
    def degeneracy(self) -> int:
        return int(round(np.trace(self.projector).real))


def _affine_rank(points: np.ndarray, tol: float = 1e-8) -> int:
    if len(points) < 2:
        return 0
    centred = points - points.mean(axis=0)
    s = np.linalg.svd(centred, compute_uv=False)
    return int(np.sum(s > tol))


def face_at_direction(F, theta, n_face_samples: int = 200, rng=None, degeneracy_tol: float = TOL.degeneracy) -> FaceDescriptor:
    """Ground-space projector of ``sum theta_i F_i`` and images of random pure ground states."""
    stack = _stack(F)
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    theta = _unit(theta)
    _, v = ground_space_of(stack, theta, degeneracy_tol)
    m = v.shape[1]
    if m == 1:
        images = _images(stack, v)
    else:
        coeffs = np.column_stack([random_pure_state(m, rng) for _ in range(n_face_samples)])
        images = _images(stack, v @ coeffs)
    return FaceDescriptor(
        direction=theta,
        projector=v @ v.conj().T,
        extreme_images=images,
        dimension_estimate=_affine_rank(images),
    )


@dataclass
class RangePoint:
    theta: np.ndarray
    alpha: np.ndarray
    degeneracy: int
    face_id: int = -1


@dataclass
class RangeSample:
    points: list[RangePoint] = field(default_factory=list)
    faces: list[FaceDescriptor] = field(default_factory=list)

    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p in self.points])


def direction_grid(r: int, resolution: int, rng=None) -> np.ndarray:
    """Unit directions: an angle grid for ``r = 2``, a polar/azimuth grid for ``r = 3``.

    For ``r = 3`` the directions are ``(cos a, sin a cos p, sin a sin p)`` with
    ``a`` in ``[0, pi]`` and ``p`` in ``[0, 2 pi)``.  Larger ``r`` falls back to
    ``resolution`` Gaussian-random directions.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if r == 1:
        return np.array([[1.0], [-1.0]])
    if r == 2:
        t = 2 * np.pi * np.arange(resolution) / resolution
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    elif r == 3:
        a = np.pi * np.arange(resolution // 2 + 1) / (resolution // 2)
        p = 2 * np.pi * np.arange(resolution) / resolution
        aa, pp = np.meshgrid(a, p, indexing="ij")
        dirs = np.column_stack([np.cos(aa).ravel(), (np.sin(aa) * np.cos(pp)).ravel(), (np.sin(aa) * np.sin(pp)).ravel()])
    else:
        rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
        dirs = rng.standard_normal((resolution, r))
    # exact zeros at grid poles keep degenerate directions exactly degenerate
    dirs[np.abs(dirs) < 1e-15] = 0.0
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def sample_boundary(F, resolution: int, n_face_samples: int = 200, rng=None, degeneracy_tol: float = TOL.degeneracy) -> RangeSample:
    """Boundary points over a direction grid; degenerate directions also get sampled faces."""
    stack = _stack(F)
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    sample = RangeSample()
    for theta in direction_grid(stack.shape[0], resolution, rng):
        alpha, m = boundary_point(stack, theta, degeneracy_tol)
        face_id = -1
        if m > 1:
            face = face_at_direction(stack, theta, n_face_samples, rng, degeneracy_tol)
            face_id = len(sample.faces)
            sample.faces.append(face)
            for img in face.extreme_images:
                sample.points.append(RangePoint(theta, img, m, face_id))
        sample.points.append(RangePoint(theta, alpha, m, face_id))
    return sample


def hull_contains(vertices: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Signed margin of each query inside the convex hull of ``vertices`` (negative = outside)."""
    hull = ConvexHull(vertices)
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    return -np.max(queries @ normals.T + offsets, axis=1)


def direction_angles(theta) -> list[float]:
    """Plotting angles of a unit direction: ``[angle]`` for r = 2, ``[polar, azimuth]`` for r = 3."""
    theta = np.asarray(theta, dtype=float)
    if theta.size == 2:
        return [float(np.arctan2(theta[1], theta[0]) % (2 * np.pi))]
    if theta.size == 3:
        polar = float(np.arccos(np.clip(theta[0], -1.0, 1.0)))
        return [polar, float(np.arctan2(theta[2], theta[1]) % (2 * np.pi))]
    return []


_ANGLE_COLUMNS = {2: ["angle"], 3: ["polar", "azimuth"]}


def write_points_csv(sample: RangeSample, path) -> None:
    """One row per sampled boundary point; angle columns follow :func:`direction_grid`."""
    r = len(sample.points[0].theta) if sample.points else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"theta_{i + 1}" for i in range(r)] + _ANGLE_COLUMNS.get(r, [])
        w.writerow(header + [f"alpha_{i + 1}" for i in range(r)] + ["degeneracy", "face_id"])
        for p in sample.points:
            fields = [f"{x:.12g}" for x in p.theta] + [f"{x:.12g}" for x in direction_angles(p.theta)]
            w.writerow(fields + [f"{x:.12g}" for x in p.alpha] + [p.degeneracy, p.face_id])
