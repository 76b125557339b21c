import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from qmaxent import catalog
from qmaxent.numrange import (
    boundary_point,
    direction_angles,
    direction_grid,
    face_at_direction,
    ground_space_of,
    hull_contains,
    sample_boundary,
    write_points_csv,
)
from qmaxent.operators import PAULI, expectation, random_density_matrix, random_hermitian


def test_direction_convention():
    # theta = (1) builds H = Z, whose ground state |1> sits at alpha = -1
    alpha, deg = boundary_point([PAULI["Z"]], [1.0])
    assert alpha == pytest.approx([-1.0]) and deg == 1
    alpha, _ = boundary_point([PAULI["Z"]], [-1.0])
    assert alpha == pytest.approx([1.0])


def test_direction_must_be_unit():
    with pytest.raises(ValueError):
        boundary_point([PAULI["Z"]], [2.0])
    with pytest.raises(ValueError):
        boundary_point([PAULI["Z"]], [0.0])
    with pytest.raises(ValueError):
        ground_space_of([PAULI["Z"]], [0.6, 0.8])


def test_ex1_face_is_a_point():
    F = catalog.degenerate_coupled_pair()
    alpha, deg = boundary_point(F, [-1.0, 0.0])
    assert np.allclose(alpha, [1, 1]) and deg == 2
    face = face_at_direction(F, [-1.0, 0.0])
    assert face.dimension_estimate == 0 and face.degeneracy == 2


def test_ex2_face_is_a_segment():
    face = face_at_direction(catalog.degenerate_split_pair(), [-1.0, 0.0], n_face_samples=300)
    assert face.dimension_estimate == 1
    assert np.allclose(face.extreme_images[:, 0], 1)
    assert face.extreme_images[:, 1].min() < 0.05 and face.extreme_images[:, 1].max() > 0.95


def test_commuting_range_is_the_convex_hull_of_diagonals():
    sample = sample_boundary(catalog.commuting_pair(), 360)
    hull = ConvexHull(sample.alphas())
    verts = sorted(tuple(np.round(sample.alphas()[i], 9) + 0.0) for i in hull.vertices)
    assert verts == sorted([(1.0, 1.0), (1.0, 0.0), (-1.0, -1.0)])


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_random_states_lie_in_sampled_range(seed, d):
    rng = np.random.default_rng(seed)
    F = [random_hermitian(d, rng) for _ in range(2)]
    sample = sample_boundary(F, 360, rng=rng)
    queries = []
    for _ in range(50):
        rho = random_density_matrix(d, rng)
        queries.append([expectation(rho, f) for f in F])
    # the grid polygon is inscribed, so allow the chord deficit at 1-degree spacing
    spread = np.ptp(sample.alphas(), axis=0).max()
    assert hull_contains(sample.alphas(), np.array(queries)).min() >= -2e-4 * spread


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.integers(8, 40))
def test_supporting_hyperplane(seed, r, res):
    rng = np.random.default_rng(seed)
    F = [random_hermitian(3, rng) for _ in range(r)]
    theta = rng.standard_normal(r)
    theta /= np.linalg.norm(theta)
    alpha, _ = boundary_point(F, theta)
    rho = random_density_matrix(3, rng)
    assert theta @ [expectation(rho, f) for f in F] >= theta @ alpha - 1e-10
    dirs = direction_grid(r, res, rng)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1)


def test_direction_grid_shapes():
    assert direction_grid(1, 8).shape == (2, 1)
    assert direction_grid(2, 12).shape == (12, 2)
    assert direction_grid(3, 8).shape == (5 * 8, 3)
    assert direction_grid(4, 10).shape == (10, 4)
    with pytest.raises(ValueError):
        direction_grid(2, 4)


def test_points_csv(tmp_path):
    sample = sample_boundary(catalog.degenerate_coupled_pair(), 8, n_face_samples=5)
    path = tmp_path / "points.csv"
    write_points_csv(sample, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "theta_1,theta_2,angle,alpha_1,alpha_2,degeneracy,face_id"
    assert len(lines) == len(sample.points) + 1
    assert any(line.endswith(",2,0") for line in lines)
    with pytest.raises(ValueError):
        sample_boundary([np.eye(2), np.eye(3)], 8)


def test_direction_angles_invert_the_grid():
    dirs = direction_grid(3, 12)
    for theta in dirs[::7]:
        polar, azimuth = direction_angles(theta)
        rebuilt = [np.cos(polar), np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth)]
        assert np.allclose(rebuilt, theta, atol=1e-12)
    assert direction_angles([0.0, -1.0]) == [pytest.approx(1.5 * np.pi)]
    assert direction_angles([1.0]) == []
