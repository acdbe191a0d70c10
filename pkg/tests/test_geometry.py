import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hbounds.errors import BadOrdering, NonConvex, NonPlanarFace, NonPositive, OutsideCone
from hbounds.geometry import (build_polyhedron, cleaved_face, polyhedron_from_dict,
                              pyramid_of_point, pyramid_volumes, ray_exit_distance,
                              rectangular_prism, truncated_face, vertex_index, vertex_signs)

from conftest import octahedron, tetrahedron


def test_cube_faces_and_normals(cube):
    P = cube.polyhedron
    assert P.n_vertices == 8 and P.n_faces == 6
    for c, f in enumerate(P.faces):
        centre = P.vertices[list(f)].mean(axis=0)
        assert centre @ P.face_normals[c] > 0
    assert np.allclose(np.linalg.norm(P.face_normals, axis=1), 1.0)


def test_face_orientation_is_normalised():
    # reversed input cycles come back outward
    T = tetrahedron()
    V = T.vertices
    T2 = build_polyhedron(V, [list(reversed(f)) for f in T.faces])
    assert np.allclose(T.face_normals, T2.face_normals)


@pytest.mark.parametrize("poly", [tetrahedron(), octahedron()])
def test_vertex_star_ordering(poly):
    for a in range(poly.n_vertices):
        E = poly.star_edges(a)
        for r in range(len(E)):
            n = np.cross(E[(r + 1) % len(E)], E[r])
            face = poly.star_faces[a][r]
            assert n @ poly.face_normals[face] > 0
            assert a in poly.faces[face]


def test_nonconvex_rejected():
    # a base dented inwards by one vertex
    V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.2, 0.2, 0.05], [0, 0, 1]]
    F = [[0, 1, 4], [1, 2, 4], [2, 0, 4], [0, 1, 3], [1, 2, 3], [2, 0, 3]]
    with pytest.raises(NonConvex):
        build_polyhedron(V, F)


def test_nonplanar_rejected():
    V = [[0, 0, 0], [1, 0, 0], [1, 1, 0.1], [0, 1, 0], [0.5, 0.5, 1]]
    F = [[0, 1, 2, 3], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    with pytest.raises(NonPlanarFace):
        build_polyhedron(V, F)


def test_prism_validation():
    with pytest.raises(BadOrdering):
        rectangular_prism(1, 2, 1)
    with pytest.raises(NonPositive):
        rectangular_prism(1, 1, 0)
    p = polyhedron_from_dict({"prism": {"Lx": 4, "Ly": 2, "Lz": 1}})
    assert p.kappa == 4 and p.lengths == (4, 2, 1)


def test_vertex_labels_roundtrip():
    for a in range(8):
        assert vertex_index(vertex_signs(a)) == a
    p = rectangular_prism(2, 1, 1)
    assert np.allclose(p.vertex(0), [-1, -0.5, -0.5])
    # the reflection maps the positive octant into the interior cone of a
    for a in range(8):
        d = p.reflection(a) @ np.ones(3)
        assert np.all(np.sign(d) == -np.array(vertex_signs(a)))


def test_cleaved_face_contains_edge_midpoints():
    p = rectangular_prism(3, 2, 1)
    for a in range(8):
        cf = cleaved_face(p, a)
        v = p.vertex(a)
        for j in range(3):
            mid = v.copy()
            mid[j] = 0.0
            assert cf.normal @ mid == pytest.approx(2.0)
        assert cf.h == pytest.approx(2 / np.linalg.norm(1 / v))
        s = -np.sign(v) / np.sqrt(3)
        hit = v + ray_exit_distance(cf, s) * s
        assert cf.normal @ hit == pytest.approx(2.0)
    with pytest.raises(OutsideCone):
        ray_exit_distance(cleaved_face(p, 0), np.array([-1.0, 0, 0]))


def test_truncated_face_rhombus():
    p = rectangular_prism(3, 2, 1)
    for axis in range(3):
        for tau in (-1, 1):
            tf = truncated_face(p, axis, tau)
            a, b, c = tf.local_half_lengths
            assert tf.R(0.0) == pytest.approx(a) and tf.R(np.pi / 2) == pytest.approx(b)
            phi = np.linspace(0, 2 * np.pi, 37)
            pts = tf.boundary_point(phi)
            assert np.allclose(pts[:, axis], tau * p.half_lengths[axis])
            # boundary lies on |x_k|/a + |x_l|/b = 1
            loc = pts @ tf.frame.T
            assert np.allclose(np.abs(loc[:, 0]) / a + np.abs(loc[:, 1]) / b, 1.0)
            # dR matches a centred difference away from the corners
            t = 0.3 + np.arange(4) * np.pi / 2
            fd = (tf.R(t + 1e-6) - tf.R(t - 1e-6)) / 2e-6
            assert np.allclose(tf.dR(t), fd, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 5.0), st.floats(0.0, 1.0), st.floats(0.2, 2.0))
def test_pyramid_volumes_partition_prism(kx, ty, lz):
    Lz = lz
    Ly = Lz * (1 + ty * (kx - 1))
    p = rectangular_prism(kx * Lz, Ly, Lz)
    vol = pyramid_volumes(p)
    total = sum(vol["X"]) + sum(vol["Y"]) + sum(vol["Z"])
    assert total == pytest.approx(p.volume, rel=1e-12)


def test_pyramid_volumes_against_point_census():
    # independent count of labelled random points
    p = rectangular_prism(3, 2, 1)
    rng = np.random.default_rng(1)
    x = (rng.random((60000, 3)) - 0.5) * np.array(p.lengths)
    counts = {"X": 0, "Y": 0, "Z": 0}
    for pt in x:
        counts[pyramid_of_point(p, pt)[0]] += 1
    vol = pyramid_volumes(p)
    for key in counts:
        frac = counts[key] / len(x)
        assert frac == pytest.approx(sum(vol[key]) / p.volume, abs=0.01)
