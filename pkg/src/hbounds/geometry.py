"""Convex polyhedra, vertex stars and rectangular-prism geometry.

All predicates use tolerances relative to the polyhedron diameter.
Objects are immutable once built and safe to share between threads.
"""

from dataclasses import dataclass, field
import itertools
import json

import numpy as np

from .errors import (
    BadOrdering,
    DegenerateFace,
    GeometryError,
    NonConvex,
    NonPlanarFace,
    NonPositive,
    OutsideCone,
)

REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """A validated convex polyhedron.

    Attributes
    ----------
    vertices : ndarray, shape (V, 3)
    faces : tuple of tuple of int
        Vertex-index cycles, oriented counterclockwise seen from outside.
    face_normals : ndarray, shape (F, 3)
        Unit outward normals.
    vertex_stars : tuple of tuple of int
        For each vertex, the neighbouring vertex indices ordered so that
        ``cross(E[r+1], E[r])`` points along an outward face normal, where
        ``E[r]`` is the unit vector from the vertex to its r-th neighbour.
    star_faces : tuple of tuple of int
        ``star_faces[a][r]`` is the face containing star edges r and r+1.
    """

    vertices: np.ndarray
    faces: tuple
    face_normals: np.ndarray
    vertex_stars: tuple
    star_faces: tuple
    diameter: float
    centroid: np.ndarray

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def face_offsets(self):
        """Plane offsets d_c with F_c . x <= d_c inside."""
        return np.array([self.face_normals[c] @ self.vertices[f[0]]
                         for c, f in enumerate(self.faces)])

    def face_area_vectors(self):
        """Area-weighted outward normals (Newell vectors / 2)."""
        return np.array([0.5 * _newell(self.vertices[list(f)]) for f in self.faces])

    def star_edges(self, a):
        """Unit edge vectors E^r at vertex ``a`` in star order."""
        v = self.vertices[a]
        out = []
        for b in self.vertex_stars[a]:
            d = self.vertices[b] - v
            out.append(d / np.linalg.norm(d))
        return np.array(out)

    def edges(self):
        """Sorted list of undirected edges (i, j) with i < j."""
        es = set()
        for f in self.faces:
            for i in range(len(f)):
                p, q = f[i], f[(i + 1) % len(f)]
                es.add((min(p, q), max(p, q)))
        return sorted(es)


def _newell(pts):
    n = np.zeros(3)
    m = len(pts)
    for i in range(m):
        p, q = pts[i], pts[(i + 1) % m]
        n[0] += (p[1] - q[1]) * (p[2] + q[2])
        n[1] += (p[2] - q[2]) * (p[0] + q[0])
        n[2] += (p[0] - q[0]) * (p[1] + q[1])
    return n


def build_polyhedron(vertices, faces):
    """Validate vertex/face data and build a :class:`Polyhedron`.

    Parameters
    ----------
    vertices : array_like, shape (V, 3)
    faces : sequence of sequence of int
        Index cycles. Orientation is normalised to outward.

    Raises
    ------
    NonConvex, NonPlanarFace, DegenerateFace, GeometryError
    """
    V = np.array(vertices, dtype=float)
    if V.ndim != 2 or V.shape[1] != 3 or len(V) < 4:
        raise GeometryError("need at least 4 vertices in 3D")
    faces = [tuple(int(i) for i in f) for f in faces]
    if len(faces) < 4:
        raise GeometryError("need at least 4 faces")
    for f in faces:
        if len(f) < 3 or len(set(f)) != len(f) or min(f) < 0 or max(f) >= len(V):
            raise GeometryError(f"invalid face cycle {f}")
    diam = max(np.linalg.norm(p - q) for p, q in itertools.combinations(V, 2))
    if diam <= 0:
        raise GeometryError("zero diameter")
    centroid = V.mean(axis=0)
    tol = REL_TOL * diam

    normals = []
    oriented = []
    for f in faces:
        pts = V[list(f)]
        nw = _newell(pts)
        norm = np.linalg.norm(nw)
        if norm <= tol * diam:
            raise DegenerateFace(f"face {f} has (near) zero area")
        n = nw / norm
        if n @ (pts.mean(axis=0) - centroid) < 0:
            n = -n
            f = tuple(reversed(f))
        off = n @ pts[0]
        if np.max(np.abs(pts @ n - off)) > tol:
            raise NonPlanarFace(f"face {f} is not planar")
        # polish so the normal is unit to rounding
        n = n / np.linalg.norm(n)
        normals.append(n)
        oriented.append(f)
    normals = np.array(normals)

    for c, f in enumerate(oriented):
        off = normals[c] @ V[f[0]]
        if np.max(V @ normals[c] - off) > tol:
            raise NonConvex(f"a vertex lies outside the plane of face {c}")

    stars, star_faces = _vertex_stars(V, oriented, normals, centroid)
    return Polyhedron(vertices=V, faces=tuple(oriented), face_normals=normals,
                      vertex_stars=stars, star_faces=star_faces,
                      diameter=float(diam), centroid=centroid)


def _vertex_stars(V, faces, normals, centroid):
    nbrs = [set() for _ in V]
    for f in faces:
        for i in range(len(f)):
            p, q = f[i], f[(i + 1) % len(f)]
            nbrs[p].add(q)
            nbrs[q].add(p)
    stars, star_faces = [], []
    for a, v in enumerate(V):
        nb = sorted(nbrs[a])
        if len(nb) < 3:
            raise GeometryError(f"vertex {a} has fewer than 3 edges")
        d = centroid - v
        d /= np.linalg.norm(d)
        E = np.array([(V[b] - v) / np.linalg.norm(V[b] - v) for b in nb])
        # right-handed angular order about the interior ray
        ref = E[0] - (E[0] @ d) * d
        ref /= np.linalg.norm(ref)
        ref2 = np.cross(d, ref)
        ang = np.arctan2(E @ ref2, E @ ref)
        order = [nb[i] for i in np.argsort(ang, kind="stable")]
        fs = _star_face_ids(V, a, order, faces, normals)
        if fs is None:
            order = order[::-1]
            fs = _star_face_ids(V, a, order, faces, normals)
        if fs is None:
            raise GeometryError(f"cannot order the star of vertex {a}")
        stars.append(tuple(order))
        star_faces.append(tuple(fs))
    return tuple(stars), tuple(star_faces)


def _star_face_ids(V, a, order, faces, normals):
    v = V[a]
    b = len(order)
    out = []
    for r in range(b):
        p, q = order[r], order[(r + 1) % b]
        e1 = (V[p] - v) / np.linalg.norm(V[p] - v)
        e2 = (V[q] - v) / np.linalg.norm(V[q] - v)
        F = np.cross(e2, e1)
        nF = np.linalg.norm(F)
        if nF < 1e-12:
            return None
        F /= nF
        hit = None
        for c, f in enumerate(faces):
            if a in f and p in f and q in f and F @ normals[c] > 1 - 1e-9:
                hit = c
                break
        if hit is None:
            return None
        out.append(hit)
    return out


def polyhedron_from_dict(data):
    """Build a polyhedron (or prism) from the JSON schema."""
    if "prism" in data:
        p = data["prism"]
        return rectangular_prism(float(p["Lx"]), float(p["Ly"]), float(p["Lz"]))
    return build_polyhedron(data["vertices"], data["faces"])


def load_polyhedron(path):
    with open(path) as fh:
        return polyhedron_from_dict(json.load(fh))


# ----------------------------------------------------------------------
# rectangular prisms

# face order: -x, +x, -y, +y, -z, +z
PRISM_FACE_AXES = ((0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1))


def vertex_signs(a):
    """Sign triple of prism vertex ``a`` (bit 2 = x, bit 1 = y, bit 0 = z)."""
    return (1 if a & 4 else -1, 1 if a & 2 else -1, 1 if a & 1 else -1)


def vertex_index(signs):
    sx, sy, sz = signs
    return 4 * (sx > 0) + 2 * (sy > 0) + (sz > 0)


@dataclass(frozen=True, eq=False)
class Prism:
    """Axis-aligned rectangular prism centred at the origin.

    Vertex ``a`` has coordinates ``signs(a) * half_lengths``; vertex 0 is
    the all-negative corner whose interior directions form the positive
    octant.
    """

    half_lengths: tuple
    polyhedron: Polyhedron = field(repr=False)

    @property
    def lx(self):
        return self.half_lengths[0]

    @property
    def ly(self):
        return self.half_lengths[1]

    @property
    def lz(self):
        return self.half_lengths[2]

    @property
    def kappa(self):
        return self.half_lengths[0] / self.half_lengths[2]

    @property
    def lengths(self):
        return tuple(2 * l for l in self.half_lengths)

    @property
    def volume(self):
        return 8 * self.lx * self.ly * self.lz

    def vertex(self, a):
        return np.array(vertex_signs(a), float) * np.array(self.half_lengths)

    def reflection(self, a):
        """Diagonal reflection mapping the positive octant onto O^a."""
        return np.diag([-float(s) for s in vertex_signs(a)])

    # convenient pass-throughs
    @property
    def vertices(self):
        return self.polyhedron.vertices

    @property
    def face_normals(self):
        return self.polyhedron.face_normals

    @property
    def faces(self):
        return self.polyhedron.faces

    @property
    def n_faces(self):
        return 6

    @property
    def vertex_stars(self):
        return self.polyhedron.vertex_stars

    @property
    def diameter(self):
        return self.polyhedron.diameter


def rectangular_prism(Lx, Ly, Lz):
    """Prism with side lengths ``Lx >= Ly >= Lz > 0``.

    Raises
    ------
    NonPositive, BadOrdering
    """
    if min(Lx, Ly, Lz) <= 0:
        raise NonPositive("side lengths must be positive")
    if not (Lx >= Ly >= Lz):
        raise BadOrdering("side lengths must satisfy Lx >= Ly >= Lz")
    l = (Lx / 2.0, Ly / 2.0, Lz / 2.0)
    verts = [np.array(vertex_signs(a), float) * l for a in range(8)]
    faces = []
    for axis, sgn in PRISM_FACE_AXES:
        ids = [a for a in range(8) if vertex_signs(a)[axis] == sgn]
        # order the four corners around the face centre
        c = np.mean([verts[i] for i in ids], axis=0)
        u, w = [k for k in range(3) if k != axis]
        ang = [np.arctan2(verts[i][w] - c[w], verts[i][u] - c[u]) for i in ids]
        faces.append([ids[i] for i in np.argsort(ang)])
    poly = build_polyhedron(verts, faces)
    return Prism(half_lengths=l, polyhedron=poly)


@dataclass(frozen=True)
class CleavedFace:
    """Triangle through the midpoints of the three edges at a prism vertex.

    ``normal`` is the unnormalised outward normal C with ``C . c = 2`` on
    the triangle; ``h`` is its distance from the origin.
    """

    vertex: int
    apex: np.ndarray
    corners: np.ndarray
    normal: np.ndarray
    h: float


def cleaved_face(prism, a):
    v = prism.vertex(a)
    corners = []
    for j in range(3):
        c = v.copy()
        c[j] = 0.0
        corners.append(c)
    C = 1.0 / v
    return CleavedFace(vertex=a, apex=v, corners=np.array(corners), normal=C,
                       h=float(2.0 / np.linalg.norm(C)))


def in_octant_cone(prism, a, s, tol=1e-12):
    """True if direction(s) ``s`` point from vertex ``a`` into the prism."""
    s = np.asarray(s, float)
    sg = -np.array(vertex_signs(a), float)
    return np.all(s * sg >= -tol, axis=-1)


def ray_exit_distance(cf, s):
    """Distance from the vertex to the cleaved face along direction ``s``.

    Parameters
    ----------
    cf : CleavedFace
    s : array_like, shape (..., 3)
        Unit directions in the closed octant cone at the vertex.

    Returns
    -------
    ndarray
        ``1 / |C . s|``.
    """
    s = np.asarray(s, float)
    sg = -np.sign(cf.apex)
    if np.any(s * sg < -1e-12):
        raise OutsideCone("direction does not point into the prism")
    return 1.0 / np.abs(s @ cf.normal)


@dataclass(frozen=True)
class TruncatedFace:
    """Rhombus on a prism face spanned by the four edge midpoints.

    ``frame`` maps global coordinates to the face-local frame in which
    the face is ``z = +c`` and ``(a, b, c)`` are local half-lengths.
    """

    axis: int
    tau: int
    frame: np.ndarray
    local_half_lengths: tuple
    corners: np.ndarray

    def R(self, phi):
        a, b, _ = self.local_half_lengths
        phi = np.asarray(phi, float)
        return a * b / (b * np.abs(np.cos(phi)) + a * np.abs(np.sin(phi)))

    def dR(self, phi):
        """Derivative of R, valid away from multiples of pi/2."""
        a, b, _ = self.local_half_lengths
        phi = np.asarray(phi, float)
        c, s = np.cos(phi), np.sin(phi)
        den = b * np.abs(c) + a * np.abs(s)
        dden = -b * np.sign(c) * s + a * np.sign(s) * c
        return -a * b * dden / den**2

    def boundary_point(self, phi):
        """Global coordinates of the rhombus boundary point at angle phi."""
        phi = np.asarray(phi, float)
        r = self.R(phi)
        loc = np.stack([r * np.cos(phi), r * np.sin(phi),
                        np.full_like(r, self.local_half_lengths[2])], axis=-1)
        return loc @ self.frame  # frame is orthogonal: global = frame.T @ loc

    def vertices_on_face(self, prism):
        return [a for a in range(8) if vertex_signs(a)[self.axis] == self.tau]


def truncated_face(prism, axis, tau):
    """Truncated face on the prism face with outward normal ``tau * e_axis``."""
    k, l = (axis + 1) % 3, (axis + 2) % 3
    P = np.zeros((3, 3))
    P[0, k] = 1.0
    P[1, l] = 1.0
    P[2, axis] = float(tau)
    hl = prism.half_lengths
    loc = (hl[k], hl[l], hl[axis])
    corners_loc = np.array([[loc[0], 0, loc[2]], [0, loc[1], loc[2]],
                            [-loc[0], 0, loc[2]], [0, -loc[1], loc[2]]])
    return TruncatedFace(axis=axis, tau=int(tau), frame=P,
                         local_half_lengths=loc, corners=corners_loc @ P)


def pyramid_volumes(prism):
    """Volumes of the vertex, origin and face pyramids.

    Returns
    -------
    dict
        ``{"X": [...8], "Y": [...8], "Z": [...6]}``.
    """
    lx, ly, lz = prism.half_lengths
    X = [lx * ly * lz / 6.0] * 8
    Y = []
    for a in range(8):
        cf = cleaved_face(prism, a)
        c = cf.corners
        area = 0.5 * np.linalg.norm(np.cross(c[1] - c[0], c[2] - c[0]))
        Y.append(cf.h * area / 3.0)
    Z = []
    for axis in range(3):
        for tau in (-1, 1):
            tf = truncated_face(prism, axis, tau)
            a, b, c = tf.local_half_lengths
            Z.append(2 * a * b * c / 3.0)
    return {"X": X, "Y": Y, "Z": Z}


def pyramid_of_point(prism, x):
    """Label the pyramid containing point ``x`` (for membership checks).

    Returns ``("X", a)``, ``("Y", a)`` or ``("Z", face_index)``.
    """
    x = np.asarray(x, float)
    l = np.array(prism.half_lengths)
    # vertex pyramid: beyond the cleaved plane of the vertex in x's octant
    sg = np.where(x >= 0, 1, -1)
    a = vertex_index(tuple(sg))
    cf = cleaved_face(prism, a)
    if x @ cf.normal > 2.0:
        return ("X", a)
    # face pyramids: cone from origin over each rhombus
    t = np.abs(x) / l
    j = int(np.argmax(t))
    tau = 1 if x[j] >= 0 else -1
    k, m = (j + 1) % 3, (j + 2) % 3
    if t[j] > 0 and (t[k] + t[m]) / t[j] <= 1.0:
        return ("Z", PRISM_FACE_AXES.index((j, tau)))
    return ("Y", a)
