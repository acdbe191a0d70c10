"""Great-circle arrangement of face normals on the unit sphere.

The sectors are the open spherical polygons cut out by the great circles
orthogonal to the face normals. They are found by tracing the arcs of the
arrangement, and their areas follow from Gauss-Bonnet.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateArrangement, DegenerateTriangle, OnBoundary, OnTriangleBoundary

MERGE_TOL = 1e-10
BOUNDARY_TOL = 1e-12
SAMPLE_MARGIN = 1e-9


def sign_string(sigma):
    return "".join("+" if s > 0 else "-" for s in sigma)


def parse_sign_string(text):
    out = []
    for ch in text:
        if ch == "+":
            out.append(1)
        elif ch == "-":
            out.append(-1)
        else:
            raise ValueError(f"bad sign character {ch!r}")
    return tuple(out)


@dataclass(frozen=True)
class Sector:
    sign_vector: tuple
    area: float
    boundary: tuple  # ((circle_id, start, end), ...)
    interior_sample: np.ndarray


@dataclass(frozen=True)
class SectorPartition:
    """Nonempty sectors of a polyhedron.

    Attributes
    ----------
    circles : ndarray, shape (C, 3)
        Distinct circle normals (one per class of parallel faces).
    face_to_circle : tuple of int
    face_normals : ndarray, shape (F, 3)
    sectors : tuple of Sector
    approximate : bool
        True when the census fallback produced the areas.
    """

    circles: np.ndarray
    face_to_circle: tuple
    face_normals: np.ndarray
    sectors: tuple
    approximate: bool = False

    def __len__(self):
        return len(self.sectors)

    def sign_vectors(self):
        return [s.sign_vector for s in self.sectors]

    def area_of(self, sigma):
        for s in self.sectors:
            if s.sign_vector == tuple(sigma):
                return s.area
        raise KeyError(sigma)

    def index(self):
        return {s.sign_vector: i for i, s in enumerate(self.sectors)}

    def report(self):
        return [{"sigma": sign_string(s.sign_vector), "area": s.area,
                 "n_boundary_arcs": len(s.boundary)} for s in self.sectors]


def _unit(v):
    return v / np.linalg.norm(v)


def _distinct_circles(normals):
    circles, f2c = [], []
    for n in normals:
        for i, c in enumerate(circles):
            if abs(abs(n @ c) - 1.0) < 1e-12:
                f2c.append(i)
                break
        else:
            circles.append(np.array(n, float))
            f2c.append(len(circles) - 1)
    return np.array(circles), tuple(f2c)


def _arrangement_faces(circles):
    """Trace the faces of the arrangement.

    Returns a list of faces, each a list of (circle_id, start_point,
    end_point) arcs plus its area.
    """
    pts = []

    def add(p):
        for i, q in enumerate(pts):
            if np.linalg.norm(p - q) < MERGE_TOL:
                return i
        pts.append(p)
        return len(pts) - 1

    nc = len(circles)
    for i in range(nc):
        for j in range(i + 1, nc):
            x = np.cross(circles[i], circles[j])
            nx = np.linalg.norm(x)
            if nx < 1e-12:
                raise DegenerateArrangement("coincident circles after deduplication")
            x /= nx
            add(x)
            add(-x)
    P = np.array(pts)
    on = np.abs(P @ circles.T) < 1e-9  # (points, circles)

    # directed arcs: (u, v, circle, tangent at u, tangent at v)
    out_edges = {u: [] for u in range(len(P))}
    for c in range(nc):
        ids = np.nonzero(on[:, c])[0]
        if len(ids) < 2:
            raise DegenerateArrangement("circle meets fewer than two points")
        e1 = _unit(P[ids[0]])
        e2 = np.cross(circles[c], e1)
        ang = np.arctan2(P[ids] @ e2, P[ids] @ e1)
        order = ids[np.argsort(ang)]
        m = len(order)
        for k in range(m):
            u, v = int(order[k]), int(order[(k + 1) % m])
            # forward: counterclockwise about circles[c]
            out_edges[u].append((v, c, np.cross(circles[c], P[u]), np.cross(circles[c], P[v])))
            out_edges[v].append((u, c, -np.cross(circles[c], P[v]), -np.cross(circles[c], P[u])))

    used = set()
    faces = []
    for u0 in out_edges:
        for idx0 in range(len(out_edges[u0])):
            if (u0, idx0) in used:
                continue
            arcs, turn = [], 0.0
            u, idx = u0, idx0
            guard = 0
            while (u, idx) not in used:
                used.add((u, idx))
                v, c, t_u, t_v = out_edges[u][idx]
                arcs.append((c, P[u].copy(), P[v].copy()))
                # choose the sharpest left turn at v
                best, best_ang = None, -np.inf
                for j2, (w2, c2, s_v, _) in enumerate(out_edges[v]):
                    if w2 == u and c2 == c:
                        continue
                    a = math.atan2(P[v] @ np.cross(t_v, s_v), t_v @ s_v)
                    if a > best_ang:
                        best, best_ang = j2, a
                turn += best_ang
                u, idx = v, best
                guard += 1
                if guard > 10000:
                    raise DegenerateArrangement("face tracing did not close")
            if (u, idx) != (u0, idx0):
                raise DegenerateArrangement("face tracing did not return to start")
            faces.append((arcs, 2 * np.pi - turn))
    return faces


def _interior_sample(arcs, normals):
    c = _unit(np.sum([a[1] for a in arcs], axis=0))
    d = normals @ c
    if np.all(np.abs(d) > SAMPLE_MARGIN):
        return c
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p = _unit(c + 1e-3 * rng.standard_normal(3))
        if np.all(np.abs(normals @ p) > SAMPLE_MARGIN):
            return p
    raise DegenerateArrangement("could not find an interior sample")


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def census_partition(normals, n=200_000):
    """Sector census on a Fibonacci grid (approximate areas)."""
    normals = np.asarray(normals, float)
    circles, f2c = _distinct_circles(normals)
    X = fibonacci_sphere(n)
    S = np.sign(X @ normals.T).astype(int)
    keep = np.all(S != 0, axis=1)
    S, X = S[keep], X[keep]
    uniq, inv, counts = np.unique(S, axis=0, return_inverse=True, return_counts=True)
    inv = np.asarray(inv).ravel()
    sectors = []
    for k, sig in enumerate(uniq):
        pts = X[inv == k]
        sample = _unit(pts.mean(axis=0))
        if not np.all(np.sign(normals @ sample) == sig):
            sample = pts[0]
        sectors.append(Sector(tuple(int(s) for s in sig), 4 * np.pi * counts[k] / len(X),
                              (), sample))
    return SectorPartition(circles, f2c, normals, tuple(sectors), approximate=True)


def enumerate_sectors(polyhedron):
    """All nonempty sectors of ``polyhedron`` with exact areas.

    Falls back to a sign-vector census (flagged ``approximate``) when the
    traced arrangement fails validation.
    """
    normals = np.asarray(polyhedron.face_normals, float)
    circles, f2c = _distinct_circles(normals)
    try:
        faces = _arrangement_faces(circles)
        sectors = []
        for arcs, area in faces:
            s = _interior_sample(arcs, normals)
            sig = tuple(int(x) for x in np.sign(normals @ s))
            sectors.append(Sector(sig, float(area), tuple(arcs), s))
        total = sum(s.area for s in sectors)
        sigs = [s.sign_vector for s in sectors]
        if (abs(total - 4 * np.pi) > 1e-9 or len(set(sigs)) != len(sigs)
                or min(s.area for s in sectors) <= 0):
            raise DegenerateArrangement("arrangement failed validation")
    except DegenerateArrangement:
        return census_partition(normals)
    sectors.sort(key=lambda s: tuple(-x for x in s.sign_vector))
    return SectorPartition(circles, f2c, normals, tuple(sectors))


def sector_of(partition, s):
    """Sign vector of the sector containing unit vector ``s``."""
    d = partition.face_normals @ np.asarray(s, float)
    if np.any(np.abs(d) <= BOUNDARY_TOL):
        raise OnBoundary("direction lies on a sector boundary")
    return tuple(int(x) for x in np.sign(d))


def spherical_triangle_area_oriented(a, b, c):
    """Signed area of the spherical triangle with vertices a, b, c.

    The magnitude is the spherical excess and the sign is that of
    ``a . (b x c)``.
    """
    a, b, c = (np.asarray(x, float) for x in (a, b, c))
    det = a @ np.cross(b, c)
    if abs(det) <= 1e-12 or min(1 + a @ b, 1 + b @ c, 1 + c @ a) <= 1e-12:
        raise DegenerateTriangle("triangle is degenerate")
    return 2.0 * math.atan2(det, 1.0 + a @ b + b @ c + c @ a)


def tau_indicator(s, a, b, c):
    """Orientation sign of triangle (a, b, c) if ``s`` lies inside, else 0."""
    s, a, b, c = (np.asarray(x, float) for x in (s, a, b, c))
    o = np.sign(a @ np.cross(b, c))
    if o == 0:
        raise DegenerateTriangle("triangle is degenerate")
    sides = []
    for p, q in ((a, b), (b, c), (c, a)):
        n = np.cross(p, q)
        n /= np.linalg.norm(n)
        d = s @ n
        if abs(d) <= BOUNDARY_TOL:
            raise OnTriangleBoundary("direction lies on a side plane")
        sides.append(np.sign(d))
    return int(o) if all(x == o for x in sides) else 0
