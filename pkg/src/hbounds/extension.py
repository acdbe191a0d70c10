"""Extension of eight octant configurations to the interior of a prism.

The prism is cut into corner pyramids X^a (apex at the vertex, base the
cleaved triangle), origin pyramids Y^a (apex at the centre, same base) and
face pyramids Z^{j tau} (apex at the centre, base the rhombus spanned by
the edge midpoints of a face).

* In X^a the field is constant along rays from the vertex.
* In Y^a it is constant along rays from the centre.
* In Z it interpolates the in-face boundary trace, tilting toward the face
  normal inside a layer of relative thickness sigma.

All three energies are evaluated by quadrature of the exact construction.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from .errors import EdgeEnergyTooSmall, TraceMismatch, WindingAmbiguous, WindingNonzero
from .geometry import cleaved_face, truncated_face
from .quadrature import (QuadratureSpec, QuadResult, E2_NORM, adaptive_1d, adaptive_2d, energy_E1,
                         integrate_field)

EDGE_FLOOR = math.pi / 8
CORNER_TOL = 1e-6
PRISM_FACES = ((0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1))


# ----------------------------------------------------------------------
# X and Y pyramids

def _cone_weights(prism, a):
    cf = cleaved_face(prism, a)
    C = cf.normal
    Cn = np.linalg.norm(C)
    return cf, C, C / Cn


def energy_X(fld, prism, a, spec=None, weight="ray"):
    """Energy in the corner pyramid at vertex ``a``.

    ``fld`` is the vertex field in global coordinates. The field is
    constant along rays from the vertex, so the energy is the octant
    density weighted by the ray length to the cleaved face. ``weight="one"``
    drops the ray length (giving the octant energy itself).
    """
    _, C, _ = _cone_weights(prism, a)

    def integrand(cs):
        dens = cs.energy_density()
        if weight == "one":
            return dens
        return dens / np.abs(cs.s @ C)

    r = integrate_field(fld, integrand, spec)
    return QuadResult(float(r.value[0]), float(r.error[0]), r.converged)


def _y_density(prism, a):
    cf, C, Ch = _cone_weights(prism, a)
    h = cf.h
    v = cf.apex
    PC = np.eye(3) - np.outer(Ch, Ch)

    def dens(cs):
        s = cs.s
        r = 1.0 / np.abs(s @ C)
        G = cs.jacobian() / r[:, None, None]
        c = v[None, :] + r[:, None] * s
        ct = c - h * Ch[None, :]
        t1 = np.sum((G @ PC) ** 2, axis=(1, 2))
        Gc = np.einsum("nij,nj->ni", G, ct)
        t2 = np.sum(Gc * Gc, axis=1) / h**2
        jac = r * r / np.abs(s @ Ch)
        return h * (t1 + t2) * jac * cs.area
    return dens


def energy_Y(fld, prism, a, spec=None):
    """Energy in the origin pyramid over the cleaved face at vertex ``a``.

    The field is constant along rays from the centre, with values given by
    the corner-pyramid field on the cleaved face. The integral is pulled
    back to the octant of directions at the vertex.
    """
    r = integrate_field(fld, _y_density(prism, a), spec)
    return QuadResult(float(r.value[0]), float(r.error[0]), r.converged)


def vertex_energies(fld, prism, a, spec=None):
    """``(E2, E_X, E_Y)`` of a vertex field from one quadrature pass."""
    _, C, _ = _cone_weights(prism, a)
    ydens = _y_density(prism, a)

    def integrand(cs):
        e = cs.energy_density()
        return np.stack([E2_NORM * e, e / np.abs(cs.s @ C), ydens(cs)])

    r = integrate_field(fld, integrand, spec)
    return tuple(QuadResult(float(r.value[i]), float(r.error[i]), r.converged) for i in range(3))


# ----------------------------------------------------------------------
# face traces

def _quadrant_vertices(prism, tf):
    """Vertex owning each quadrant of the truncated face, in phi order."""
    out = []
    for q in range(4):
        mid = (q + 0.5) * np.pi / 2
        want = (np.sign(np.cos(mid)), np.sign(np.sin(mid)))
        for a in tf.vertices_on_face(prism):
            loc = tf.frame @ prism.vertex(a)
            if (np.sign(loc[0]), np.sign(loc[1])) == want:
                out.append(a)
                break
    return out


class ThetaTrace:
    """Continuous angle of the in-face trace around a truncated face.

    The trace is ``n = sin(Theta) k + eps cos(Theta) l`` in the face frame,
    with ``eps`` fixed so that ``Theta(0) = 0``.
    """

    def __init__(self, prism, fields, axis, tau, samples=2048, max_samples=1 << 16):
        self.prism = prism
        self.face = truncated_face(prism, axis, tau)
        self.fields = fields
        self.quadrant_vertex = _quadrant_vertices(prism, self.face)
        n0 = self._trace_local(np.array([0.0]), 0)[0]
        self.eps = 1 if n0[1] > 0 else -1
        while True:
            phis, thetas, ok = self._table(samples)
            if ok:
                break
            samples *= 2
            if samples > max_samples:
                raise WindingAmbiguous("face trace could not be unwrapped")
        self._phi, self._theta = phis, thetas
        self.closure = float(thetas[-1] - thetas[0])
        if abs(self.closure) > 1e-6:
            raise WindingNonzero(f"trace angle changes by {self.closure:.6g} around the face")
        corners = np.arange(5) * np.pi / 2
        self.corner_values = np.interp(corners, phis, thetas)

    def _points(self, phi, q):
        a = self.quadrant_vertex[q]
        x = self.face.boundary_point(phi)
        d = x - self.prism.vertex(a)[None, :]
        dist = np.linalg.norm(d, axis=1)
        return a, x, d / dist[:, None], dist

    def _trace_local(self, phi, q):
        a, _, s, _ = self._points(phi, q)
        return self.fields[a].values_dirs(s) @ self.face.frame.T

    def _raw(self, phi, q):
        n = self._trace_local(phi, q)
        return np.arctan2(n[:, 0], self.eps * n[:, 1]), n

    def _table(self, samples):
        phis, raws = [], []
        prev_end = None
        for q in range(4):
            ph = np.linspace(q * np.pi / 2, (q + 1) * np.pi / 2, samples + 1)
            raw, n = self._raw(ph, q)
            if np.max(np.abs(n[:, 2])) > CORNER_TOL:
                raise TraceMismatch(f"trace leaves the face plane in quadrant {q}")
            if prev_end is not None and np.linalg.norm(n[0] - prev_end) > CORNER_TOL:
                raise TraceMismatch(f"traces disagree at the corner phi = {q}*pi/2")
            prev_end = n[-1]
            if q < 3:
                ph, raw = ph[:-1], raw[:-1]
            phis.append(ph)
            raws.append(raw)
        first = self._trace_local(np.array([0.0]), 0)[0]
        if np.linalg.norm(first - prev_end) > CORNER_TOL:
            raise TraceMismatch("traces disagree at the corner phi = 0")
        phis = np.concatenate(phis)
        raws = np.concatenate(raws)
        steps = np.diff(raws)
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        ok = np.max(np.abs(steps)) < np.pi / 4
        theta = np.concatenate([[raws[0]], raws[0] + np.cumsum(steps)])
        return phis, theta, ok

    def _quadrant(self, phi):
        return np.clip((np.asarray(phi) // (np.pi / 2)).astype(int), 0, 3)

    def __call__(self, phi):
        return self.evaluate(phi)[0]

    def evaluate(self, phi):
        """``(Theta, Theta')`` at the given angles."""
        phi = np.atleast_1d(np.asarray(phi, float))
        th = np.empty_like(phi)
        dth = np.empty_like(phi)
        quad = self._quadrant(phi)
        for q in range(4):
            m = quad == q
            if not np.any(m):
                continue
            a, x, s, dist = self._points(phi[m], q)
            cs = self.fields[a].sample_dirs(s)
            n = cs.nu @ self.face.frame.T
            raw = np.arctan2(n[:, 0], self.eps * n[:, 1])
            ref = np.interp(phi[m], self._phi, self._theta)
            th[m] = raw + 2 * np.pi * np.round((ref - raw) / (2 * np.pi))
            R, dR = self.face.R(phi[m]), self.face.dR(phi[m])
            c, sn = np.cos(phi[m]), np.sin(phi[m])
            dx_loc = np.stack([dR * c - R * sn, dR * sn + R * c, np.zeros_like(R)], axis=-1)
            dx = dx_loc @ self.face.frame
            ds = (dx - np.sum(dx * s, axis=1)[:, None] * s) / dist[:, None]
            dn = np.einsum("nij,nj->ni", cs.jacobian(), ds) @ self.face.frame.T
            dth[m] = -self.eps * (n[:, 0] * dn[:, 1] - n[:, 1] * dn[:, 0])
        return th, dth

    def quadrant_changes(self):
        return tuple(float(x) for x in np.diff(self.corner_values))


def boundary_theta(prism, fields, axis, tau, samples=2048):
    """Continuous trace angle on the truncated face with normal ``tau e_axis``."""
    return ThetaTrace(prism, fields, axis, tau, samples)


def sigma_param(edge_energies):
    """Layer thickness ``(pi * sum E1)^(-1/2)`` for one face."""
    tot = float(sum(edge_energies))
    if tot < EDGE_FLOOR * (1 - 1e-12):
        raise EdgeEnergyTooSmall(f"face edge energy {tot} is below pi/8")
    return (math.pi * tot) ** -0.5


# ----------------------------------------------------------------------
# Z pyramids

def _phi_fn(pr):
    """Twisting profile gamma and its partials on the (h, xi) square."""
    s = pr

    def fn(h, xi):
        a = (1 - h) / s
        b = (1 - xi) / s
        Pa, Pb = np.minimum(a, 1.0), np.minimum(b, 1.0)
        g = Pa * Pb * np.pi / 2
        gh = np.where(a < 1, -1.0 / s, 0.0) * Pb * np.pi / 2
        gx = np.where(b < 1, -1.0 / s, 0.0) * Pa * np.pi / 2
        return g, gh, gx
    return fn


def twist_moments(sigma, spec=None):
    """The six (h, xi) integrals entering the face-pyramid energy.

    Returns, in order, the integrals over the unit square of
    ``xi cos^2 g``, ``h^2 g_h^2 xi``, ``h g_h g_xi xi^2``, ``xi g_xi^2``,
    ``xi^3 cos^2 g`` and ``xi^3 g_xi^2``.
    """
    spec = spec or QuadratureSpec(rtol=1e-10, atol=1e-14)
    fn = _phi_fn(sigma)

    def f(h, xi):
        g, gh, gx = fn(h, xi)
        c2 = np.cos(g) ** 2
        return np.stack([xi * c2, h * h * gh * gh * xi, h * gh * gx * xi * xi,
                         xi * gx * gx, xi**3 * c2, xi**3 * gx * gx]), None

    cut = 1 - sigma
    edges = [0.0, cut, 1.0] if 0 < cut < 1 else [0.0, 1.0]
    tot = np.zeros(6)
    err = np.zeros(6)
    conv = True
    for h0, h1 in zip(edges[:-1], edges[1:]):
        for x0, x1 in zip(edges[:-1], edges[1:]):
            r = adaptive_2d(f, (h0, h1, x0, x1), spec)
            tot += r.value
            err += r.error
            conv &= r.converged
    return tot, err, conv


def trace_moments(theta, spec=None):
    """The six phi integrals of the face-pyramid energy.

    ``Theta'^2``, ``R^2``, ``(R'/R) Theta Theta'``, ``(1 + R'^2/R^2) Theta^2``,
    ``1 + R'^2/R^2`` and ``R^2 Theta^2``.
    """
    spec = spec or QuadratureSpec(rtol=1e-10, atol=1e-13)
    face = theta.face

    def f(phi):
        th, dth = theta.evaluate(phi)
        R, dR = face.R(phi), face.dR(phi)
        q = dR / R
        return np.stack([dth**2, R * R, q * th * dth, (1 + q * q) * th**2, 1 + q * q,
                         R * R * th**2])

    breaks = [k * np.pi / 2 for k in range(1, 4)]
    r = adaptive_1d(f, 0.0, 2 * np.pi, spec, breaks=breaks)
    return r.value, r.error, r.converged


@dataclass
class ZEnergy:
    total: float
    terms: tuple
    error: float
    sigma: float
    converged: bool = True

    def to_dict(self):
        return {"total": self.total, "terms": list(self.terms), "error": self.error,
                "sigma": self.sigma}


# (term, coefficient power of l_z, factor, twist moment, trace moment)
_Z_PRODUCTS = (
    (0, 1, 1.0, 0, 0),
    (1, -1, 1.0, 1, 1),
    (2, -1, -2.0, 2, 1),
    (3, 1, -2.0, 0, 2),
    (4, 1, 1.0, 0, 3),
    (4, 1, 1.0, 3, 4),
    (4, -1, 1.0, 4, 5),
    (4, -1, 1.0, 5, 1),
)


def energy_Z(theta, sigma, spec=None):
    """Energy of the face pyramid over ``theta.face`` with layer ``sigma``.

    The density separates into products of (h, xi) and phi integrals.
    Returns a :class:`ZEnergy` whose ``terms`` are the five contributions
    (trace rotation, two tilt terms, cross term, remainder).
    """
    lz = theta.face.local_half_lengths[2]
    A, Ae, ca = twist_moments(sigma)
    B, Be, cb = trace_moments(theta, spec)
    terms = [[] for _ in range(5)]
    err = 0.0
    for t, p, c, i, j in _Z_PRODUCTS:
        f = c * lz**p
        terms[t].append(f * A[i] * B[j])
        err += abs(f) * (Ae[i] * abs(B[j]) + abs(A[i]) * Be[j])
    terms = tuple(math.fsum(x) for x in terms)
    return ZEnergy(math.fsum(terms), terms, err, float(sigma), ca and cb)


def z_integrand(theta, sigma, h, xi, phi):
    """Pointwise face-pyramid energy density in (h, xi, phi) coordinates."""
    lz = theta.face.local_half_lengths[2]
    g, gh, gx = _phi_fn(sigma)(h, xi)
    th, dth = theta.evaluate(phi)
    R, dR = theta.face.R(phi), theta.face.dR(phi)
    c2 = np.cos(g) ** 2
    i1 = lz * c2 * xi * dth**2
    i2 = h * h / lz * gh**2 * xi * R * R
    i3 = -2 * h / lz * gh * gx * xi * xi * R * R
    i4 = -2 * lz * c2 * xi * dR / R * th * dth
    i5 = (lz * xi * (1 + dR**2 / R**2) + xi**3 * R * R / lz) * (c2 * th**2 + gx**2)
    return i1 + i2 + i3 + i4 + i5


def z_field(theta, sigma, h, xi, phi):
    """Field value (global frame) at face-pyramid coordinates."""
    g, _, _ = _phi_fn(sigma)(h, xi)
    th = theta(phi)
    loc = np.stack([np.cos(g) * np.sin(xi * th), np.cos(g) * theta.eps * np.cos(xi * th),
                    np.sin(g)], axis=-1)
    return loc @ theta.face.frame


def z_point(theta, h, xi, phi):
    """Global position of face-pyramid coordinates."""
    face = theta.face
    R = face.R(phi)
    lz = face.local_half_lengths[2]
    loc = np.stack([h * xi * R * np.cos(phi), h * xi * R * np.sin(phi), lz * h * np.ones_like(R)],
                   axis=-1)
    return loc @ face.frame


# ----------------------------------------------------------------------
# assembly

@dataclass
class UpperBoundReport:
    E_X: dict
    E_Y: dict
    E_Z: dict
    E_total: float
    E_minus: float
    ratio: float
    kappa: float
    functional: float
    E2: dict = field(default_factory=dict)
    E1: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    error: float = 0.0
    converged: bool = True

    def to_dict(self):
        return {"E_total": self.E_total, "E_X": {str(k): v for k, v in self.E_X.items()},
                "E_Y": {str(k): v for k, v in self.E_Y.items()},
                "E_Z": {k: v.to_dict() for k, v in self.E_Z.items()},
                "E_minus": self.E_minus, "ratio": self.ratio, "kappa": self.kappa,
                "functional": self.functional, "error": self.error,
                "converged": self.converged}


def face_name(axis, tau):
    return ("+" if tau > 0 else "-") + "xyz"[axis]


def vertex_edge_energies(fld, spec=None):
    """Edge energies of a vertex field about each coordinate axis."""
    base = getattr(fld, "base", fld)
    return tuple(energy_E1(base, j, spec).value for j in range(3))


def worker_count(workers=None):
    """Worker threads: explicit value, else ``HB_THREADS``, else 1."""
    if workers is None:
        workers = int(os.environ.get("HB_THREADS", "1") or 1)
    return max(1, int(workers))


def extend_and_bound(prism, fields, spec=None, topology=None, partition=None, e_minus=None,
                     workers=None):
    """Extend eight vertex fields to the prism and report the energy.

    Parameters
    ----------
    prism : Prism
    fields : list of VertexField
        Vertex fields in global coordinates, indexed by vertex.
    topology : TangentTopology, optional
        Used for the lower bound; computed numerically when omitted.
    e_minus : float, optional
        Precomputed lower bound.
    workers : int, optional
        Threads for the per-vertex and per-face integrals. Results are
        collected in vertex then face order, so they do not depend on it.
    """
    from .connection import lower_bound_energy
    from .quadrature import wrapping_numbers_numeric
    from .sectors import enumerate_sectors
    from .topology import TangentTopology

    thetas = {}
    for axis, tau in PRISM_FACES:
        thetas[(axis, tau)] = boundary_theta(prism, fields, axis, tau)

    def per_vertex(a):
        return vertex_energies(fields[a], prism, a, spec), vertex_edge_energies(fields[a], spec)

    with ThreadPoolExecutor(worker_count(workers)) as pool:
        vres = list(pool.map(per_vertex, range(8)))
    EX, EY, E2, E1 = {}, {}, {}, {}
    err = 0.0
    conv = True
    for a, ((r2, rx, ry), e1) in enumerate(vres):
        EX[a], EY[a], E2[a], E1[a] = rx.value, ry.value, r2.value, e1
        err += rx.error + ry.error
        conv &= rx.converged and ry.converged

    def per_face(key):
        th = thetas[key]
        verts = th.face.vertices_on_face(prism)
        s = sigma_param([E1[a][key[0]] for a in verts])
        return energy_Z(th, s, spec)

    with ThreadPoolExecutor(worker_count(workers)) as pool:
        zres = list(pool.map(per_face, PRISM_FACES))
    EZ, sig = {}, {}
    for (axis, tau), z in zip(PRISM_FACES, zres):
        EZ[face_name(axis, tau)] = z
        sig[face_name(axis, tau)] = z.sigma
        err += z.error
        conv &= z.converged
    total = math.fsum(list(EX.values()) + list(EY.values()) + [z.total for z in EZ.values()])
    if e_minus is None:
        partition = partition or enumerate_sectors(prism.polyhedron)
        if topology is None:
            w = {a: wrapping_numbers_numeric(fields[a], partition)["w"] for a in range(8)}
            topology = TangentTopology({a: {s: v for s, v in d.items() if v} for a, d in w.items()})
        e_minus = lower_bound_energy(prism.polyhedron, partition, topology)["E_minus"]
    Lz = 2 * prism.lz
    kap = prism.kappa
    functional = kap**3 * Lz * (sum(E2.values()) + sum(math.sqrt(x) for v in E1.values() for x in v))
    ratio = total / e_minus if e_minus > 0 else math.inf
    return UpperBoundReport(EX, EY, EZ, total, float(e_minus), ratio, kap, functional,
                            E2, E1, sig, err, conv)
