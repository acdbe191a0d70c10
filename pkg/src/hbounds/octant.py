"""Octant configurations: maps from the positive octant of directions to S^2.

Rational conformal maps and their surgered variants are written in the
stereographic chart ``w = (s_x + i s_y) / (1 + s_z)`` on the quarter disk
Q. The (M, N) example field uses polar angles (theta, phi).

Every field exposes ``sample_dirs(s)`` returning a :class:`ChartSample`
with the value and first derivatives, and ``patches()`` describing how to
integrate over the octant.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import NoRegularPoint, ResidueViolation, WindingAmbiguous
from .topology import OctantTopology, omega_star, residue_ok

FLIP = np.array([1.0, -1.0, -1.0])  # value of the 1/F chart in the F chart frame
CORE = 1e-8  # inner radius (relative to eps) of the log-polar surgery patch


# ----------------------------------------------------------------------
# stereographic chart

def stereographic(s):
    """Project unit vectors to the extended complex plane (inf for -z)."""
    s = np.asarray(s, float)
    den = 1.0 + s[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (s[..., 0] + 1j * s[..., 1]) / den
    w = np.where(den <= 1e-300, complex(np.inf, 0), w)
    return w[()] if w.ndim == 0 else w


def inverse_stereographic(F):
    """Unit vectors from complex values; ``inf`` maps to ``-z``."""
    F = np.asarray(F, complex)
    big = ~np.isfinite(F)
    Fs = np.where(big, 0, F)
    X, Y = Fs.real, Fs.imag
    d = 1.0 + X * X + Y * Y
    out = np.stack([2 * X / d, 2 * Y / d, (1 - X * X - Y * Y) / d], axis=-1)
    out[big] = (0.0, 0.0, -1.0)
    return out


def _unit_grad_w(w):
    """Sphere gradients of Re w and Im w at the point with coordinate w."""
    s = inverse_stereographic(w)
    u, v = w.real, w.imag
    den = 1.0 + s[..., 2]
    zero = np.zeros_like(u)
    p1 = np.stack([1.0 / den, zero, -u / den], axis=-1)
    p2 = np.stack([zero, 1.0 / den, -v / den], axis=-1)
    p1 = p1 - np.sum(p1 * s, axis=-1, keepdims=True) * s
    p2 = p2 - np.sum(p2 * s, axis=-1, keepdims=True) * s
    return s, p1, p2


@dataclass
class ChartSample:
    """Field data at a batch of points, in some chart (x1, x2).

    ``d1``/``d2`` are partials of the value with respect to the chart
    coordinates, ``g1``/``g2`` the sphere gradients of the coordinates and
    ``area`` the solid angle per unit chart area. ``orient`` is +1 when the
    chart agrees with the outward orientation of the sphere.
    """

    s: np.ndarray
    nu: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    area: np.ndarray
    orient: float = 1.0

    def jacobian(self):
        """Tangential derivative J (..., 3, 3) with J s = 0."""
        return self.d1[..., :, None] * self.g1[..., None, :] + self.d2[..., :, None] * self.g2[..., None, :]

    def energy_density(self):
        """|grad nu|^2 per unit chart area."""
        a = np.sum(self.d1 * self.d1, -1) * np.sum(self.g1 * self.g1, -1)
        b = np.sum(self.d2 * self.d2, -1) * np.sum(self.g2 * self.g2, -1)
        c = 2 * np.sum(self.d1 * self.d2, -1) * np.sum(self.g1 * self.g2, -1)
        return (a + b + c) * self.area

    def signed_density(self):
        """Trapped-area density per unit chart area (package orientation)."""
        return -self.orient * np.sum(self.nu * np.cross(self.d1, self.d2), -1)


def _sample_from_values(V, Vw, Vwb, use_g, w):
    """Build a ChartSample in the (Re w, Im w) chart from chart values."""
    X, Y = V.real, V.imag
    d = 1.0 + X * X + Y * Y
    nu = np.stack([2 * X / d, 2 * Y / d, (1 - X * X - Y * Y) / d], axis=-1)
    d2 = d * d
    nX = np.stack([2 * (1 - X * X + Y * Y) / d2, -4 * X * Y / d2, -4 * X / d2], axis=-1)
    nY = np.stack([-4 * X * Y / d2, 2 * (1 + X * X - Y * Y) / d2, -4 * Y / d2], axis=-1)
    Vu = Vw + Vwb
    Vv = 1j * (Vw - Vwb)
    nu_u = nX * Vu.real[..., None] + nY * Vu.imag[..., None]
    nu_v = nX * Vv.real[..., None] + nY * Vv.imag[..., None]
    flip = np.where(use_g[..., None], FLIP, 1.0)
    s, g1, g2 = _unit_grad_w(w)
    area = 4.0 / (1.0 + np.abs(w) ** 2) ** 2
    return ChartSample(s=s, nu=nu * flip, d1=nu_u * flip, d2=nu_v * flip,
                       g1=g1, g2=g2, area=area)


# ----------------------------------------------------------------------
# integration patches

@dataclass
class Patch:
    """Rectangle in integration coordinates mapped into a field chart.

    ``point(x1, x2)`` returns ``(sample, jac)``, where ``jac`` converts the
    chart-area densities of the sample to densities in (x1, x2).
    """

    bounds: tuple
    point: object
    sign: float = 1.0
    label: str = ""


def polar_patch(sampler, center, r0, r1, t0, t1, sign=1.0, label=""):
    def point(r, t):
        w = center + r * np.exp(1j * t)
        return sampler(w), r
    return Patch((r0, r1, t0, t1), point, sign, label)


def logpolar_patch(sampler, center, r0, r1, t0, t1, sign=1.0, label=""):
    """Polar patch in log-radius, for integrands concentrated near the center."""
    def point(q, t):
        r = np.exp(q)
        return sampler(center + r * np.exp(1j * t)), r * r
    return Patch((math.log(r0), math.log(r1), t0, t1), point, sign, label)


# ----------------------------------------------------------------------
# rational conformal maps

def _sgn(x):
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class RationalMap:
    """``f = lam * w**n * A * B * C`` with real, imaginary and complex factors.

    Attributes
    ----------
    lam : int
        Overall sign.
    n : int
        Odd order of the zero or pole at the origin.
    real, imag : tuple of (float, int)
        Positions and exponents (+1 zero, -1 pole) on (0, 1) and (0, i).
    cplx : tuple of (complex, int)
        Strictly complex positions in Q and exponents.
    """

    lam: int
    n: int
    real: tuple = ()
    imag: tuple = ()
    cplx: tuple = ()

    kind = "rational"

    # -- evaluation ---------------------------------------------------
    def log_and_logderiv(self, w):
        w = np.asarray(w, complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (0.0 if self.lam > 0 else 1j * np.pi) + self.n * np.log(w)
            L = self.n / w
            w2 = w * w
            for r, p in self.real:
                a, b = w2 - r * r, r * r * w2 - 1
                logf = logf + p * (np.log(a) - np.log(b))
                L = L + p * (2 * w / a - 2 * r * r * w / b)
            for s, p in self.imag:
                a, b = w2 + s * s, s * s * w2 + 1
                logf = logf + p * (np.log(a) - np.log(b))
                L = L + p * (2 * w / a - 2 * s * s * w / b)
            for t, p in self.cplx:
                t2, tb2 = t * t, np.conj(t) ** 2
                a1, a2 = w2 - t2, w2 - tb2
                b1, b2 = t2 * w2 - 1, tb2 * w2 - 1
                logf = logf + p * (np.log(a1) + np.log(a2) - np.log(b1) - np.log(b2))
                L = L + p * (2 * w / a1 + 2 * w / a2 - 2 * t2 * w / b1 - 2 * tb2 * w / b2)
        return logf, L

    def chart_values(self, w):
        """Pole-safe values: ``(V, V_w, V_wbar, use_g)`` with V = f or 1/f."""
        logf, L = self.log_and_logderiv(w)
        use_g = np.real(logf) > 0
        with np.errstate(over="ignore", invalid="ignore"):
            V = np.exp(np.where(use_g, -logf, logf))
            Vw = np.where(use_g, -V * L, V * L)
        Vw = np.where(V == 0, 0, Vw)
        return V, Vw, np.zeros_like(V), use_g

    def __call__(self, w):
        """Plain evaluation of f (inf at poles)."""
        logf, _ = self.log_and_logderiv(w)
        with np.errstate(over="ignore"):
            return np.exp(logf)

    def derivative(self, w):
        logf, L = self.log_and_logderiv(w)
        return np.exp(logf) * L

    def sample_w(self, w):
        w = np.asarray(w, complex)
        V, Vw, Vwb, g = self.chart_values(w)
        return _sample_from_values(V, Vw, Vwb, g, w)

    def sample_dirs(self, s):
        return self.sample_w(stereographic(s))

    def values_dirs(self, s):
        V, _, _, g = self.chart_values(stereographic(s))
        return inverse_stereographic(V) * np.where(g[..., None], FLIP, 1.0)

    def patches(self):
        return [polar_patch(self.sample_w, 0.0, 0.0, 1.0, 0.0, np.pi / 2, label="Q")]

    # -- zeros and poles ----------------------------------------------
    @property
    def a(self):
        return len(self.real)

    @property
    def b(self):
        return len(self.imag)

    @property
    def c(self):
        return len(self.cplx)

    def critical_points(self):
        """Zeros and poles inside the closed quarter disk, origin included."""
        pts = [0.0]
        pts += [r for r, _ in self.real]
        pts += [1j * s for s, _ in self.imag]
        pts += [t for t, _ in self.cplx]
        return np.array(pts, complex)

    # -- closed forms -------------------------------------------------
    def closed_form_invariants(self):
        """Edge signs, kink numbers and trapped area from the parameters."""
        a, b, n = self.a, self.b, self.n
        ex = self.lam * (-1) ** a
        ey = self.lam * (-1) ** b * (-1) ** ((n - 1) // 2)
        ez = _sgn(n)
        rho = [p for _, p in self.real]
        sig = [p for _, p in self.imag]
        tau = [p for _, p in self.cplx]
        kx = -0.5 * (-1) ** b * ey * (sum((-1) ** (kk + 1) * sig[kk] for kk in range(b))
                                      + 0.5 * (1 - (-1) ** b) * ez)
        ky = -0.5 * (-1) ** a * ex * (sum((-1) ** (j + 1) * rho[j] for j in range(a))
                                      + 0.5 * (1 - (-1) ** a) * ez)
        kz = 0.25 * (ex * ey - n) - 0.5 * sum(rho) - 0.5 * sum(sig) - sum(tau)
        omega = -0.5 * (abs(n) + 2 * (a + b) + 4 * self.c) * math.pi
        return OctantTopology((ex, ey, ez), (kx, ky, kz), omega)

    def to_dict(self):
        return {"lambda": int(self.lam), "n": int(self.n),
                "real": [[float(r), int(p)] for r, p in self.real],
                "imag": [[float(s), int(p)] for s, p in self.imag],
                "complex": [[float(t.real), float(t.imag), int(p)] for t, p in self.cplx],
                "surgery": None}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["lambda"]), int(d["n"]),
                   tuple((float(r), int(p)) for r, p in d.get("real", [])),
                   tuple((float(s), int(p)) for s, p in d.get("imag", [])),
                   tuple((complex(x, y), int(p)) for x, y, p in d.get("complex", [])))


def build_conformal_map(e, k):
    """Conformal representative with edge signs ``e``, kinks ``k`` and the
    trapped area returned by :func:`omega_star`."""
    ex, ey, ez = (int(x) for x in e)
    kx, ky, kz = (int(x) for x in k)
    es = ex * ey * ez
    n = (2 - es) * ez
    a = 2 * abs(ky)
    b = 2 * abs(kx)
    c = abs(kz) + (1 - es) // 2
    real = tuple((0.25 + j / (2 * a), -(-1) ** j * ex * _sgn(ky)) for j in range(1, a + 1))
    imag = tuple((0.25 + kk / (2 * b), -(-1) ** kk * ey * _sgn(kx)) for kk in range(1, b + 1))
    cplx = []
    for l in range(1, c + 1):
        tau = -_sgn(kz) if l <= abs(kz) else -ez
        mod = math.sqrt(1 - 1 / (c + 1))
        ang = math.pi * (1 / 8 + l / (4 * (c + 1)))
        cplx.append((mod * complex(math.cos(ang), math.sin(ang)), tau))
    return RationalMap(ex, n, real, imag, tuple(cplx))


# ----------------------------------------------------------------------
# disk surgery

@dataclass(frozen=True)
class SurgeredMap:
    """Rational map with an m-fold covering glued into a small disk."""

    base: RationalMap
    m: int
    w0: complex
    eps: float

    kind = "surgered"

    def _inner(self, w):
        M = abs(self.m)
        f0 = complex(self.base(self.w0))
        e2 = self.eps**2
        if self.m > 0:
            p = np.conj(w - self.w0) / e2
        else:
            p = (w - self.w0) / e2
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            pm = p**M
            F = f0 + 1.0 / pm
            use_g = np.abs(F) > 1
            G = pm / (f0 * pm + 1)
            dF = -M / (p ** (M + 1)) / e2
            dG = M * p ** (M - 1) / (e2 * (f0 * pm + 1) ** 2)
        V = np.where(use_g, G, F)
        dV = np.where(use_g, dG, dF)
        zero = np.zeros_like(V)
        if self.m > 0:
            return V, zero, dV, use_g
        return V, dV, zero, use_g

    def _annulus(self, w):
        M = abs(self.m)
        f0 = complex(self.base(self.w0))
        z = w - self.w0
        r = np.abs(z)
        s = (r - self.eps) / self.eps
        f = self.base(w)
        fp = self.base.derivative(w)
        s_w = np.conj(z) / (2 * self.eps * r)
        s_wb = z / (2 * self.eps * r)
        if self.m > 0:
            g = f0 + z**M
            Fw = s * fp + (1 - s) * M * z ** (M - 1) + s_w * (f - g)
            Fwb = s_wb * (f - g)
        else:
            zb = np.conj(z)
            g = f0 + zb**M
            Fw = s * fp + s_w * (f - g)
            Fwb = (1 - s) * M * zb ** (M - 1) + s_wb * (f - g)
        F = s * f + (1 - s) * g
        use_g = np.abs(F) > 1
        with np.errstate(divide="ignore", invalid="ignore"):
            G = 1.0 / F
            V = np.where(use_g, G, F)
            Vw = np.where(use_g, -G * G * Fw, Fw)
            Vwb = np.where(use_g, -G * G * Fwb, Fwb)
        return V, Vw, Vwb, use_g

    def chart_values(self, w):
        w = np.asarray(w, complex)
        V, Vw, Vwb, g = self.base.chart_values(w)
        V, Vw, Vwb, g = (np.array(x) for x in (V, Vw, Vwb, g))
        r = np.abs(w - self.w0)
        ann = (r < 2 * self.eps) & (r > self.eps)
        inn = r <= self.eps
        if np.any(ann):
            a = self._annulus(w[ann])
            V[ann], Vw[ann], Vwb[ann], g[ann] = a
        if np.any(inn):
            a = self._inner(w[inn])
            V[inn], Vw[inn], Vwb[inn], g[inn] = a
        return V, Vw, Vwb, g

    def sample_w(self, w):
        w = np.asarray(w, complex)
        V, Vw, Vwb, g = self.chart_values(w)
        return _sample_from_values(V, Vw, Vwb, g, w)

    def _sample_annulus(self, w):
        return _sample_from_values(*self._annulus(np.asarray(w, complex)), np.asarray(w, complex))

    def _sample_inner(self, w):
        return _sample_from_values(*self._inner(np.asarray(w, complex)), np.asarray(w, complex))

    def sample_dirs(self, s):
        return self.sample_w(stereographic(s))

    def values_dirs(self, s):
        V, _, _, g = self.chart_values(stereographic(s))
        return inverse_stereographic(V) * np.where(g[..., None], FLIP, 1.0)

    def patches(self):
        """Q with the base map, corrected inside the surgery disk."""
        e = self.eps
        base = self.base.sample_w
        return [
            polar_patch(base, 0.0, 0.0, 1.0, 0.0, np.pi / 2, label="Q"),
            polar_patch(base, self.w0, 0.0, 2 * e, 0.0, 2 * np.pi, sign=-1.0, label="D2e"),
            # the covering sits at radius ~eps^2, so integrate in log-radius
            polar_patch(self._sample_inner, self.w0, 0.0, CORE * e, 0.0, 2 * np.pi, label="core"),
            logpolar_patch(self._sample_inner, self.w0, CORE * e, e, 0.0, 2 * np.pi, label="De"),
            polar_patch(self._sample_annulus, self.w0, e, 2 * e, 0.0, 2 * np.pi, label="ann"),
        ]

    def closed_form_invariants(self):
        t = self.base.closed_form_invariants()
        return OctantTopology(t.e, t.k, t.omega + 4 * math.pi * self.m)

    def to_dict(self):
        d = self.base.to_dict()
        d["surgery"] = {"m": int(self.m), "w0": [float(self.w0.real), float(self.w0.imag)],
                        "eps": float(self.eps)}
        return d


def regular_point(rmap, step=1 / 32):
    """Lattice point of Q farthest from zeros, poles and the boundary."""
    crit = rmap.critical_points()
    best, best_d = None, -1.0
    n = int(round(1 / step))
    for i in range(1, n):
        for j in range(1, n):
            w = complex(i * step, j * step)
            if abs(w) >= 1:
                continue
            d = min(w.real, w.imag, 1 - abs(w), float(np.min(np.abs(crit - w))))
            if d > best_d + 1e-15:
                best, best_d = w, d
    if best is None or best_d <= 0:
        raise NoRegularPoint("no regular point found in Q")
    return best, min(best_d / 4, 1 / 16)


def surgered_map(e, k, omega):
    """Field with topology ``(e, k, omega)``: conformal map plus surgery.

    Returns a :class:`RationalMap` when no surgery is needed.
    """
    if not residue_ok(e, k, omega):
        raise ResidueViolation(f"trapped area {omega} is incompatible with e={e}, k={k}")
    base = build_conformal_map(e, k)
    m = (omega - omega_star(e, k)) / (4 * math.pi)
    mi = int(round(m))
    if abs(m - mi) > 1e-9:
        raise ResidueViolation("trapped area differs from the conformal one by a non-integer covering")
    if mi == 0:
        return base
    w0, eps = regular_point(base)
    return SurgeredMap(base, mi, w0, eps)


def map_from_dict(d):
    base = RationalMap.from_dict(d)
    s = d.get("surgery")
    if not s:
        return base
    return SurgeredMap(base, int(s["m"]), complex(*s["w0"]), float(s["eps"]))


# ----------------------------------------------------------------------
# (M, N) example field

@dataclass(frozen=True)
class MNField:
    """``nu = (sin a cos b, sin a sin b, cos a)``, a = (4M+1) theta, b = (4N+1) phi."""

    M: int
    N: int

    kind = "parametric_MN"

    def sample_tp(self, th, ph):
        th = np.asarray(th, float)
        ph = np.asarray(ph, float)
        p, q = 4 * self.M + 1, 4 * self.N + 1
        al, be = p * th, q * ph
        sa, ca, sb, cb = np.sin(al), np.cos(al), np.sin(be), np.cos(be)
        nu = np.stack([sa * cb, sa * sb, ca], axis=-1)
        d1 = p * np.stack([ca * cb, ca * sb, -sa], axis=-1)
        d2 = q * np.stack([-sa * sb, sa * cb, np.zeros_like(sa)], axis=-1)
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        s = np.stack([st * cp, st * sp, ct], axis=-1)
        g1 = np.stack([ct * cp, ct * sp, -st], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g2 = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1) / st[..., None]
        return ChartSample(s=s, nu=nu, d1=d1, d2=d2, g1=g1, g2=g2, area=st)

    def sample_dirs(self, s):
        s = np.asarray(s, float)
        th = np.arccos(np.clip(s[..., 2], -1, 1))
        ph = np.arctan2(s[..., 1], s[..., 0])
        return self.sample_tp(th, ph)

    def values_dirs(self, s):
        s = np.asarray(s, float)
        th = np.arccos(np.clip(s[..., 2], -1, 1))
        ph = np.arctan2(s[..., 1], s[..., 0])
        al, be = (4 * self.M + 1) * th, (4 * self.N + 1) * ph
        return np.stack([np.sin(al) * np.cos(be), np.sin(al) * np.sin(be), np.cos(al)], axis=-1)

    def patches(self):
        def point(th, ph):
            return self.sample_tp(th, ph), 1.0
        return [Patch((0.0, np.pi / 2, 0.0, np.pi / 2), point, 1.0, "octant")]

    def to_dict(self):
        return {"M": int(self.M), "N": int(self.N)}


# ----------------------------------------------------------------------
# per-vertex placement

@dataclass(frozen=True)
class VertexField:
    """Octant field placed at a prism vertex.

    ``nu_a(s) = T @ base(R @ s)`` where R reflects O^a onto the positive
    octant and T is the value frame (identity or R).
    """

    base: object
    R: np.ndarray
    T: np.ndarray

    @property
    def orient(self):
        return float(np.linalg.det(self.R))

    def transform(self, cs):
        R, T = self.R, self.T
        return ChartSample(s=cs.s @ R, nu=cs.nu @ T.T, d1=cs.d1 @ T.T, d2=cs.d2 @ T.T,
                           g1=cs.g1 @ R, g2=cs.g2 @ R, area=cs.area,
                           orient=cs.orient * self.orient)

    def sample_dirs(self, s):
        return self.transform(self.base.sample_dirs(np.asarray(s, float) @ self.R))

    def values_dirs(self, s):
        return self.base.values_dirs(np.asarray(s, float) @ self.R) @ self.T.T

    def patches(self):
        out = []
        for p in self.base.patches():
            def point(x1, x2, _p=p):
                cs, jac = _p.point(x1, x2)
                return self.transform(cs), jac
            out.append(Patch(p.bounds, point, p.sign, p.label))
        return out


def mn_example_field(M, N, prism=None):
    """The (M, N) field on all eight vertices of a prism (unit cube by default).

    Returns a list of :class:`VertexField` indexed by vertex id; values are
    unchanged under the vertex reflections.
    """
    from .geometry import rectangular_prism
    if M < 0 or N < 0:
        raise ValueError("M and N must be nonnegative")
    prism = prism or rectangular_prism(1.0, 1.0, 1.0)
    base = MNField(int(M), int(N))
    return [VertexField(base, prism.reflection(a), np.eye(3)) for a in range(8)]


def conjugated_fields(prism, local_fields):
    """Place local octant fields at each vertex with value frame T = R_a."""
    return [VertexField(f, prism.reflection(a), prism.reflection(a))
            for a, f in enumerate(local_fields)]


# ----------------------------------------------------------------------
# boundary traces and invariants

def edge_directions(j, alpha):
    """Points of the octant edge about axis j: cos(a) k + sin(a) l, (j,k,l) cyclic."""
    alpha = np.asarray(alpha, float)
    k, l = (j + 1) % 3, (j + 2) % 3
    s = np.zeros(alpha.shape + (3,))
    s[..., k] = np.cos(alpha)
    s[..., l] = np.sin(alpha)
    ds = np.zeros_like(s)
    ds[..., k] = -np.sin(alpha)
    ds[..., l] = np.cos(alpha)
    return s, ds


def edge_winding(field, j, tol=1e-6, max_points=2**20):
    """Net rotation of the field along the octant edge about axis j."""
    k, l = (j + 1) % 3, (j + 2) % 3
    n = 1025
    while n <= max_points:
        al = np.linspace(0.0, np.pi / 2, n)
        s, _ = edge_directions(j, al)
        nu = field.values_dirs(s)
        if np.max(np.abs(nu[:, j])) > 1e-6:
            raise WindingAmbiguous(f"field leaves the tangent plane on edge {j}")
        ang = np.arctan2(nu[:, l], nu[:, k])
        step = np.diff(ang)
        step = (step + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(step)) < np.pi / 4:
            return float(np.sum(step))
        n = 2 * n - 1
    raise WindingAmbiguous(f"trace on edge {j} could not be resolved")


def numeric_edge_signs(field):
    out = []
    for j in range(3):
        s = np.zeros(3)
        s[j] = 1.0
        val = field.values_dirs(s[None])[0][j]
        if abs(abs(val) - 1) > 1e-6:
            raise WindingAmbiguous(f"field is not parallel to axis {j} at the vertex edge")
        out.append(1 if val > 0 else -1)
    return tuple(out)


def numeric_kinks(field, e):
    k = []
    for j in range(3):
        kk, ll = (j + 1) % 3, (j + 2) % 3
        delta = edge_winding(field, j)
        dmin = e[kk] * e[ll] * np.pi / 2
        val = (dmin - delta) / (2 * np.pi)
        r = round(val)
        if abs(val - r) > 1e-6:
            raise WindingAmbiguous(f"kink on edge {j} is not an integer ({val})")
        k.append(int(r))
    return tuple(k)


@dataclass
class MapInvariants:
    e: tuple
    k: tuple
    omega: float
    omega_err: float
    closed_form: OctantTopology = None

    def topology(self, snap=True):
        om = self.omega
        if snap:
            om = round(om / (np.pi / 2)) * (np.pi / 2)
        return OctantTopology(self.e, self.k, om)


def map_invariants(field, spec=None):
    """Numeric edge signs, kinks and trapped area of an octant field."""
    from .quadrature import trapped_area_numeric
    e = numeric_edge_signs(field)
    k = numeric_kinks(field, e)
    res = trapped_area_numeric(field, spec)
    closed = field.closed_form_invariants() if hasattr(field, "closed_form_invariants") else None
    return MapInvariants(e, k, res.value, res.error, closed)
