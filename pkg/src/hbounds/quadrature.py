"""Adaptive quadrature of octant energies, trapped areas and wrapping numbers."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import SnapFailure, ToleranceNotMet
from .sectors import sign_string

_GL_CACHE = {}
ROUNDOFF = 1e-13  # cell differences below this relative size are noise


def gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive rules.

    Attributes
    ----------
    rtol : float
        Relative target for each integrated component.
    atol : float
        Absolute floor for components whose integral is near zero.
    order : int
        Gauss-Legendre points per direction per cell.
    max_depth : int
        Maximal number of bisections of an initial cell.
    max_cells : int
        Cap on the number of simultaneously active cells.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    order: int = 8
    max_depth: int = 18
    max_cells: int = 200_000
    init_split: int = 4

    def __post_init__(self):
        if not 1e-10 <= self.rtol <= 1e-2:
            raise ValueError(f"rtol {self.rtol} outside [1e-10, 1e-2]")
        if not 1 <= self.max_depth <= 24:
            raise ValueError(f"max_depth {self.max_depth} outside [1, 24]")
        if self.order < 2:
            raise ValueError("order must be at least 2")


@dataclass
class QuadResult:
    value: object
    error: object
    converged: bool = True
    n_cells: int = 0


def _rule_2d(fun, cells, x, wq, chunk=2048):
    """Tensor rule on cells (n, 4) -> (K, n) integrals plus label spread."""
    if len(cells) > chunk:
        parts = [_rule_2d(fun, cells[i:i + chunk], x, wq, chunk)
                 for i in range(0, len(cells), chunk)]
        out = np.concatenate([p[0] for p in parts], axis=1)
        mixed = None if parts[0][1] is None else np.concatenate([p[1] for p in parts])
        return out, mixed
    a, b, c, d = cells.T
    hx, hy = (b - a) / 2, (d - c) / 2
    mx, my = (a + b) / 2, (c + d) / 2
    X = mx[:, None, None] + hx[:, None, None] * x[None, :, None]
    Y = my[:, None, None] + hy[:, None, None] * x[None, None, :]
    W = (hx * hy)[:, None, None] * wq[None, :, None] * wq[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    shape = X.shape
    vals, labels = fun(X.ravel(), Y.ravel())
    vals = np.asarray(vals).reshape((-1,) + shape)
    out = np.sum(vals * W[None], axis=(2, 3))
    mixed = None
    if labels is not None:
        lab = np.asarray(labels).reshape(shape)
        mixed = np.any(lab != lab[:, :1, :1], axis=(1, 2))
    return out, mixed


def _children(cells):
    a, b, c, d = cells.T
    m1, m2 = (a + b) / 2, (c + d) / 2
    kids = np.concatenate([
        np.stack([a, m1, c, m2], 1), np.stack([m1, b, c, m2], 1),
        np.stack([a, m1, m2, d], 1), np.stack([m1, b, m2, d], 1)])
    return kids


def adaptive_2d(fun, bounds, spec=None, atol=None, mixed_depth=None):
    """Integrate a vector-valued function over a rectangle.

    Parameters
    ----------
    fun : callable
        ``fun(x1, x2) -> (values (K, n), labels (n,) or None)``. Cells whose
        nodes carry different labels are refined down to ``mixed_depth``.
    bounds : tuple
        ``(a, b, c, d)`` for ``[a, b] x [c, d]``.

    Returns
    -------
    QuadResult
        ``value`` and ``error`` are arrays of shape (K,).
    """
    spec = spec or QuadratureSpec()
    x, wq = gauss_legendre(spec.order)
    a, b, c, d = bounds
    n0 = spec.init_split
    xs = np.linspace(a, b, n0 + 1)
    ys = np.linspace(c, d, n0 + 1)
    cells = np.array([[xs[i], xs[i + 1], ys[j], ys[j + 1]] for i in range(n0) for j in range(n0)])
    est, mixed = _rule_2d(fun, cells, x, wq)
    K = est.shape[0]
    total_area = (b - a) * (d - c)
    scale = np.abs(est.sum(axis=1))
    floor = np.zeros(K) + (spec.atol if atol is None else np.asarray(atol, float))
    mixed_depth = spec.max_depth if mixed_depth is None else mixed_depth
    value = np.zeros(K)
    error = np.zeros(K)
    depth = 0
    converged = True
    forced = False
    n_cells = 0
    while len(cells):
        kids = _children(cells)
        kest, kmixed = _rule_2d(fun, kids, x, wq)
        n = len(cells)
        ksum = kest.reshape(K, 4, n).sum(axis=1)
        diff = np.abs(ksum - est)
        scale = np.maximum(scale, np.abs(value + ksum.sum(axis=1)))
        tol = np.maximum(spec.rtol * scale, floor)
        frac = ((cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2]) / total_area)
        lim = np.maximum(tol[:, None] * frac[None, :], ROUNDOFF * np.abs(ksum))
        ok = np.all(diff <= lim, axis=0)
        if mixed is not None:
            ok &= ~(mixed & (depth < mixed_depth))
        depth += 1
        # forced stops are judged by the accumulated error, not per cell
        if depth >= spec.max_depth or 4 * np.count_nonzero(~ok) > spec.max_cells:
            if not np.all(ok):
                forced = True
            ok[:] = True
        value += ksum[:, ok].sum(axis=1)
        error += diff[:, ok].sum(axis=1)
        n_cells += 4 * np.count_nonzero(ok)
        keep = np.tile(~ok, 4)
        cells = kids[keep]
        est = kest[:, keep]
        mixed = None if kmixed is None else kmixed[keep]
    if forced:
        converged = bool(np.all(error <= np.maximum(spec.rtol * np.abs(value), floor)))
    return QuadResult(value, error, converged, n_cells)


def adaptive_1d(fun, a, b, spec=None, breaks=()):
    """Integrate ``fun(x) -> (K, n)`` over [a, b] by adaptive Gauss-Legendre."""
    spec = spec or QuadratureSpec()
    x, wq = gauss_legendre(spec.order)
    pts = np.unique(np.concatenate([[a, b], [t for t in breaks if a < t < b]]))
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        e = np.linspace(lo, hi, spec.init_split + 1)
        segs.extend(zip(e[:-1], e[1:]))
    segs = np.array(segs)

    def rule(s):
        h = (s[:, 1] - s[:, 0]) / 2
        m = (s[:, 1] + s[:, 0]) / 2
        X = m[:, None] + h[:, None] * x[None, :]
        v = np.asarray(fun(X.ravel())).reshape(-1, *X.shape)
        return np.sum(v * (h[:, None] * wq[None, :])[None], axis=2)

    est = rule(segs)
    K = est.shape[0]
    value, error = np.zeros(K), np.zeros(K)
    scale = np.abs(est.sum(axis=1))
    depth = 0
    converged = True
    forced = False
    while len(segs):
        m = (segs[:, 0] + segs[:, 1]) / 2
        kids = np.concatenate([np.stack([segs[:, 0], m], 1), np.stack([m, segs[:, 1]], 1)])
        kest = rule(kids)
        n = len(segs)
        ksum = kest[:, :n] + kest[:, n:]
        diff = np.abs(ksum - est)
        tol = np.maximum(spec.rtol * scale, spec.atol)
        frac = (segs[:, 1] - segs[:, 0]) / (b - a)
        lim = np.maximum(tol[:, None] * frac[None, :], ROUNDOFF * np.abs(ksum))
        ok = np.all(diff <= lim, axis=0)
        depth += 1
        if depth >= 2 * spec.max_depth:
            forced = forced or not bool(np.all(ok))
            ok[:] = True
        value += ksum[:, ok].sum(axis=1)
        error += diff[:, ok].sum(axis=1)
        keep = np.tile(~ok, 2)
        segs = kids[keep]
        est = kest[:, keep]
    if forced:
        converged = bool(np.all(error <= np.maximum(spec.rtol * np.abs(value), spec.atol)))
    return QuadResult(value, error, converged)


# ----------------------------------------------------------------------
# integrals over an octant field

def integrate_field(fld, integrand, spec=None, labeler=None, atol=None, mixed_depth=None):
    """Sum of ``integrand(sample) (K, n)`` over all patches of a field.

    ``integrand`` returns densities per unit chart area.
    """
    spec = spec or QuadratureSpec()
    total, err = None, None
    converged = True
    for p in fld.patches():
        def fun(x1, x2, _p=p):
            cs, jac = _p.point(x1, x2)
            v = np.atleast_2d(integrand(cs)) * jac
            lab = labeler(cs) if labeler is not None else None
            return v, lab
        r = adaptive_2d(fun, p.bounds, spec, atol=atol, mixed_depth=mixed_depth)
        v = p.sign * r.value
        total = v if total is None else total + v
        err = r.error if err is None else err + r.error
        converged &= r.converged
    return QuadResult(total, err, converged)


def _finish(res, strict, what):
    if strict and not res.converged:
        raise ToleranceNotMet(f"{what} did not reach the requested tolerance",
                              value=res.value, error=res.error)
    return res


# The octant energy E2 is normalised by the stereographic-chart density
# 4(|F_wbar|^2 + |F_w|^2)/(1 + |F|^2)^2, which is half of |grad nu|^2. With
# it a conformal map has E2 = |Omega|. The three-dimensional energies use
# the full |grad nu|^2 (see dirichlet_energy).
E2_NORM = 0.5


def dirichlet_energy(fld, spec=None, strict=False):
    """Integral of |grad nu|^2 over the octant."""
    r = integrate_field(fld, lambda cs: cs.energy_density(), spec)
    return _finish(QuadResult(float(r.value[0]), float(r.error[0]), r.converged), strict,
                   "Dirichlet energy")


def energy_E2(fld, spec=None, strict=False):
    """Octant energy E2 in the chart normalisation (half of the Dirichlet integral)."""
    r = dirichlet_energy(fld, spec, strict)
    return QuadResult(E2_NORM * r.value, E2_NORM * r.error, r.converged, r.n_cells)


def trapped_area_numeric(fld, spec=None, strict=False):
    """Signed area swept by the field over its octant."""
    r = integrate_field(fld, lambda cs: cs.signed_density(), spec)
    return _finish(QuadResult(float(r.value[0]), float(r.error[0]), r.converged), strict, "trapped area")


def energy_E1(fld, axis, spec=None, strict=False):
    """Energy of the trace on the octant edge about ``axis``.

    ``fld`` must be in the positive-octant frame (the edge from k to l).
    """
    from .octant import edge_directions

    def fun(al):
        s, ds = edge_directions(axis, al)
        cs = fld.sample_dirs(s)
        J = cs.jacobian()
        t = np.einsum("nij,nj->ni", J, ds)
        return np.sum(t * t, axis=1)[None]

    r = adaptive_1d(fun, 0.0, np.pi / 2, spec)
    return _finish(QuadResult(float(r.value[0]), float(r.error[0]), r.converged), strict, "E1")


def _sector_coder(normals, sigmas):
    """Map field values to sector indices (-1 on unknown sign patterns)."""
    normals = np.asarray(normals, float)
    f = len(normals)
    bits = 1 << np.arange(f, dtype=np.int64)
    table = {}
    for i, sg in enumerate(sigmas):
        table[int(sum(int(b) for b, s in zip(bits, sg) if s > 0))] = i
    if f <= 20:
        lut = np.full(1 << f, -1, dtype=np.int64)
        for k, v in table.items():
            lut[k] = v

        def code(nu):
            return lut[((nu @ normals.T) > 0).astype(np.int64) @ bits]
    else:
        def code(nu):
            c = ((nu @ normals.T) > 0).astype(np.int64) @ bits
            return np.array([table.get(int(x), -1) for x in c])
    return code


BUMP_POWER = 4
SNAP_OK = 1e-3
SNAP_FAIL = 0.05


def sector_weights(partition, y):
    """Smooth weights ``prod_f max(sigma_f n_f . y, 0)^4`` for each sector.

    Each weight is positive exactly on its sector and vanishes to fourth
    order on the boundary circles. Returns shape (S, n).
    """
    d = np.asarray(y, float) @ np.asarray(partition.face_normals, float).T
    out = []
    for sg in partition.sign_vectors():
        out.append(np.prod(np.maximum(d * np.asarray(sg, float), 0.0) ** BUMP_POWER, axis=-1))
    return np.array(out)


_WEIGHT_CACHE = {}


def sector_weight_integrals(partition, spec=None):
    """Integrals of :func:`sector_weights` over the sphere, one per sector."""
    key = (partition.face_normals.tobytes(), tuple(partition.sign_vectors()))
    if key not in _WEIGHT_CACHE:
        spec = spec or QuadratureSpec(rtol=1e-10, atol=0.0)

        def fun(th, ph):
            st = np.sin(th)
            y = np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)
            return sector_weights(partition, y) * st, None

        r = adaptive_2d(fun, (0.0, np.pi, 0.0, 2 * np.pi), spec)
        _WEIGHT_CACHE[key] = r.value
    return _WEIGHT_CACHE[key]


def wrapping_numbers_numeric(fld, partition, spec=None, snap=True, method="weighted",
                             mixed_depth=7):
    """Sector wrapping numbers of a field over its octant.

    Parameters
    ----------
    fld : octant field
        Any object with ``patches()``.
    partition : SectorPartition
    method : {"weighted", "indicator"}
        ``weighted`` integrates smooth sector weights of the field value and
        divides by their sphere integrals (the local degree is constant on
        each sector). ``indicator`` integrates the sector indicator directly,
        refining cells that straddle a sector boundary; it is much slower.

    Returns
    -------
    dict
        ``{"w": {sigma: int or float}, "raw": {...}, "error": float,
        "converged": bool}``.
    """
    sigmas = partition.sign_vectors()
    if method == "weighted":
        spec = spec or QuadratureSpec(rtol=1e-8, atol=1e-12)
        norm = sector_weight_integrals(partition)
        r = integrate_field(fld, lambda cs: sector_weights(partition, cs.nu) * cs.signed_density(),
                            spec)
        vals = r.value / norm
    elif method == "indicator":
        spec = spec or QuadratureSpec(rtol=1e-6, atol=1e-6, max_depth=10)
        coder = _sector_coder(partition.face_normals, sigmas)
        S = len(sigmas)

        def integrand(cs):
            dens = cs.signed_density()
            lab = coder(cs.nu)
            return np.where(lab[None] == np.arange(S)[:, None], dens[None], 0.0)

        r = integrate_field(fld, integrand, spec, labeler=lambda cs: coder(cs.nu),
                            mixed_depth=mixed_depth)
        vals = r.value / np.array([sec.area for sec in partition.sectors])
    else:
        raise ValueError(f"unknown method {method!r}")
    raw = {sg: float(vals[i]) for i, sg in enumerate(sigmas)}
    err = float(np.max(np.abs(vals - np.round(vals))))
    if snap and err > SNAP_FAIL:
        raise SnapFailure(f"wrapping number is {err:.3g} away from an integer; refine the quadrature")
    w = {sg: int(round(v)) if snap else v for sg, v in raw.items()}
    return {"w": w, "raw": raw, "error": err, "snapped": err <= SNAP_OK,
            "converged": r.converged}


@dataclass
class OctantEnergyReport:
    E2: float
    E2_err: float
    E1: tuple
    E1_err: tuple
    omega: float
    omega_err: float
    wrapping: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self):
        axes = "xyz"
        return {"E2": self.E2, "E1": {axes[j]: self.E1[j] for j in range(3)},
                "Omega": self.omega,
                "w": {sign_string(k): v for k, v in self.wrapping.items()},
                "err": {"E2": self.E2_err, "E1": {axes[j]: self.E1_err[j] for j in range(3)},
                        "Omega": self.omega_err},
                "converged": self.converged}


def octant_energy_report(fld, partition=None, spec=None):
    """E2, edge energies, trapped area and (optionally) wrapping numbers."""
    r2 = energy_E2(fld, spec)
    ro = trapped_area_numeric(fld, spec)
    e1 = [energy_E1(fld, j, spec) for j in range(3)]
    wr = {}
    conv = r2.converged and ro.converged and all(r.converged for r in e1)
    if partition is not None:
        res = wrapping_numbers_numeric(fld, partition)
        wr = res["w"]
        conv = conv and res["converged"]
    return OctantEnergyReport(r2.value, r2.error, tuple(r.value for r in e1),
                              tuple(r.error for r in e1), ro.value, ro.error, wr, conv)


def mn_energies_closed(M, N):
    """Closed-form edge energies (x, y, z) of the (M, N) field on one octant."""
    p, q = 4 * M + 1, 4 * N + 1
    return (p * p * math.pi / 2, p * p * math.pi / 2, q * q * math.pi / 2)
