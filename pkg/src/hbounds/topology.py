"""Homotopy invariants of tangent unit-vector fields.

Wrapping numbers are the complete invariant. For prisms the per-vertex
invariants are edge signs ``e``, kink numbers ``k`` and trapped area
``omega`` in the local octant frame of the vertex.

Orientation convention: the identity octant map has trapped area
``-pi/2`` and wrapping number ``-1`` on the positive octant.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from .errors import (
    InadmissibleTopology,
    InconsistentEdgeSigns,
    InconsistentWrapping,
    NegativeConstant,
    NonIntegerInvariant,
    ProbeDegenerate,
    ResidueViolation,
    UnknownSector,
)
from .geometry import PRISM_FACE_AXES, Prism, vertex_signs
from .sectors import parse_sign_string, sign_string, spherical_triangle_area_oriented, tau_indicator

SNAP_TOL = 1e-6

#: octant sign triples, (+,+,+) first
OCTANTS = tuple(itertools.product((1, -1), repeat=3))


def snap_int(x, tol=SNAP_TOL):
    """Nearest integer if within ``tol``, else None."""
    r = round(x)
    return int(r) if abs(x - r) <= tol else None


# ----------------------------------------------------------------------
# prism sign-vector bookkeeping

def prism_sigma(octant):
    """Face-indexed sign vector of an octant (faces -x,+x,-y,+y,-z,+z)."""
    out = []
    for axis, sgn in PRISM_FACE_AXES:
        out.append(sgn * octant[axis])
    return tuple(out)


def octant_of(sigma):
    """Octant triple of a face-indexed prism sign vector."""
    if len(sigma) == 3:
        return tuple(sigma)
    return (sigma[1], sigma[3], sigma[5])


def reflect_octant(a, octant):
    """Image of an octant label under the vertex reflection R_a."""
    s = vertex_signs(a)
    return tuple(-s[j] * octant[j] for j in range(3))


def local_wrapping(a, w_global):
    """Local octant wrapping numbers at prism vertex ``a``.

    The local field is the vertex field conjugated by the reflection that
    carries O^a to the positive octant, so ``w_loc[t] = w_global[R_a t]``.
    """
    return {t: int(w_global.get(reflect_octant(a, t), 0)) for t in OCTANTS}


def global_wrapping(a, w_local):
    return {reflect_octant(a, t): int(w_local.get(t, 0)) for t in OCTANTS}


# ----------------------------------------------------------------------
# topologies

@dataclass(frozen=True)
class TangentTopology:
    """Wrapping numbers ``w[a][sigma]`` keyed by face-indexed sign vectors."""

    w: dict = field(default_factory=dict)

    def get(self, a, sigma):
        return self.w.get(a, {}).get(tuple(sigma), 0)

    def vertices(self):
        return sorted(self.w)

    def sign_vectors(self):
        out = set()
        for d in self.w.values():
            out.update(d)
        return sorted(out, key=lambda s: tuple(-x for x in s))

    def octant_table(self, a):
        """Octant-keyed wrapping numbers at a prism vertex."""
        return {octant_of(s): v for s, v in self.w.get(a, {}).items()}

    @classmethod
    def from_octants(cls, tables):
        """Build from ``{a: {octant: w}}`` for a prism."""
        w = {}
        for a, t in tables.items():
            d = {prism_sigma(o): int(v) for o, v in t.items() if int(v) != 0}
            w[int(a)] = d
        return cls(w)

    def to_dict(self):
        return {"vertices": {str(a): {sign_string(s): int(v) for s, v in sorted(
            d.items(), key=lambda kv: tuple(-x for x in kv[0])) if v != 0}
            for a, d in sorted(self.w.items())}}

    @classmethod
    def from_dict(cls, data, n_faces=None):
        w = {}
        for a, d in data.get("vertices", {}).items():
            row = {}
            for key, v in d.items():
                sig = parse_sign_string(key)
                if len(sig) == 3 and n_faces == 6:
                    sig = prism_sigma(sig)
                if n_faces is not None and len(sig) != n_faces:
                    raise UnknownSector(f"sign vector {key} has wrong length")
                if int(v) != v:
                    raise InconsistentWrapping("wrapping numbers must be integers")
                if int(v) != 0:
                    row[sig] = int(v)
            w[int(a)] = row
        return cls(w)


@dataclass(frozen=True)
class OctantTopology:
    e: tuple
    k: tuple
    omega: float

    def __post_init__(self):
        if any(x not in (-1, 1) for x in self.e) or len(self.e) != 3:
            raise InconsistentWrapping(f"edge signs must be +-1, got {self.e}")
        object.__setattr__(self, "e", tuple(int(x) for x in self.e))
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))

    @property
    def e_star(self):
        return self.e[0] * self.e[1] * self.e[2]

    def to_dict(self):
        return {"e": list(self.e), "k": list(self.k), "omega": float(self.omega)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["e"]), tuple(d["k"]), float(d["omega"]))


@dataclass(frozen=True)
class VertexStarInvariants:
    """Edge signs, kink numbers and trapped area at a general vertex.

    ``e[r]`` and ``k[r]`` refer to star edge r and star face r (the face
    spanned by edges r and r+1). Kinks follow the winding convention of
    the probing identity; ``omega`` uses the package orientation.
    """

    vertex: int
    e: tuple
    k: tuple
    omega: float
    edges: np.ndarray = field(repr=False, default=None)


def omega_star(e, k):
    """Trapped area of the conformal representative used for surgery."""
    es = e[0] * e[1] * e[2]
    return -2 * math.pi * (sum(abs(x) for x in k) + 1 - 0.75 * es)


def residue_ok(e, k, omega):
    """True if omega satisfies the trapped-area residue rule for every octant."""
    es = e[0] * e[1] * e[2]
    for sig in OCTANTS:
        base = -2 * math.pi * sum(s * kk for s, kk in zip(sig, k)) - es * math.pi / 2
        q = (omega - base) / (4 * math.pi)
        if snap_int(q) is None:
            return False
    return True


def wrapping_from_octant(e, k, omega):
    """Octant wrapping numbers from ``(e, k, omega)``.

    Returns
    -------
    dict
        ``{octant: int}`` over all eight octants.
    """
    e = tuple(int(x) for x in e)
    es = e[0] * e[1] * e[2]
    out = {}
    for sig in OCTANTS:
        val = (omega / (4 * math.pi) + 0.5 * sum(s * kk for s, kk in zip(sig, k))
               + es / 8.0 * (1 - 8 * (sig == e)))
        n = snap_int(val)
        if n is None:
            raise ResidueViolation(f"trapped area {omega} is incompatible with e={e}, k={k}")
        out[sig] = n
    return out


def octant_from_wrapping(w):
    """Invert the octant wrapping numbers to ``(e, k, omega)``.

    Parameters
    ----------
    w : dict
        ``{octant: int}``; missing octants count as zero.
    """
    W = {s: int(w.get(s, 0)) for s in OCTANTS}
    e = []
    for t in range(3):
        r, s = [i for i in range(3) if i != t]
        e.append(-sum(sig[r] * sig[s] * W[sig] for sig in OCTANTS))
    if any(x not in (-1, 1) for x in e):
        raise InconsistentWrapping(f"edge signs {e} are not +-1")
    es = e[0] * e[1] * e[2]
    k = []
    for r in range(3):
        val = 0.25 * sum(sig[r] * W[sig] for sig in OCTANTS) + 0.25 * e[r] * es
        n = snap_int(val)
        if n is None:
            raise NonIntegerInvariant(f"kink number {val} is not an integer")
        k.append(n)
    omega = math.pi / 2 * sum(W.values())
    return OctantTopology(tuple(e), tuple(k), omega)


def omega_thresholds(e, k):
    """``(Omega_+, Omega_-)`` thresholds for the conformal classification."""
    es = e[0] * e[1] * e[2]
    sk = 2 * math.pi * sum(abs(x) for x in k)
    if all(es * e[j] * k[j] <= 0 for j in range(3)):
        om_same = sk + 2 * math.pi * 7 / 4
    else:
        om_same = sk - 2 * math.pi / 4
    if all(es * e[j] * k[j] > 0 for j in range(3)):
        om_opp = sk - 2 * math.pi * 7 / 4
    else:
        om_opp = sk + 2 * math.pi / 4
    # om_same carries the label of e_*, om_opp the opposite label
    if es > 0:
        return om_same, om_opp
    return om_opp, om_same


def classify_octant(e, k, omega):
    """Label an octant topology by the threshold inequalities.

    Returns
    -------
    label : str
        ``"Conformal"``, ``"Anticonformal"`` or ``"Neither"``.
    thresholds : dict
        ``{"plus": Omega_+, "minus": Omega_-}``.
    """
    om_plus, om_minus = omega_thresholds(e, k)
    tol = 1e-9
    if omega <= -om_minus + tol:
        label = "Conformal"
    elif omega >= om_plus - tol:
        label = "Anticonformal"
    else:
        label = "Neither"
    return label, {"plus": om_plus, "minus": om_minus}


def classify_by_signs(w):
    """Reference classification from the signs of the wrapping numbers."""
    vals = [v for v in w.values() if v != 0]
    if vals and all(v < 0 for v in vals):
        return "Conformal"
    if vals and all(v > 0 for v in vals):
        return "Anticonformal"
    return "Neither"


# ----------------------------------------------------------------------
# admissibility

@dataclass
class AdmissibilityReport:
    ok: bool
    violations: list
    unchecked: list

    def to_dict(self):
        return {"ok": self.ok, "violations": self.violations, "unchecked": self.unchecked}


def _check_keys(partition, topology):
    known = set(partition.sign_vectors())
    for a, d in topology.w.items():
        for s in d:
            if tuple(s) not in known:
                raise UnknownSector(f"vertex {a} references unknown sector {sign_string(s)}")


def sum_rule_violations(partition, topology):
    out = []
    for sig in partition.sign_vectors():
        tot = sum(d.get(sig, 0) for d in topology.w.values())
        if tot != 0:
            out.append(f"sum rule fails for sector {sign_string(sig)} (total {tot})")
    return out


def check_admissible(polyhedron, partition, topology):
    """Check the admissibility rules that have closed forms.

    Parameters
    ----------
    polyhedron : Polyhedron or Prism
    partition : SectorPartition
    topology : TangentTopology

    Returns
    -------
    AdmissibilityReport
    """
    _check_keys(partition, topology)
    violations = sum_rule_violations(partition, topology)
    unchecked = []
    if isinstance(polyhedron, Prism):
        tops = {}
        for a in range(8):
            wl = local_wrapping(a, topology.octant_table(a))
            try:
                top = octant_from_wrapping(wl)
            except NonIntegerInvariant:
                raise
            except InconsistentWrapping as exc:
                violations.append(f"vertex {a}: {exc}")
                continue
            if not residue_ok(top.e, top.k, top.omega):
                violations.append(f"vertex {a}: trapped-area residue violated")
            tops[a] = top
        for p, q in polyhedron.polyhedron.edges():
            if p in tops and q in tops:
                sp, sq = vertex_signs(p), vertex_signs(q)
                j = [i for i in range(3) if sp[i] != sq[i]][0]
                if tops[p].e[j] != -tops[q].e[j]:
                    violations.append(f"edge ({p},{q}): edge signs incompatible")
        unchecked.append("per-face kink sum rules")
    else:
        poly = polyhedron
        for a in range(poly.n_vertices):
            try:
                invariants_from_wrapping_star(poly, a, topology.w.get(a, {}), partition)
            except (ProbeDegenerate, InconsistentEdgeSigns, NonIntegerInvariant) as exc:
                violations.append(f"vertex {a}: {exc}")
        unchecked.append("face and edge continuity constraints")
    return AdmissibilityReport(not violations, violations, unchecked)


def require_sum_rule(partition, topology):
    v = sum_rule_violations(partition, topology)
    if v:
        raise InadmissibleTopology("; ".join(v))


# ----------------------------------------------------------------------
# general vertex reconstruction

def _signs(normals, s, tol):
    d = normals @ s
    if np.any(np.abs(d) <= tol):
        return None
    return tuple(int(x) for x in np.sign(d))


def invariants_from_wrapping_star(polyhedron, a, w, partition=None, eps0=1e-3,
                                  max_halvings=40):
    """Recover edge signs, kinks and trapped area at vertex ``a``.

    Parameters
    ----------
    polyhedron : Polyhedron or Prism
    a : int
        Vertex index.
    w : dict
        ``{sign_vector: int}`` over face-indexed sign vectors at vertex a.
    partition : SectorPartition, optional
        Used only to validate sign-vector keys.
    eps0 : float
        Initial probe offset, halved until the probes are valid.

    Returns
    -------
    VertexStarInvariants

    Notes
    -----
    The probing identity is written for the opposite orientation to the
    package convention, so wrapping numbers are negated on input and the
    trapped area is negated on output.
    """
    poly = polyhedron.polyhedron if isinstance(polyhedron, Prism) else polyhedron
    normals = poly.face_normals
    if partition is not None:
        known = set(partition.sign_vectors())
        for s in w:
            if tuple(s) not in known:
                raise UnknownSector(f"unknown sector {sign_string(s)}")
    wapp = {tuple(s): -int(v) for s, v in w.items()}

    def W(sig):
        return wapp.get(sig, 0)

    E = poly.star_edges(a)
    b = len(E)
    fidx = poly.star_faces[a]
    F = [normals[c] for c in fidx]
    tol = 1e-12

    pair_signs = []
    kinks = [None] * b
    for r in range(b):
        q = (r - 1) % b
        Er, Er1 = E[r], E[(r + 1) % b]
        Fr = F[r]
        others = np.array([n for n in normals if abs(abs(n @ Fr) - 1) > 1e-9])
        eps = eps0
        for _ in range(max_halvings + 1):
            diffs, probes, ok = {}, {}, True
            for sa in (1, -1):
                for sb in (1, -1):
                    sm = sa * Er + sb * Er1
                    sm /= np.linalg.norm(sm)
                    sp, sn = sm + eps * Fr, sm - eps * Fr
                    gp, gn = _signs(normals, sp, tol), _signs(normals, sn, tol)
                    if gp is None or gn is None:
                        ok = False
                        break
                    if len(others) and np.any(np.sign(others @ sp) != np.sign(others @ sn)):
                        ok = False
                        break
                    diffs[(sa, sb)] = W(gp) - W(gn)
                    probes[(sa, sb)] = (sp / np.linalg.norm(sp), sn / np.linalg.norm(sn))
                if not ok:
                    break
            if ok:
                break
            eps *= 0.5
        else:
            raise ProbeDegenerate(f"no valid probe offset at vertex {a}, star face {r}")
        vals = list(diffs.values())
        odd = [key for key, v in diffs.items() if vals.count(v) == 1]
        if len(odd) != 1 or len(set(vals)) != 2:
            raise InconsistentEdgeSigns(f"probe differences {diffs} do not single out an arc")
        er, er1 = odd[0]
        pair_signs.append((er, er1))
        # any arc gives the kink once the base-edge sign is known
        sp, sn = probes[(1, 1)]
        kinks[r] = (diffs[(1, 1)], sp, sn, q)

    e = [None] * b
    for r, (er, er1) in enumerate(pair_signs):
        for idx, val in ((r, er), ((r + 1) % b, er1)):
            if e[idx] is None:
                e[idx] = val
            elif e[idx] != val:
                raise InconsistentEdgeSigns(f"edge {idx} gets signs {e[idx]} and {val}")

    k = []
    for r in range(b):
        d, sp, sn, q = kinks[r]
        tri = (e[q] * E[q], e[r] * E[r], e[(r + 1) % b] * E[(r + 1) % b])
        kr = -d + tau_indicator(sp, *tri) - tau_indicator(sn, *tri)
        k.append(int(kr))

    omega_app = _omega_from_identity(normals, E, F, e, k, W)
    return VertexStarInvariants(vertex=a, e=tuple(int(x) for x in e), k=tuple(k),
                                omega=-omega_app, edges=E)


def _omega_from_identity(normals, E, F, e, k, W):
    b = len(E)
    rng = np.random.default_rng(12345)
    vals = []
    for _ in range(64):
        s = rng.standard_normal(3)
        s /= np.linalg.norm(s)
        sig = _signs(normals, s, 1e-6)
        if sig is None:
            continue
        try:
            tot = 4 * math.pi * W(sig)
            tot += 2 * math.pi * sum(np.sign(F[r] @ s) * k[r] for r in range(b))
            for r in range(1, b - 1):
                tri = (e[0] * E[0], e[r] * E[r], e[r + 1] * E[r + 1])
                tot += spherical_triangle_area_oriented(*tri) - 4 * math.pi * tau_indicator(s, *tri)
        except Exception:
            continue
        vals.append(tot)
        if len(vals) >= 3:
            break
    if not vals:
        raise ProbeDegenerate("no transverse direction found for the trapped area")
    if max(vals) - min(vals) > 1e-8:
        raise InconsistentEdgeSigns("trapped area depends on the probe direction")
    return float(np.mean(vals))


def prism_octant_from_star(prism, a, inv):
    """Convert star invariants at a prism vertex to the local octant frame."""
    e = [0, 0, 0]
    k = [0, 0, 0]
    for r, Er in enumerate(inv.edges):
        j = int(np.argmax(np.abs(Er)))
        e[j] = inv.e[r]
        # star face r is normal to the third axis
        Fn = prism.polyhedron.face_normals[prism.polyhedron.star_faces[a][r]]
        jf = int(np.argmax(np.abs(Fn)))
        k[jf] = -inv.k[r]
    return OctantTopology(tuple(e), tuple(k), inv.omega)


def frank_oseen_sandwich(K1, K2, K3, E_minus, kappa, C):
    """Lower and upper Frank-Oseen bounds from the one-constant bounds."""
    if min(K1, K2, K3) < 0 or E_minus < 0 or C <= 0 or kappa <= 0:
        raise NegativeConstant("elastic constants and bounds must be nonnegative")
    km, kp = min(K1, K2, K3), max(K1, K2, K3)
    return km * E_minus, C * kp * kappa**3 * E_minus
