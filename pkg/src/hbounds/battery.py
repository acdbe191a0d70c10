"""Batteries of admissible prism configurations built from octant maps.

Each configuration is a :class:`TangentTopology` on a prism, realised by
eight conformal or surgered maps placed at the vertices with the value
frame conjugated by the vertex reflection.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from .errors import HBoundsError
from .octant import VertexField, mn_example_field, surgered_map
from .quadrature import wrapping_numbers_numeric
from .sectors import enumerate_sectors
from .topology import (TangentTopology, check_admissible, global_wrapping, local_wrapping,
                       octant_from_wrapping, omega_star)


def local_invariants(topology, a):
    """Local ``(e, k, omega)`` at prism vertex ``a`` of a global topology."""
    return octant_from_wrapping(local_wrapping(a, topology.octant_table(a)))


def prism_fields(prism, topology):
    """Vertex fields realising a prism topology, one per vertex."""
    out = []
    for a in range(8):
        t = local_invariants(topology, a)
        R = prism.reflection(a)
        out.append(VertexField(surgered_map(t.e, t.k, t.omega), R, R))
    return out


def topology_from_local(tables):
    """Global topology from local octant tables ``{a: {octant: w}}``."""
    return TangentTopology.from_octants({a: global_wrapping(a, t) for a, t in tables.items()})


_MN_CACHE = {}


def mn_topology(M, N):
    """Wrapping numbers of the (M, N) example on the unit cube, by quadrature."""
    if (M, N) not in _MN_CACHE:
        from .geometry import rectangular_prism
        cube = rectangular_prism(1.0, 1.0, 1.0)
        part = enumerate_sectors(cube.polyhedron)
        fields = mn_example_field(M, N, cube)
        w = {}
        for a, f in enumerate(fields):
            res = wrapping_numbers_numeric(f, part)
            w[a] = {s: v for s, v in res["w"].items() if v}
        _MN_CACHE[(M, N)] = TangentTopology(w)
    return _MN_CACHE[(M, N)]


def _local_tables(topology):
    return {a: local_wrapping(a, topology.octant_table(a)) for a in range(8)}


def surgery_shift(topology, a, b, m):
    """Add ``m`` to every sector at vertex ``a`` and ``-m`` at vertex ``b``."""
    t = _local_tables(topology)
    t[a] = {o: v + m for o, v in t[a].items()}
    t[b] = {o: v - m for o, v in t[b].items()}
    return topology_from_local(t)


def kink_shift(topology, a, b, axis, dk):
    """Shift the kink about ``axis`` by ``+dk`` at ``a`` and ``-dk`` at ``b``.

    The trapped areas move by ``+-2 pi dk`` so the residue rule still holds.
    Both vertices must lie on the same face normal to ``axis``.
    """
    t = _local_tables(topology)
    for v, d in ((a, dk), (b, -dk)):
        t[v] = {o: w + d * (1 if o[axis] > 0 else 0) for o, w in t[v].items()}
    return topology_from_local(t)


def face_pairs(axis):
    """Vertex pairs lying on a common face normal to ``axis``."""
    out = []
    for tau in (0, 1):
        vs = [a for a in range(8) if ((a >> (2 - axis)) & 1) == tau]
        out.extend(itertools.combinations(vs, 2))
    return out


@dataclass
class BatteryCase:
    name: str
    topology: TangentTopology
    max_abs_k: int
    max_abs_m: int


def _complexity(topology):
    ks, ms = [], []
    for a in range(8):
        t = local_invariants(topology, a)
        ks.append(max(abs(x) for x in t.k))
        ms.append(abs(round((t.omega - omega_star(t.e, t.k)) / (4 * math.pi))))
    return max(ks), max(ms)


def is_realisable(prism, topology):
    """Admissible, and every face trace closes up."""
    from .extension import PRISM_FACES, boundary_theta
    part = enumerate_sectors(prism.polyhedron)
    if not check_admissible(prism, part, topology).ok:
        return False
    try:
        fields = prism_fields(prism, topology)
        for axis, tau in PRISM_FACES:
            boundary_theta(prism, fields, axis, tau, samples=512)
    except HBoundsError:
        return False
    return True


def construction_battery(prism, max_k=2, max_m=2, bases=((0, 0), (1, 0), (0, 1), (1, 1)),
                         limit=None):
    """Admissible topologies from the (M, N) examples and paired shifts.

    Parameters
    ----------
    max_k, max_m : int
        Caps on the largest local kink number and surgery count.
    limit : int, optional
        Stop after this many cases.
    """
    seen = set()
    cases = []

    def add(name, topo):
        key = tuple(sorted((a, tuple(sorted(d.items()))) for a, d in topo.w.items()))
        if key in seen:
            return
        kk, mm = _complexity(topo)
        if kk > max_k or mm > max_m:
            return
        if not is_realisable(prism, topo):
            return
        seen.add(key)
        cases.append(BatteryCase(name, topo, kk, mm))

    for M, N in bases:
        base = mn_topology(M, N)
        add(f"mn{M}{N}", base)
        for m in range(1, max_m + 1):
            add(f"mn{M}{N}+s{m}", surgery_shift(base, 0, 7, m))
            add(f"mn{M}{N}-s{m}", surgery_shift(base, 0, 7, -m))
            add(f"mn{M}{N}+s{m}b", surgery_shift(base, 1, 2, m))
        for axis in range(3):
            for a, b in face_pairs(axis)[:2]:
                for dk in (1, -1, 2):
                    add(f"mn{M}{N}-k{axis}{a}{b}{dk:+d}", kink_shift(base, a, b, axis, dk))
        if limit and len(cases) >= limit:
            break
    return cases[:limit] if limit else cases


def fitted_constants(rows):
    """Largest ratios E2/sum|w| and E1/(1 + k^2) over battery rows."""
    c1 = max(r["E2"] / max(r["sum_w"], 1) for r in rows)
    c2 = max(e / (1 + k * k) for r in rows for e, k in zip(r["E1"], r["k"]))
    return c1, c2


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])

