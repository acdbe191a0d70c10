"""Minimal connections and the lower bound built from them."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import CardinalityMismatch, InfeasiblePotentials, UnbalancedDegrees
from .sectors import sign_string
from .topology import _check_keys, require_sum_rule


def hungarian(cost):
    """Optimal assignment for a square cost matrix.

    Shortest augmenting path with dual potentials, O(m^3).

    Parameters
    ----------
    cost : array_like, shape (m, m)

    Returns
    -------
    ndarray of int
        ``assign[i]`` is the column matched to row ``i``.
    """
    C = np.asarray(cost, float)
    m = C.shape[0]
    if C.shape != (m, m):
        raise CardinalityMismatch("cost matrix must be square")
    if m == 0:
        return np.zeros(0, dtype=int)
    INF = math.inf
    u = np.zeros(m + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=int)  # p[j]: row matched to column j (1-based)
    way = np.zeros(m + 1, dtype=int)
    for i in range(1, m + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta, j1 = INF, 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = C[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assign = np.zeros(m, dtype=int)
    for j in range(1, m + 1):
        assign[p[j] - 1] = j - 1
    return assign


@dataclass(frozen=True)
class ConnectionResult:
    length: float
    pairs: tuple  # (positive index, negative index)
    distances: tuple


def minimal_connection(positives, negatives):
    """Minimal total Euclidean length of a perfect matching.

    Parameters
    ----------
    positives, negatives : array_like, shape (m, 3)
    """
    P = np.asarray(positives, float).reshape(-1, 3)
    N = np.asarray(negatives, float).reshape(-1, 3)
    if len(P) != len(N):
        raise CardinalityMismatch(f"{len(P)} positives vs {len(N)} negatives")
    if len(P) == 0:
        return ConnectionResult(0.0, (), ())
    D = np.linalg.norm(P[:, None, :] - N[None, :, :], axis=2)
    assign = hungarian(D)
    pairs = tuple((i, int(assign[i])) for i in range(len(P)))
    dists = tuple(float(D[i, j]) for i, j in pairs)
    return ConnectionResult(math.fsum(dists), pairs, dists)


def constellation(vertices, topology, sigma):
    """Positive and negative point multisets of sector ``sigma``."""
    P, N = [], []
    for a in topology.vertices():
        w = topology.get(a, sigma)
        if w > 0:
            P.extend([vertices[a]] * w)
        elif w < 0:
            N.extend([vertices[a]] * (-w))
    return np.array(P).reshape(-1, 3), np.array(N).reshape(-1, 3)


def lower_bound_energy(polyhedron, partition, topology):
    """Lower bound ``sum_sigma 2 A_sigma L_sigma`` with its breakdown.

    Returns
    -------
    dict
        ``{"E_minus": float, "sectors": [...]}``.
    """
    _check_keys(partition, topology)
    require_sum_rule(partition, topology)
    V = polyhedron.vertices
    rows = []
    terms = []
    for sec in partition.sectors:
        P, N = constellation(V, topology, sec.sign_vector)
        res = minimal_connection(P, N)
        terms.append(2.0 * sec.area * res.length)
        rows.append({"sigma": sign_string(sec.sign_vector), "area": sec.area,
                     "L": res.length, "pairs": [list(p) for p in res.pairs]})
    return {"E_minus": math.fsum(terms), "sectors": rows}


def dual_feasible_value(polyhedron, topology, sigma, xi, tol=1e-12):
    """Dual objective ``sum_a xi_a w_a`` for 1-Lipschitz potentials."""
    V = np.asarray(polyhedron.vertices, float)
    xi = np.asarray(xi, float)
    D = np.linalg.norm(V[:, None] - V[None, :], axis=2)
    if np.any(np.abs(xi[:, None] - xi[None, :]) > D + tol * max(1.0, D.max())):
        raise InfeasiblePotentials("potentials violate the Lipschitz constraint")
    return float(sum(xi[a] * topology.get(a, sigma) for a in range(len(V))))


def bcl_energy(points, degrees):
    """``8 pi`` times the minimal connection of a point-defect constellation."""
    pts = np.asarray(points, float).reshape(-1, 3)
    d = [int(x) for x in degrees]
    if sum(d) != 0:
        raise UnbalancedDegrees("degrees must sum to zero")
    P, N = [], []
    for p, k in zip(pts, d):
        if k > 0:
            P.extend([p] * k)
        elif k < 0:
            N.extend([p] * (-k))
    return 8 * math.pi * minimal_connection(P, N).length


def prism_floor(topology, Lz):
    """Floor ``(pi/2) L_z sum |w|`` on the prism lower bound."""
    tot = sum(abs(v) for d in topology.w.values() for v in d.values())
    return math.pi / 2 * Lz * tot
