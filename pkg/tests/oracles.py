"""Independent reference computations shared by the tests."""

import numpy as np


def octant_grid(n):
    """Directions on a (theta, phi) grid of the positive octant."""
    th = np.linspace(0.0, np.pi / 2, n + 1)
    ph = np.linspace(0.0, np.pi / 2, n + 1)
    T, P = np.meshgrid(th, ph, indexing="ij")
    return np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)


def discrete_wrapping(values_dirs, targets, n=400, R=None):
    """Signed preimage count of each target under a piecewise-linear field.

    The octant is triangulated on a (theta, phi) grid, every small image
    triangle is tested for containing the target and counted with its
    orientation. The sign follows the package convention (the identity
    wraps the positive octant -1 times).
    """
    S = octant_grid(n)
    if R is not None:
        S = S @ R
    V = values_dirs(S.reshape(-1, 3)).reshape(S.shape)
    quads = [(V[:-1, :-1], V[1:, :-1], V[1:, 1:]), (V[:-1, :-1], V[1:, 1:], V[:-1, 1:])]
    dom = [(S[:-1, :-1], S[1:, :-1], S[1:, 1:]), (S[:-1, :-1], S[1:, 1:], S[:-1, 1:])]
    out = []
    for y in np.atleast_2d(targets):
        tot = 0
        for (a, b, c), (p, q, r) in zip(quads, dom):
            a, b, c = (x.reshape(-1, 3) for x in (a, b, c))
            p, q, r = (x.reshape(-1, 3) for x in (p, q, r))
            od = np.sign(np.einsum("ij,ij->i", p, np.cross(q, r)))
            det = np.einsum("ij,ij->i", a, np.cross(b, c))
            o = np.sign(det)
            s1 = np.sign(np.cross(a, b) @ y)
            s2 = np.sign(np.cross(b, c) @ y)
            s3 = np.sign(np.cross(c, a) @ y)
            near = (a @ y > 0)
            inside = (s1 == o) & (s2 == o) & (s3 == o) & (o != 0) & (od != 0) & near
            tot += int(np.sum((o * od)[inside]))
        out.append(-tot)
    return out


def fd_jacobian(values_dirs, s, h=1e-6):
    """Tangential derivative of the field by centred differences."""
    s = np.asarray(s, float)
    ref = np.array([1.0, 0.3, -0.7])
    t1 = np.cross(s, ref)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(s, t1)
    cols = []
    for t in (t1, t2):
        p, m = s + h * t, s - h * t
        p /= np.linalg.norm(p)
        m /= np.linalg.norm(m)
        cols.append((values_dirs(p[None])[0] - values_dirs(m[None])[0]) / (2 * h))
    return np.stack(cols, axis=1), np.stack([t1, t2], axis=1)
