import numpy as np
import pytest
from scipy.spatial import ConvexHull

from hbounds.geometry import build_polyhedron, rectangular_prism


def tetrahedron():
    V = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    return build_polyhedron(V, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


def octahedron():
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    F = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return build_polyhedron(V, F)


def random_polyhedron(rng, n=None):
    """Convex hull of random points (simplicial faces)."""
    n = n or int(rng.integers(5, 12))
    pts = rng.normal(size=(n, 3))
    hull = ConvexHull(pts)
    used = sorted(set(hull.simplices.ravel()))
    remap = {v: i for i, v in enumerate(used)}
    return build_polyhedron(pts[used], [[remap[v] for v in s] for s in hull.simplices])


def fuzz_corpus(n=20, seed=7):
    rng = np.random.default_rng(seed)
    return [random_polyhedron(rng) for _ in range(n)]


@pytest.fixture(scope="session")
def cube():
    return rectangular_prism(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def cube_partition(cube):
    from hbounds.sectors import enumerate_sectors
    return enumerate_sectors(cube.polyhedron)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
