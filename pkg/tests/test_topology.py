import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from hbounds.errors import (InadmissibleTopology, InconsistentWrapping, NegativeConstant,
                            ResidueViolation, UnknownSector)
from hbounds.geometry import rectangular_prism
from hbounds.connection import lower_bound_energy
from hbounds.topology import (OCTANTS, OctantTopology, TangentTopology, check_admissible,
                             classify_by_signs, classify_octant, frank_oseen_sandwich,
                             global_wrapping, invariants_from_wrapping_star, local_wrapping,
                             octant_from_wrapping, omega_star, prism_octant_from_star,
                             prism_sigma, residue_ok, wrapping_from_octant)

signs = st.tuples(*[st.sampled_from([1, -1])] * 3)
kinks = st.tuples(*[st.integers(-3, 3)] * 3)


def test_identity_map_wraps_positive_octant_once():
    w = wrapping_from_octant((1, 1, 1), (0, 0, 0), -math.pi / 2)
    assert w[(1, 1, 1)] == -1
    assert all(v == 0 for o, v in w.items() if o != (1, 1, 1))


@settings(max_examples=200, deadline=None)
@given(signs, kinks, st.integers(-3, 3))
def test_octant_roundtrip(e, k, m):
    om = omega_star(e, k) + 4 * math.pi * m
    assert residue_ok(e, k, om)
    w = wrapping_from_octant(e, k, om)
    # trapped area is the signed total of the covered octants
    assert math.isclose(om, math.pi / 2 * sum(w.values()), abs_tol=1e-9)
    t = octant_from_wrapping(w)
    assert t.e == e and t.k == k and math.isclose(t.omega, om, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(signs, kinks, st.floats(0.1, 1.9))
def test_residue_rejects_off_lattice(e, k, frac):
    om = omega_star(e, k) + frac * math.pi / 2
    assert not residue_ok(e, k, om)
    with pytest.raises(ResidueViolation):
        wrapping_from_octant(e, k, om)


def test_bad_edge_signs():
    with pytest.raises(InconsistentWrapping):
        OctantTopology((1, 0, 1), (0, 0, 0), 0.0)
    with pytest.raises(InconsistentWrapping):
        octant_from_wrapping({(1, 1, 1): 2})


def test_classification_matches_wrapping_signs():
    # threshold rule vs the sign pattern of the wrapping numbers
    for e in itertools.product((1, -1), repeat=3):
        for k in itertools.product(range(-2, 3), repeat=3):
            for m in range(-3, 4):
                om = omega_star(e, k) + 4 * math.pi * m
                w = wrapping_from_octant(e, k, om)
                got, _ = classify_octant(e, k, om)
                assert got == classify_by_signs(w), (e, k, m)


def test_conformal_representative_is_conformal():
    for e in itertools.product((1, -1), repeat=3):
        for k in itertools.product(range(-2, 3), repeat=3):
            w = wrapping_from_octant(e, k, omega_star(e, k))
            assert all(v <= 0 for v in w.values())


@given(st.integers(0, 7), st.dictionaries(st.sampled_from(OCTANTS), st.integers(-4, 4)))
def test_local_global_inverse(a, table):
    assert {o: v for o, v in local_wrapping(a, global_wrapping(a, table)).items()} == {
        o: table.get(o, 0) for o in OCTANTS}


@given(st.dictionaries(st.integers(0, 7), st.dictionaries(
    st.sampled_from(OCTANTS), st.integers(-4, 4).filter(bool))))
def test_topology_serialisation_roundtrip(tables):
    t = TangentTopology.from_octants(tables)
    back = TangentTopology.from_dict(t.to_dict(), 6)
    assert back.w == t.w


def test_from_dict_rejects_wrong_length():
    with pytest.raises(UnknownSector):
        TangentTopology.from_dict({"vertices": {"0": {"++++": 1}}}, 6)


def _mn00():
    from hbounds.battery import mn_topology
    return mn_topology(0, 0)


def test_mn_topology_is_admissible(cube, cube_partition):
    rep = check_admissible(cube, cube_partition, _mn00())
    assert rep.ok, rep.violations


def test_sum_rule_violation_detected(cube, cube_partition):
    t = _mn00()
    w = {a: dict(d) for a, d in t.w.items()}
    s = prism_sigma((1, 1, 1))
    w[0][s] = w[0].get(s, 0) + 1
    bad = TangentTopology(w)
    rep = check_admissible(cube, cube_partition, bad)
    assert not rep.ok
    with pytest.raises(InadmissibleTopology):
        lower_bound_energy(cube.polyhedron, cube_partition, bad)


@pytest.mark.parametrize("dims", [(1, 1, 1), (3, 2, 1)])
def test_star_reconstruction_sample(dims):
    p = rectangular_prism(*dims)
    for e, k, m in [((1, 1, 1), (0, 0, 0), 0), ((1, -1, 1), (2, -1, 0), 1),
                    ((-1, -1, -1), (0, 1, -2), -1), ((-1, 1, 1), (1, 1, 1), 2)]:
        om = omega_star(e, k) + 4 * math.pi * m
        wl = wrapping_from_octant(e, k, om)
        for a in range(8):
            w = {prism_sigma(o): v for o, v in global_wrapping(a, wl).items() if v}
            t = prism_octant_from_star(p, a, invariants_from_wrapping_star(p, a, w))
            assert t.e == e and t.k == k and math.isclose(t.omega, om, abs_tol=1e-9)


def test_frank_oseen_sandwich():
    lo, hi = frank_oseen_sandwich(1.0, 2.0, 3.0, 5.0, 2.0, 0.5)
    assert lo == 5.0 and hi == 0.5 * 3.0 * 8 * 5.0
    with pytest.raises(NegativeConstant):
        frank_oseen_sandwich(-1, 1, 1, 1, 1, 1)
