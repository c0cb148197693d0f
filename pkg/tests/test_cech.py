import json
from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from gerbelab import cech, cup
from gerbelab.cech import (Cochain, CocycleError, Cover, NerveError, Ring, SmoothCochain,
                           build_nerve, delta, is_cocycle, solve_coboundary)


def brute_force_nerve(cover, max_degree):
    """Every subset of indices, tested directly against the oracle."""
    out = []
    for p in range(max_degree + 1):
        out.append(sorted(s for s in combinations(range(cover.index_count), p + 1)
                          if cover.intersects(s)))
    return out


def test_three_arcs(circle3):
    assert circle3.sizes() == [3, 3, 0, 0, 0]


def test_single_set():
    nerve = build_nerve(Cover(1, lambda s: True))
    assert nerve.sizes() == [1, 0, 0, 0, 0]


def test_torus_nerve_matches_brute_force_edges(torus3):
    space = torus3.cover.space
    edges = [(i, j) for i, j in combinations(range(27), 2)
             if all(((a - b) % 3) in (0, 1, 2) and space.factors[k].intersects((a, b))
                    for k, (a, b) in enumerate(zip(space.split(i), space.split(j))))]
    assert torus3.count(0) == 27
    assert list(torus3.simplices[1]) == edges
    # three arcs pairwise overlap, so every pair of boxes meets
    assert len(edges) == 27 * 26 // 2


def test_small_nerve_matches_full_enumeration():
    cover = cech.product_cover(cech.circle_cover(3), cech.circle_cover(4))
    nerve = build_nerve(cover, 4)
    assert [list(level) for level in nerve.simplices] == brute_force_nerve(cover, 4)


def test_octahedron_is_sphere_boundary(octahedron):
    assert octahedron.sizes() == [6, 12, 8, 0, 0]


def test_degree_cap_enforced():
    with pytest.raises(NerveError):
        build_nerve(Cover(2, lambda s: True), max_degree=2)


def test_rejects_non_downward_closed_oracle():
    # the triple is claimed nonempty but one of its edges is empty
    def bad(s):
        return set(s) != {0, 1}
    with pytest.raises(NerveError):
        build_nerve(Cover(3, bad))


def test_delta_example(circle3):
    v = Cochain(0, Ring.INT, [0, 1, 0])
    d = delta(v, circle3)
    # edges (0,1), (0,2), (1,2)
    assert d.values.tolist() == [1, 0, -1]


def test_delta_of_constant_is_zero(torus3):
    for ring in Ring:
        v = Cochain(0, ring, np.full(27, 0.25 if ring is not Ring.INT else 7))
        assert not np.any(delta(v, torus3).values)


def test_delta_degree_overflow(circle3):
    with pytest.raises(NerveError):
        delta(Cochain(4, Ring.INT, []), circle3)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_delta_squared_vanishes(sphere_circle, data):
    nerve = sphere_circle.nerve
    p = data.draw(st.integers(0, 2))
    ring = data.draw(st.sampled_from(list(Ring)))
    n = nerve.count(p)
    if ring is Ring.INT:
        vals = data.draw(st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n))
    else:
        vals = data.draw(st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n))
    c = Cochain(p, ring, np.array(vals))
    dd = delta(delta(c, nerve), nerve).values
    if ring is Ring.INT:
        assert not np.any(dd)
    elif ring is Ring.CIRCLE:
        assert cech.circle_distance(dd).max() < 1e-12
    else:
        assert np.abs(dd).max() < 1e-9  # values up to 1e3, a few terms


def test_circle_values_reduced():
    c = Cochain(1, Ring.CIRCLE, [-0.25, 1.5, 3.0])
    assert c.values.tolist() == [0.75, 0.5, 0.0]


def test_random_circle_cochain_not_cocycle(torus3, rng):
    g = Cochain(2, Ring.CIRCLE, rng.random(torus3.count(2)))
    assert not is_cocycle(g, torus3)


def test_coboundary_is_cocycle(torus3, rng):
    q = Cochain(1, Ring.CIRCLE, rng.random(torus3.count(1)))
    assert is_cocycle(delta(q, torus3), torus3)


# -- solve_coboundary ---------------------------------------------------------

def test_solve_constructed_coboundary(torus3, rng):
    for ring in (Ring.INT, Ring.CIRCLE):
        vals = rng.integers(-4, 5, torus3.count(1)) if ring is Ring.INT else rng.random(torus3.count(1))
        g = delta(Cochain(1, ring, vals), torus3)
        q = solve_coboundary(g, torus3)
        assert q is not None
        assert delta(q, torus3).equals(g, tol=1e-10)


def test_winding_cocycle_not_coboundary(circle3):
    g = Cochain(1, Ring.INT, [0, 0, 1])
    assert is_cocycle(g, circle3)
    assert solve_coboundary(g, circle3) is None


def test_zero_cocycle(circle3):
    q = solve_coboundary(Cochain(1, Ring.INT, [0, 0, 0]), circle3)
    assert q is not None and not np.any(q.values)


def test_solve_rejects_non_cocycle(octahedron, torus3, rng):
    g = Cochain(2, Ring.CIRCLE, rng.random(torus3.count(2)))
    with pytest.raises(CocycleError):
        solve_coboundary(g, torus3)


def _rational_solvable(nerve, g):
    rows = cech.coboundary_rows(nerve, g.degree - 1)
    A = sympy.Matrix([[r.get(j, 0) for j in range(nerve.count(g.degree - 1))] for r in rows])
    b = sympy.Matrix([int(v) for v in g.values])
    return A.rank() == A.row_join(b).rank()


@pytest.mark.parametrize("name", ["circle", "octahedron", "tetrahedron"])
def test_solve_agrees_with_rational_solve(name, rng):
    if name == "circle":
        nerve, p = build_nerve(cech.circle_cover(5)), 1
    elif name == "octahedron":
        nerve, p = cup.octahedral_nerve(), 2
    else:
        nerve, p = cech.nerve_from_simplices(4, [s for s in combinations(range(4), 3)]), 2
    for _ in range(25):
        if rng.random() < 0.5:
            g = delta(Cochain(p - 1, Ring.INT, rng.integers(-3, 4, nerve.count(p - 1))), nerve)
        else:
            g = Cochain(p, Ring.INT, rng.integers(-3, 4, nerve.count(p)))
            if not is_cocycle(g, nerve):
                continue
        # these complexes are torsion free, so rational and integral solvability agree
        assert (solve_coboundary(g, nerve) is not None) == _rational_solvable(nerve, g)


def test_integral_solve_sees_torsion():
    nerve, _, _ = cup.rp2_circle()
    rp2 = cech.nerve_from_simplices(6, [tuple(v - 1 for v in f) for f in cup.RP2_FACES])
    face = Cochain(2, Ring.INT, np.eye(rp2.count(2), dtype=np.int64)[0])
    assert _rational_solvable(rp2, face)
    assert solve_coboundary(face, rp2) is None
    assert solve_coboundary(2 * face, rp2) is not None


def test_circle_solve_matches_pairing_oracle(octahedron, circle3, rng):
    cyc = cech.sphere_cycle(octahedron)
    for _ in range(20):
        g = Cochain(2, Ring.CIRCLE, rng.random(8))
        if rng.random() < 0.5:
            # force the total pairing to be an integer
            fix = -np.dot(g.values, cyc) * cyc[0]
            g = Cochain(2, Ring.CIRCLE, g.values + np.eye(8)[0] * fix)
        expected = cech.circle_distance(np.dot(g.values, cyc)) < 1e-9
        q = solve_coboundary(g, octahedron)
        assert (q is not None) == expected
        if q is not None:
            assert delta(q, octahedron).equals(g, tol=1e-10)
    h = Cochain(1, Ring.CIRCLE, [0.0, 0.0, 0.5])
    assert solve_coboundary(h, circle3) is None
    assert solve_coboundary(Cochain(1, Ring.CIRCLE, [0.2, 0.5, 0.3]), circle3) is not None


# -- smooth cochains, maps, chains ---------------------------------------------------

def test_smooth_cochain_arithmetic(circle3):
    f = SmoothCochain(0, Ring.REAL, (lambda p: p[:, 0], 1.0, 0.5))
    g = f + Cochain(0, Ring.REAL, [1.0, 1.0, 1.0])
    pts = np.array([[0.1], [0.2]])
    assert np.allclose(g.evaluate(0, pts), [1.1, 1.2])
    assert np.allclose((-g).evaluate(1, pts), [-2.0, -2.0])


def test_refinement_map_three_to_six_arcs():
    coarse = build_nerve(cech.circle_cover(3))
    fine = build_nerve(cech.circle_cover(6, overlap=0.01))
    vmap = cech.refinement_map(fine, coarse)
    z = Cochain(1, Ring.INT, [0, 0, 1])
    zf = cech.pullback(z, coarse, fine, vmap)
    assert is_cocycle(zf, fine)
    assert cech.pairing(zf, cech.circle_cycle(fine)) == cech.pairing(z, cech.circle_cycle(coarse)) == 1


def test_refinement_requires_containment():
    coarse = build_nerve(cech.circle_cover(3))
    fine = build_nerve(cech.circle_cover(4))
    with pytest.raises(NerveError):
        cech.check_refinement(fine, coarse, [0, 0, 1, 2])


@pytest.mark.parametrize("which", ["circle", "sphere", "torus", "product"])
def test_fundamental_cycles_are_cycles(which, circle3, octahedron, torus3, sphere_circle):
    nerve, dim = {"circle": (circle3, 1), "sphere": (octahedron, 2), "torus": (torus3, 3),
                  "product": (sphere_circle.nerve, 3)}[which]
    cyc = cech.fundamental_cycle(nerve)
    assert np.any(cyc)
    assert not np.any(cech.boundary(cyc, nerve, dim))


def test_json_round_trip(tmp_path, octahedron, rng):
    g = Cochain(2, Ring.CIRCLE, rng.random(8))
    z = Cochain(1, Ring.INT, rng.integers(-3, 3, 12))
    path = tmp_path / "oct.json"
    cech.dump(path, octahedron, {"g": g, "z": z})
    obj = json.loads(path.read_text())
    assert obj["vertices"] == 6 and obj["cochains"]["g"]["ring"] == "R/Z"
    nerve, cochains = cech.load(path)
    assert nerve.simplices == octahedron.simplices
    assert cochains["g"].equals(g) and np.array_equal(cochains["z"].values, z.values)
