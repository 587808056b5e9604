import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import pair_product, random_irreducible, systems
from rotspec.graph import (
    CylinderPotential,
    enumerate_periodic_orbits,
    full_shift,
    golden_mean,
    label_potential,
    simple_cycles,
    word_to_orbit,
)
from rotspec.rotation import (
    DecompositionError,
    PointClass,
    caratheodory_decompose,
    classify_point,
    max_mean_cycle,
    polytope_from_points,
    rotation_set,
    support_function,
)
from rotspec.thermo import measure_rotation_vector, pressure

FULL2 = full_shift(2)
X0 = label_potential(FULL2)
SYSTEMS = systems()


def brute_max_cycle_mean(graph, weights):
    """Oracle: best average over all simple cycles."""
    return max(np.mean(weights[list(c)]) for c in simple_cycles(graph))


# ----------------------------------------------------------------------------
# Support function


def test_support_examples():
    assert support_function(FULL2, X0, [1.0]) == pytest.approx(1.0)
    assert support_function(FULL2, X0, [-2.0]) == pytest.approx(0.0)
    gm = golden_mean()
    assert support_function(gm, label_potential(gm), [1.0]) == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_karp_matches_cycle_oracle(name, v):
    graph, phi = SYSTEMS[name]
    weights = phi.values @ np.array(v[: phi.dim])
    value, cycle = max_mean_cycle(graph, weights)
    assert value == pytest.approx(brute_max_cycle_mean(graph, weights), abs=1e-12)
    assert np.mean(weights[list(cycle)]) == pytest.approx(value, abs=1e-12)


# ----------------------------------------------------------------------------
# Rotation sets


def test_full_shift_segment():
    P = rotation_set(FULL2, X0)
    assert sorted(P.vertices[:, 0]) == pytest.approx([0.0, 1.0])
    assert P.affine_dim == 1


def test_constant_potential_is_a_point():
    graph, _ = SYSTEMS["random4"]
    P = rotation_set(graph, CylinderPotential(np.full((graph.n_edges, 2), 1.5)))
    assert P.affine_dim == 0
    assert P.vertices == pytest.approx(np.array([[1.5, 1.5]]))


def test_pair_product_triangle():
    G, phi = pair_product()
    P = rotation_set(G, phi)
    verts = {tuple(np.round(v, 12)) for v in P.vertices}
    assert verts == {(0.0, 0.0), (1.0, 1.0), (0.5, 0.0)}
    assert P.affine_dim == 2


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_vertices_satisfy_halfspaces(name):
    P = rotation_set(*SYSTEMS[name])
    for n, c in P.halfspaces:
        assert (P.vertices @ n <= c + 1e-9).all()


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_facets_are_supporting(name):
    graph, phi = SYSTEMS[name]
    P = rotation_set(graph, phi)
    for n, c in P.halfspaces:
        assert support_function(graph, phi, n) == pytest.approx(c, abs=1e-9)


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_cycle_and_oracle_methods_agree(name):
    graph, phi = SYSTEMS[name]
    a = rotation_set(graph, phi, method="cycles")
    b = rotation_set(graph, phi, method="oracle")
    key = lambda P: sorted(tuple(np.round(v, 9)) for v in P.vertices)
    assert key(a) == key(b)


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_exactness_duality(name):
    graph, phi = SYSTEMS[name]
    P = rotation_set(graph, phi)
    rng = np.random.default_rng(7)
    for _ in range(200):
        v = rng.normal(size=phi.dim)
        v /= np.linalg.norm(v)
        assert abs(P.support(v) - support_function(graph, phi, v)) <= 1e-9


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_periodic_orbits_stay_inside(name):
    graph, phi = SYSTEMS[name]
    P = rotation_set(graph, phi)
    for o in enumerate_periodic_orbits(graph, 7):
        assert classify_point(P, o.rotation_vector(phi)) is not PointClass.EXTERIOR


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_equilibrium_rotation_vectors_never_exterior(name, v):
    graph, phi = SYSTEMS[name]
    P = rotation_set(graph, phi)
    rv = measure_rotation_vector(pressure(graph, phi, np.array(v[: phi.dim])).equilibrium, phi)
    assert classify_point(P, rv) is not PointClass.EXTERIOR


def test_polytope_from_points_hull():
    rng = np.random.default_rng(0)
    pts = rng.uniform(size=(30, 2))
    P = polytope_from_points(pts)
    from scipy.spatial import ConvexHull

    ref = {tuple(np.round(p, 12)) for p in pts[ConvexHull(pts).vertices]}
    assert {tuple(np.round(v, 12)) for v in P.vertices} == ref


# ----------------------------------------------------------------------------
# Classification


def test_classify_examples():
    P = rotation_set(FULL2, X0)
    assert classify_point(P, [0.5]) is PointClass.INTERIOR
    assert classify_point(P, [0.0]) is PointClass.BOUNDARY
    assert classify_point(P, [1.5]) is PointClass.EXTERIOR


def test_classify_degenerate_diagonal():
    phi = CylinderPotential(np.hstack([X0.values, X0.values]))
    P = rotation_set(FULL2, phi)
    assert P.affine_dim == 1
    assert classify_point(P, [0.5, 0.5]) is PointClass.RELATIVE_INTERIOR
    assert classify_point(P, [0.0, 0.0]) is PointClass.BOUNDARY
    assert classify_point(P, [0.5, 0.6]) is PointClass.EXTERIOR


def test_classify_triangle():
    P = rotation_set(*pair_product())
    assert classify_point(P, [0.5, 0.25]) is PointClass.INTERIOR
    assert classify_point(P, [0.25, 0.0]) is PointClass.BOUNDARY
    assert classify_point(P, [0.5, 0.5]) is PointClass.BOUNDARY  # on the diagonal edge
    assert classify_point(P, [0.5, 0.6]) is PointClass.EXTERIOR


# ----------------------------------------------------------------------------
# Caratheodory decompositions


def orbit_data(graph, phi, L):
    orbits = enumerate_periodic_orbits(graph, L)
    return orbits, np.array([o.rotation_vector(phi) for o in orbits])


def test_decompose_two_fixed_points():
    P = rotation_set(FULL2, X0)
    orbits = [word_to_orbit(FULL2, "0"), word_to_orbit(FULL2, "1")]
    dec = caratheodory_decompose(P, orbits, [[0.0], [1.0]], [0.5])
    assert dec.coefficients == pytest.approx([0.5, 0.5])


def test_decompose_tie_break_is_lexicographic():
    P = rotation_set(FULL2, X0)
    orbits, R = orbit_data(FULL2, X0, 2)
    dec = caratheodory_decompose(P, orbits, R, [0.5])
    # oracle: first qualifying index tuple in lexicographic order
    subsets = sorted(s for k in (1, 2) for s in itertools.combinations(range(len(orbits)), k))
    for idx in subsets:
        M = np.vstack([R[list(idx)].T, np.ones(len(idx))])
        c, *_ = np.linalg.lstsq(M, [0.5, 1.0], rcond=None)
        if np.allclose(M @ c, [0.5, 1.0]) and (c > 1e-12).all():
            break
    assert list(dec.orbits) == [orbits[i] for i in idx]


def test_decompose_exterior():
    P = rotation_set(FULL2, X0)
    orbits, R = orbit_data(FULL2, X0, 2)
    with pytest.raises(DecompositionError):
        caratheodory_decompose(P, orbits, R, [1.5])


def test_decompose_needs_enough_orbits():
    G, phi = pair_product()
    P = rotation_set(G, phi)
    orbits = [word_to_orbit(G, "0")]
    with pytest.raises(DecompositionError):
        caratheodory_decompose(P, orbits, [orbits[0].rotation_vector(phi)], [0.5, 0.25])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_decomposition_recombines(a, b):
    G, phi = pair_product()
    P = rotation_set(G, phi)
    # a point of the triangle with vertices (0,0), (1,1), (0.5,0)
    w = a * (1 - b) * np.array([1.0, 1.0]) + (1 - a) * (1 - b) * np.array([0.5, 0.0]) + b * np.zeros(2)
    orbits, R = orbit_data(G, phi, 4)
    dec = caratheodory_decompose(P, orbits, R, w, full_dimensional=True)
    assert len(dec.orbits) <= 3
    assert dec.coefficients.sum() == pytest.approx(1.0, abs=1e-12)
    assert (dec.coefficients > 0).all()
    assert np.linalg.norm(dec.recombine() - w) <= 1e-9


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_graph_decomposition(seed):
    graph, phi = random_irreducible(seed=seed)
    P = rotation_set(graph, phi)
    w = P.vertices.mean(axis=0)
    orbits, R = orbit_data(graph, phi, 6)
    dec = caratheodory_decompose(P, orbits, R, w)
    assert np.linalg.norm(dec.recombine() - w) <= 1e-9
